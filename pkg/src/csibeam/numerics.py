"""
Complex vector primitives and a power-iteration eigensolver.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
The ``as_cvector`` / ``as_hermitian`` helpers validate inputs at module
boundaries; everything else assumes validated arrays.
"""

import numpy as np

from .errors import ConvergenceError, DimensionError

__all__ = ['as_cvector', 'as_hermitian', 'hermitian_inner', 'squared_norm',
           'dominant_eigenvectors', 'outer_sum']

HERMITIAN_ATOL = 1e-12
EIG_MAX_ITER = 10000
EIG_TOL = 1e-10
EIG_RESIDUAL_RTOL = 1e-8


def as_cvector(a, name='vector'):
    """Return `a` as a finite 1-D complex array with at least one entry."""
    v = np.asarray(a, dtype=np.complex128)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_hermitian(A, atol=HERMITIAN_ATOL):
    """Validate that `A` is square, finite and Hermitian within `atol`."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(A - A.conj().T)) > atol:
        raise ValueError("matrix is not Hermitian")
    return A


def hermitian_inner(a, b):
    """Return ``a^H b``, i.e. ``sum(conj(a_j) * b_j)``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def squared_norm(a):
    a = np.asarray(a, dtype=np.complex128)
    return float(np.vdot(a, a).real)


def outer_sum(vectors, weight=1.0):
    """``weight * sum_i v_i v_i^H`` for the rows of `vectors`."""
    V = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    R = weight * (V.T @ V.conj())
    # symmetrize away rounding so downstream Hermitian checks hold exactly
    return 0.5 * (R + R.conj().T)


def _phase_aligned_change(u, v):
    # eigenvectors are defined up to a unit-modulus factor
    c = np.vdot(v, u)
    phase = c / abs(c) if abs(c) > 0 else 1.0
    return np.linalg.norm(u - phase * v)


def dominant_eigenvectors(A, L, max_iter=EIG_MAX_ITER, tol=EIG_TOL, seed=0):
    """
    Compute the `L` dominant eigenpairs of a Hermitian PSD matrix.

    Power iteration with deflation. Each new vector is re-orthogonalized
    against the ones already found, so a rank-deficient matrix still yields
    an orthonormal set (extra vectors land in the null space).

    Parameters
    ----------
    A : array_like, shape (M, M)
        Hermitian positive semidefinite matrix.
    L : int
        Number of eigenpairs, ``1 <= L <= M``.
    max_iter : int
        Iteration cap per eigenvector.
    tol : float
        Stop when the phase-aligned change of the iterate drops below `tol`,
        or the residual drops below ``tol * ||A||``.
    seed : int
        Seed of the start vectors; fixed so results are reproducible.

    Returns
    -------
    values : ndarray, shape (L,)
        Eigenvalues in non-increasing order.
    vectors : ndarray, shape (L, M)
        Unit-norm eigenvectors, one per row.

    Raises
    ------
    ConvergenceError
        If some residual ``||A u - lambda u||`` stays above
        ``1e-8 * ||A||`` after `max_iter` iterations.
    """
    A = as_hermitian(A)
    M = A.shape[0]
    if not 1 <= L <= M:
        raise DimensionError(f"L={L} must lie in [1, {M}]")
    norm_A = np.linalg.norm(A, 2)
    rng = np.random.default_rng(seed)
    values = np.zeros(L)
    vectors = np.zeros((L, M), dtype=np.complex128)
    if norm_A == 0.0:
        Q, _ = np.linalg.qr(rng.standard_normal((M, L)) + 1j * rng.standard_normal((M, L)))
        return values, Q.T.copy()

    B = A.copy()
    for ell in range(L):
        found = vectors[:ell]
        u = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        u -= found.T @ (found.conj() @ u)
        u /= np.linalg.norm(u)
        best_res = np.inf
        for _ in range(max_iter):
            v = B @ u
            v -= found.T @ (found.conj() @ v)
            nv = np.linalg.norm(v)
            if nv <= 1e-300:
                # u already lies in the null space of the deflated matrix
                break
            v /= nv
            rho = np.vdot(v, A @ v).real
            res = np.linalg.norm(A @ v - rho * v)
            best_res = min(best_res, res)
            change = _phase_aligned_change(v, u)
            u = v
            if change <= tol or res <= tol * norm_A:
                break
        rho = np.vdot(u, A @ u).real
        res = np.linalg.norm(A @ u - rho * u)
        if res > EIG_RESIDUAL_RTOL * norm_A:
            raise ConvergenceError(
                f"power iteration for eigenvector {ell} did not converge "
                f"(residual {min(res, best_res):.3e})", residual=min(res, best_res))
        values[ell] = rho
        vectors[ell] = u
        B = B - rho * np.outer(u, u.conj())

    # deflation order already tracks the spectrum; sort guards near-ties
    order = np.argsort(-values, kind='stable')
    return values[order], vectors[order]
