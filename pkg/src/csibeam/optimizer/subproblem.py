"""
Convex subproblem of the successive approximation loop.

Around a feasible codebook ``w`` every quadratic gain is replaced by its
tangent minorant, leaving

    maximize    t
    subject to  sum_l 2 Re(a_kl^H f_l) - c_k >= t      for every channel k
                ||f_l||^2 <= P                           for every beam l

with ``a_kl = u_k (u_k^H w_l)``, ``c_k = sum_l |u_k^H w_l|^2`` and ``u_k``
the unit-norm channels. In real coordinates this is a second-order cone
program. It is solved here with a primal-dual interior-point method on the
inequality form (linear channel constraints, quadratic power constraints).

Optimality is certified independently of the solver path. For any weights
``lam`` on the probability simplex,

    D(lam) = 2 sqrt(P) sum_l ||sum_k lam_k a_kl|| - sum_k lam_k c_k

upper-bounds the optimum (Lagrangian relaxation of the channel
constraints, maximized in closed form over the balls). The solver returns
once ``D(lam) - t(f) <= tol`` for its primal point ``f`` and the simplex
weights given by the normalized multipliers of the channel constraints.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..errors import SolverError
from .gains import normalized_channels

CENTERING = 10.0
MAX_STEPS = 200
INTERIOR_SHRINK = 0.5


@dataclass
class SubproblemResult:
    beams: np.ndarray     # (L, M)
    t: float              # certified primal value min_k(minorant_k - c_k)
    dual_bound: float
    weights: np.ndarray   # simplex weights of the certificate, (K,)
    newton_steps: int
    rounds: int

    @property
    def gap(self):
        return self.dual_bound - self.t


class _Linearization:
    """Data of the subproblem for unit channels `U` (K, M) around `W` (L, M)."""

    def __init__(self, U, W, P):
        self.U = U
        self.W = W
        self.P = P
        self.K, self.M = U.shape
        self.L = W.shape[0]
        self.beta = U.conj() @ W.T                       # (K, L): u_k^H w_l
        self.c = np.sum(np.abs(self.beta) ** 2, axis=1)  # (K,)
        # rows r_k with r_k . z = sum_l 2 Re(a_kl^H f_l), z = [Re f_l, Im f_l]_l
        A = self.beta[:, :, None] * U[:, None, :]        # (K, L, M): a_kl
        self.R = 2.0 * np.concatenate([A.real, A.imag], axis=2).reshape(self.K, -1)

    def pack(self, F):
        return np.concatenate([F.real, F.imag], axis=1).ravel()

    def unpack(self, z):
        Z = z.reshape(self.L, 2 * self.M)
        return Z[:, :self.M] + 1j * Z[:, self.M:]

    def primal_value(self, F):
        return float(np.min(self.R @ self.pack(F) - self.c))

    def dual_directions(self, lam):
        # b_l = sum_k lam_k a_kl = U^T (lam * beta_l)
        return (lam[:, None] * self.beta).T @ self.U      # (L, M)

    def dual_bound(self, lam):
        B = self.dual_directions(lam)
        return float(2.0 * math.sqrt(self.P) * np.sum(np.linalg.norm(B, axis=1)) - lam @ self.c)

    def best_response(self, lam, fallback):
        """Beams maximizing the Lagrangian for weights `lam`."""
        B = self.dual_directions(lam)
        n = np.linalg.norm(B, axis=1)
        F = fallback.copy()
        ok = n > 0
        F[ok] = math.sqrt(self.P) * B[ok] / n[ok, None]
        return F


def _constraints(lin, t, z):
    """Values of all inequality constraints ``f_i(t, z) <= 0``."""
    Z = z.reshape(lin.L, -1)
    f_lin = t + lin.c - lin.R @ z
    f_pow = np.sum(Z * Z, axis=1) - lin.P
    return np.concatenate([f_lin, f_pow])


def _residuals(lin, t, z, lam, f, tau):
    K = lin.K
    Z = z.reshape(lin.L, -1)
    lam_lin, lam_pow = lam[:K], lam[K:]
    r_t = -1.0 + np.sum(lam_lin)
    r_z = -lin.R.T @ lam_lin + (2.0 * lam_pow[:, None] * Z).ravel()
    r_dual = np.concatenate([[r_t], r_z])
    r_cent = -lam * f - 1.0 / tau
    return r_dual, r_cent


def _pd_direction(lin, z, lam, f, r_dual, r_cent):
    K, L, d = lin.K, lin.L, 2 * lin.M
    n = 1 + L * d
    Z = z.reshape(L, -1)
    w = lam / -f
    w_lin, w_pow = w[:K], w[K:]
    lam_pow = lam[K:]
    # H_pd = sum lam_i hess f_i + sum w_i grad f_i grad f_i^T
    H = np.zeros((n, n))
    H[0, 0] = np.sum(w_lin)
    cross = -(lin.R.T @ w_lin)
    H[0, 1:] = cross
    H[1:, 0] = cross
    H[1:, 1:] = (lin.R.T * w_lin) @ lin.R
    for ell in range(L):
        sl = slice(1 + ell * d, 1 + (ell + 1) * d)
        H[sl, sl] += 2.0 * lam_pow[ell] * np.eye(d) + 4.0 * w_pow[ell] * np.outer(Z[ell], Z[ell])
    # rhs = -r_dual + Df^T (r_cent / -f)
    v = r_cent / -f
    rhs = -r_dual
    rhs[0] += np.sum(v[:K])
    rhs[1:] += -lin.R.T @ v[:K] + (2.0 * v[K:, None] * Z).ravel()
    try:
        dx = cho_solve(cho_factor(H, check_finite=False), rhs, check_finite=False)
    except LinAlgError:
        dx = np.linalg.lstsq(H, rhs, rcond=None)[0]
    # grad f_i . dx
    dz = dx[1:].reshape(L, -1)
    df = np.concatenate([dx[0] - lin.R @ dx[1:], 2.0 * np.sum(Z * dz, axis=1)])
    dlam = (r_cent - lam * df) / f
    return dx, dlam


def solve_subproblem(channels, W, P, tol=1e-8, lam0=None):
    """
    Maximize the worst-case minorant sum around the codebook `W`.

    Parameters
    ----------
    channels : array_like, shape (K, M)
        Neighborhood channels; only their directions matter.
    W : array_like, shape (L, M)
        Expansion point; must satisfy ``||w_l||^2 <= P``.
    P : float
        Per-beam power budget.
    tol : float
        Required certified duality gap.
    lam0 : array_like, optional
        Simplex weights to try as an immediate certificate for ``f = W``.

    Returns
    -------
    SubproblemResult

    Raises
    ------
    SolverError
        If the gap cannot be brought below `tol`.
    """
    U = normalized_channels(channels)
    W = np.atleast_2d(np.asarray(W, dtype=np.complex128))
    lin = _Linearization(U, W, P)
    K = lin.K

    best_F = W.copy()
    best_t = lin.primal_value(W)
    best_lam = np.full(K, 1.0 / K) if lam0 is None else np.asarray(lam0, dtype=float)
    best_D = lin.dual_bound(best_lam)

    def consider(F, lam):
        nonlocal best_F, best_t, best_lam, best_D
        for cand in (F, lin.best_response(lam, F)):
            tv = lin.primal_value(cand)
            if tv > best_t:
                best_t, best_F = tv, cand
        D = lin.dual_bound(lam)
        if D < best_D:
            best_D, best_lam = D, lam

    consider(W, best_lam)
    if best_D - best_t <= tol:
        return SubproblemResult(best_F, best_t, best_D, best_lam, 0, 0)

    # strictly interior start: shrink the beams, drop t below every slack
    z = lin.pack(W * INTERIOR_SHRINK)
    t = float(np.min(lin.R @ z - lin.c)) - max(1.0, abs(best_t))
    f = _constraints(lin, t, z)
    lam = 1.0 / -f
    lam[:K] /= np.sum(lam[:K])
    m = len(f)
    steps = 0
    for steps in range(1, MAX_STEPS + 1):
        eta = -f @ lam
        tau = CENTERING * m / eta
        r_dual, r_cent = _residuals(lin, t, z, lam, f, tau)
        dx, dlam = _pd_direction(lin, z, lam, f, r_dual, r_cent)
        neg = dlam < 0
        s = min(1.0, float(np.min(-lam[neg] / dlam[neg]))) if np.any(neg) else 1.0
        s *= 0.99
        r_norm = np.sqrt(r_dual @ r_dual + r_cent @ r_cent)
        while s > 1e-14:
            t_new, z_new, lam_new = t + s * dx[0], z + s * dx[1:], lam + s * dlam
            f_new = _constraints(lin, t_new, z_new)
            if np.all(f_new < 0):
                rd, rc = _residuals(lin, t_new, z_new, lam_new, f_new, tau)
                if np.sqrt(rd @ rd + rc @ rc) <= (1.0 - 0.01 * s) * r_norm:
                    break
            s *= 0.5
        if s <= 1e-14:
            break
        t, z, lam, f = t_new, z_new, lam_new, f_new
        lam_lin = np.clip(lam[:K], 0.0, None)
        if np.sum(lam_lin) > 0:
            consider(lin.unpack(z), lam_lin / np.sum(lam_lin))
        if best_D - best_t <= tol:
            return SubproblemResult(best_F, best_t, best_D, best_lam, steps, steps)
    raise SolverError(
        f"subproblem gap {best_D - best_t:.3e} above tolerance {tol:.1e} "
        f"after {steps} interior-point steps", residual=best_D - best_t, gap=best_D - best_t)
