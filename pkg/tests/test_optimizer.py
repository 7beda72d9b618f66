import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csibeam.errors import ConfigurationError, DimensionError
from csibeam.neighborhood import closeness
from csibeam.optimizer import (Codebook, SolverConfig, brute_force_oracle, ebf_codebook,
                               min_sum_gain, mrt_baseline_gain, mrt_beamformer, mrt_codebook,
                               sca_design, solve_subproblem, sum_gains, taylor_minorant, to_db)
from csibeam.optimizer.baselines import best_mrt_direction

from conftest import crandn

E1, E2 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)


def collinear(u, v, tol=1e-6):
    return closeness(u, v) >= 1 - tol


# -- codebook and gains ------------------------------------------------------

def test_codebook_validation():
    with pytest.raises(ValueError):
        Codebook(np.array([[2.0, 0]]), 1.0)
    with pytest.raises(ConfigurationError):
        Codebook(np.array([[0.1, 0]]), 0.0)
    cb = Codebook(np.array([1.0, 0]), 1.0)
    assert (cb.L, cb.M) == (1, 2)
    with pytest.raises(ValueError):
        cb.vectors[0, 0] = 0


def test_codebook_dict_roundtrip():
    cb = Codebook(np.array([[0.5 + 0.5j, 0.1], [0, -0.7j]]), 1.0)
    back = Codebook.from_dict(cb.to_dict())
    assert np.array_equal(back.vectors, cb.vectors) and back.power == cb.power


def test_gain_examples():
    h = np.array([1 + 1j, 2 - 1j, 0.5])
    assert min_sum_gain(Codebook(mrt_beamformer(h, 2.0), 2.0), [h]) == pytest.approx(2.0)
    assert min_sum_gain(Codebook(np.array([0, 0, 1.0]), 1.0), [[1, 0, 0], [0, 1, 0]]) == 0.0
    f = np.array([1, 1]) / math.sqrt(2)
    assert min_sum_gain(Codebook(f, 1.0), [E1, E2]) == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        sum_gains(Codebook(f, 1.0), [[1, 0, 0]])


def test_to_db():
    assert to_db(1.0) == 0.0
    assert to_db(10.0) == pytest.approx(10.0)
    assert to_db(0.0) == -math.inf


# -- baselines ---------------------------------------------------------------

def test_mrt_examples():
    assert np.allclose(mrt_beamformer([1, 0], 1.0), [1, 0])
    assert np.allclose(mrt_beamformer([1, 1j], 4.0), [math.sqrt(2), math.sqrt(2) * 1j])
    g = crandn(np.random.default_rng(0), 6)
    assert np.linalg.norm(mrt_beamformer(g, 3.0)) ** 2 == pytest.approx(3.0)
    assert mrt_codebook(g, 1.0, 3).L == 3


def test_mrt_baseline_gain_examples():
    g = np.array([1, 2j])
    assert mrt_baseline_gain(g, 1.5, 3, [g]) == pytest.approx(4.5)
    assert mrt_baseline_gain(E1, 1.0, 1, [E1, E2]) == 0.0
    assert mrt_baseline_gain(E1, 1.0, 2, [np.array([1, 1]) / math.sqrt(2)]) == pytest.approx(1.0)


def test_ebf_examples():
    h = crandn(np.random.default_rng(1), 5)
    cb = ebf_codebook([h], 2.0, 1)
    assert collinear(cb.vectors[0], h, 1e-9)
    assert min_sum_gain(cb, [h]) == pytest.approx(2.0)
    cb = ebf_codebook([E1, E1, E2], 1.0, 1)
    assert collinear(cb.vectors[0], E1, 1e-9)
    H = crandn(np.random.default_rng(2), 8, 5)
    cb = ebf_codebook(H, 1.0, 2)
    assert abs(np.vdot(cb.vectors[0], cb.vectors[1])) <= 1e-8
    assert np.allclose(np.linalg.norm(cb.vectors, axis=1) ** 2, 1.0)


def test_best_mrt_direction():
    H = np.array([E1, E1 + 0.1 * E2, E2 + 0.2 * E1])
    d = best_mrt_direction(H)
    assert collinear(d, H[1], 1e-12)


# -- minorant ----------------------------------------------------------------

def test_minorant_examples():
    rng = np.random.default_rng(0)
    h, w, f = crandn(rng, 4), crandn(rng, 4), crandn(rng, 4)
    assert taylor_minorant(h, w, w) == pytest.approx(abs(np.vdot(h, w)) ** 2, abs=1e-12)
    w_perp = np.array([-np.conj(h[1]), np.conj(h[0]), 0, 0])
    assert abs(np.vdot(h, w_perp)) < 1e-12
    assert abs(taylor_minorant(h, f, w_perp)) < 1e-12


@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_minorant_lower_bound(M, seed):
    rng = np.random.default_rng(seed)
    h, f, w = crandn(rng, M), crandn(rng, M), crandn(rng, M)
    assert taylor_minorant(h, f, w) <= abs(np.vdot(h, f)) ** 2 + 1e-10


# -- convex subproblem -------------------------------------------------------

def test_subproblem_at_optimum():
    h = np.array([1 + 2j, -0.5, 1j])
    w = mrt_beamformer(h, 1.0)[None, :]
    res = solve_subproblem([h], w, 1.0)
    assert res.t == pytest.approx(1.0, abs=1e-8)
    assert collinear(res.beams[0], h)


def test_subproblem_symmetric_instance():
    w = (np.array([1, 1]) / math.sqrt(2))[None, :]
    res = solve_subproblem([E1, E2], w, 1.0)
    assert res.t == pytest.approx(0.5, abs=1e-8)
    assert collinear(res.beams[0], w[0])


def _cvxpy_subproblem(H, W, P):
    cp = pytest.importorskip('cvxpy')
    U = H / np.linalg.norm(H, axis=1, keepdims=True)
    K, M = U.shape
    L = W.shape[0]
    F = cp.Variable((L, M), complex=True)
    t = cp.Variable()
    cons = [cp.sum_squares(F[l]) <= P for l in range(L)]
    for k in range(K):
        u = U[k]
        expr = 0
        for l in range(L):
            beta = np.vdot(u, W[l])
            expr += 2 * cp.real(np.conj(beta) * (u.conj() @ F[l])) - abs(beta) ** 2
        cons.append(expr >= t)
    prob = cp.Problem(cp.Maximize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize('seed', range(8))
def test_subproblem_matches_generic_conic_solver(seed):
    rng = np.random.default_rng(seed)
    M, K, L = int(rng.integers(2, 9)), int(rng.integers(1, 15)), int(rng.integers(1, 4))
    H = crandn(rng, K, M)
    W = crandn(rng, L, M)
    W *= 0.9 / np.linalg.norm(W, axis=1, keepdims=True)
    res = solve_subproblem(H, W, 1.0, tol=1e-9)
    ref = _cvxpy_subproblem(H, W, 1.0)
    assert res.t == pytest.approx(ref, abs=1e-6)
    assert res.gap <= 1e-9
    assert res.t <= L * 1.0 + 1e-12
    assert np.all(np.linalg.norm(res.beams, axis=1) ** 2 <= 1.0 + 1e-9)


@given(st.integers(2, 8), st.integers(1, 20), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_subproblem_certificate(M, K, L, seed):
    rng = np.random.default_rng(seed)
    H = crandn(rng, K, M)
    W = crandn(rng, L, M)
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    res = solve_subproblem(H, W, 1.0)
    assert -1e-12 <= res.gap <= 1e-8
    assert np.all(res.weights >= 0) and res.weights.sum() == pytest.approx(1.0)
    assert res.t <= L + 1e-12
    # never below the expansion point (f = W is feasible)
    U = H / np.linalg.norm(H, axis=1, keepdims=True)
    t_w = np.min(np.sum(np.abs(U.conj() @ W.T) ** 2, axis=1))
    assert res.t >= t_w - 1e-12


# -- SCA ---------------------------------------------------------------------

def test_solver_config_validation():
    with pytest.raises(ConfigurationError):
        SolverConfig(init='magic')
    with pytest.raises(ConfigurationError):
        SolverConfig(max_iter=0)
    with pytest.raises(ConfigurationError):
        SolverConfig(init='given')


@pytest.mark.parametrize('L', [1, 2, 3])
def test_sca_single_channel_is_mrt(L):
    h = crandn(np.random.default_rng(L), 7)
    cb, rep = sca_design([h], 2.0, L)
    assert min_sum_gain(cb, [h]) == pytest.approx(2.0 * L, rel=1e-6)
    assert all(closeness(f, h) >= 0.999 for f in cb.vectors)
    assert rep.converged


@given(st.integers(2, 10), st.integers(1, 25), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_sca_ascent_and_dominance(M, K, L, seed):
    rng = np.random.default_rng(seed)
    H = crandn(rng, K, M)
    g = H[0] + 0.3 * crandn(rng, M)
    cb, rep = sca_design(H, 1.0, L, SolverConfig(), query=g)
    tr = np.array(rep.objective)
    assert np.all(np.diff(tr) >= -1e-8)
    floor = mrt_baseline_gain(g, 1.0, L, H)
    if L <= M:
        floor = max(floor, min_sum_gain(ebf_codebook(H, 1.0, L), H))
    assert min_sum_gain(cb, H) >= floor - 1e-8
    assert np.all(np.linalg.norm(cb.vectors, axis=1) ** 2 <= 1.0 + 1e-9)


def test_sca_random_init_deterministic():
    H = crandn(np.random.default_rng(5), 6, 4)
    cfg = SolverConfig(init='random', seed=3, restarts=2)
    a, _ = sca_design(H, 1.0, 2, cfg)
    b, _ = sca_design(H, 1.0, 2, cfg)
    assert np.array_equal(a.vectors, b.vectors)


def test_sca_given_init():
    H = crandn(np.random.default_rng(6), 5, 3)
    start = ebf_codebook(H, 1.0, 1)
    cb, rep = sca_design(H, 1.0, 1, SolverConfig(init='given', initial=start))
    assert rep.objective[0] == pytest.approx(min_sum_gain(start, H))
    assert min_sum_gain(cb, H) >= rep.objective[0] - 1e-12


def test_sca_report_dict():
    H = crandn(np.random.default_rng(7), 4, 3)
    _, rep = sca_design(H, 1.0, 1)
    d = rep.to_dict()
    assert d['iterations'] == rep.n_iter == len(d['objective']) - 1


# -- oracle ------------------------------------------------------------------

def test_oracle_examples():
    v, (a, _) = brute_force_oracle([E1], 1.0, return_argmax=True)
    assert v == pytest.approx(1.0) and a == 0.0
    v, (a, _) = brute_force_oracle([E1, E2], 1.0, return_argmax=True)
    assert v == pytest.approx(0.5, abs=1e-5)
    assert a == pytest.approx(math.pi / 4, abs=math.pi / 512)
    h = np.array([0.3 + 1j, -2.0])
    assert brute_force_oracle([h], 1.0) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(DimensionError):
        brute_force_oracle([[1, 0, 0]], 1.0)
    with pytest.raises(DimensionError):
        brute_force_oracle([E1], 1.0, L=2)


@pytest.mark.parametrize('seed', range(5))
def test_sca_near_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    H = crandn(rng, 3, 2)
    cb, _ = sca_design(H, 1.0, 1, SolverConfig(restarts=8, seed=seed))
    assert min_sum_gain(cb, H) >= 0.98 * brute_force_oracle(H, 1.0)
