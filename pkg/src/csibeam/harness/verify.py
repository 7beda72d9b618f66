"""
Built-in property and oracle checks behind ``csibeam verify``.

Each check returns a ``CheckResult``; checks that exercise a replaceable
primitive take it as an argument so a deliberately broken version can be
injected (mutation testing).
"""

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..channel import ImageSource, smc_response
from ..database import CsiDatabase
from ..neighborhood import closeness, expand_local
from ..optimizer import (SolverConfig, brute_force_oracle, ebf_codebook, min_sum_gain,
                         sca_design, taylor_minorant)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.detail = {k: v.item() if isinstance(v, np.generic) else v
                       for k, v in self.detail.items()}

    def to_dict(self):
        return asdict(self)


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_minorant(n=10000, seed=0, minorant=taylor_minorant):
    """Minorant never exceeds the quadratic and touches it at f = w."""
    rng = np.random.default_rng(seed)
    worst_excess = -np.inf
    worst_tangent = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 17))
        h, f, w = _crandn(rng, M), _crandn(rng, M), _crandn(rng, M)
        worst_excess = max(worst_excess, minorant(h, f, w) - abs(np.vdot(h, f)) ** 2)
        worst_tangent = max(worst_tangent, abs(minorant(h, w, w) - abs(np.vdot(h, w)) ** 2))
    ok = worst_excess <= 1e-10 and worst_tangent <= 1e-12
    return CheckResult('minorant_soundness', ok,
                       {'max_excess': worst_excess, 'max_tangent_error': worst_tangent, 'n': n})


@_timed
def check_ascent(n=50, seed=1, inner_tol=1e-8):
    """Objective traces of random SCA runs never drop by more than inner_tol."""
    rng = np.random.default_rng(seed)
    worst_drop = 0.0
    for _ in range(n):
        M, K, L = int(rng.integers(2, 17)), int(rng.integers(1, 31)), int(rng.integers(1, 4))
        H = _crandn(rng, K, M)
        cfg = SolverConfig(inner_tol=inner_tol, init='random', seed=int(rng.integers(1 << 31)))
        _, rep = sca_design(H, 1.0, L, cfg)
        tr = np.array(rep.objective)
        if len(tr) > 1:
            worst_drop = max(worst_drop, float(np.max(tr[:-1] - tr[1:])))
    return CheckResult('sca_ascent', worst_drop <= inner_tol, {'max_drop': worst_drop, 'n': n})


@_timed
def check_exact_csi(seed=2, trials=10):
    """A single-channel neighborhood drives every beam to MRT."""
    rng = np.random.default_rng(seed)
    worst_rel, worst_close = 0.0, 1.0
    ebf_ok = True
    for _ in range(trials):
        M, L, P = int(rng.integers(2, 17)), int(rng.integers(1, 4)), float(rng.uniform(0.5, 2))
        h = _crandn(rng, M)
        cb, _ = sca_design(h[None, :], P, L, SolverConfig())
        worst_rel = max(worst_rel, abs(min_sum_gain(cb, h[None, :]) - L * P) / (L * P))
        worst_close = min(worst_close, min(closeness(f, h) for f in cb.vectors))
        ebf = ebf_codebook(h[None, :], P, L)
        ebf_ok &= closeness(ebf.vectors[0], h) >= 0.999
    ok = worst_rel <= 1e-6 and worst_close >= 0.999 and ebf_ok
    return CheckResult('exact_csi_mrt', ok,
                       {'max_rel_error': worst_rel, 'min_closeness': worst_close, 'ebf_aligned': bool(ebf_ok)})


@_timed
def check_oracle(n=20, seed=3, restarts=8, resolution=512):
    """SCA with restarts reaches at least 98% of the grid optimum on M = 2."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for i in range(n):
        K = int(rng.integers(2, 5))
        H = _crandn(rng, K, 2)
        cb, _ = sca_design(H, 1.0, 1, SolverConfig(restarts=restarts, seed=i))
        worst = min(worst, min_sum_gain(cb, H) / brute_force_oracle(H, 1.0, resolution=resolution))
    return CheckResult('oracle_equivalence', worst >= 0.98, {'min_ratio': worst, 'n': n})


@_timed
def check_monotonicity(n=20, seed=4, resolution=256):
    """Adding channels never raises the max-min gain (grid oracle)."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(n):
        K = int(rng.integers(1, 4))
        S = _crandn(rng, K, 2)
        S2 = np.vstack([S, _crandn(rng, int(rng.integers(1, 4)), 2)])
        worst = max(worst, brute_force_oracle(S2, 1.0, resolution=resolution)
                    - brute_force_oracle(S, 1.0, resolution=resolution))
    return CheckResult('neighborhood_monotonicity', worst <= 1e-9, {'max_increase': worst})


@_timed
def check_neighborhood_size(seed=5, trials=200):
    """Merged windows never exceed (2k+1)T and reach it iff disjoint and interior."""
    rng = np.random.default_rng(seed)
    db = CsiDatabase(np.ones((60, 1)))
    bad = 0
    for _ in range(trials):
        k, T = int(rng.integers(0, 5)), int(rng.integers(1, 5))
        init = sorted(set(int(x) for x in rng.integers(0, 60, T)))
        K = expand_local(db, init, k).K
        disjoint = all(b - a > 2 * k for a, b in zip(init, init[1:]))
        interior = all(k <= m <= 59 - k for m in init)
        full = (2 * k + 1) * len(init)
        if K > full or (K == full) != (disjoint and interior):
            bad += 1
    return CheckResult('neighborhood_size_bound', bad == 0, {'violations': bad})


@_timed
def check_smc_magnitude(n=1000, seed=6):
    """Specular entries have magnitude lambda |g| / (4 pi d)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        lam = float(rng.uniform(0.05, 0.5))
        ant = rng.uniform(-5, 5, (4, 3))
        ue = rng.uniform(-5, 5, 3)
        g = complex(rng.uniform(0.1, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        h = smc_response(ImageSource(1, ant, g), ue, lam)
        d = np.linalg.norm(ant - ue, axis=1)
        worst = max(worst, float(np.max(np.abs(np.abs(h) - lam * abs(g) / (4 * np.pi * d)))))
    return CheckResult('smc_magnitude', worst <= 1e-12, {'max_abs_error': worst})


CHECKS = (check_minorant, check_ascent, check_exact_csi, check_oracle,
          check_monotonicity, check_neighborhood_size, check_smc_magnitude)


def run_all(checks=CHECKS):
    return [c() for c in checks]
