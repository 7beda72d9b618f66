"""Successive convex approximation for max-min-sum codebook design."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, SolverError
from .baselines import best_mrt_direction, ebf_codebook, mrt_codebook
from .gains import Codebook, min_sum_gain, normalized_channels
from .subproblem import solve_subproblem

log = logging.getLogger(__name__)

INIT_STRATEGIES = ('mrt', 'ebf', 'best_baseline', 'random', 'given')


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 200
    outer_tol: float = 1e-6
    inner_tol: float = 1e-8
    init: str = 'best_baseline'
    seed: int = 0
    restarts: int = 0
    initial: Codebook = None

    def __post_init__(self):
        if self.init not in INIT_STRATEGIES:
            raise ConfigurationError(f"unknown init strategy {self.init!r}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.outer_tol <= 0 or self.inner_tol <= 0:
            raise ConfigurationError("tolerances must be positive")
        if self.restarts < 0:
            raise ConfigurationError("restarts must be >= 0")
        if self.init == 'given' and self.initial is None:
            raise ConfigurationError("init='given' needs an initial codebook")

    def to_dict(self):
        return {'max_iter': self.max_iter, 'outer_tol': self.outer_tol,
                'inner_tol': self.inner_tol, 'init': self.init, 'seed': self.seed,
                'restarts': self.restarts}


@dataclass
class IterationInfo:
    surrogate: float
    gap: float
    newton_steps: int


@dataclass
class SolverReport:
    """
    `objective` holds the true max-min-sum value of every iterate, starting
    with the initial point; `iterations` holds subproblem diagnostics.
    """
    objective: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    converged: bool = False
    init: str = ''
    restart_values: list = field(default_factory=list)

    @property
    def n_iter(self):
        return len(self.iterations)

    def to_dict(self):
        return {
            'objective': self.objective,
            'surrogate': [it.surrogate for it in self.iterations],
            'gap': [it.gap for it in self.iterations],
            'newton_steps': [it.newton_steps for it in self.iterations],
            'converged': self.converged,
            'iterations': self.n_iter,
            'init': self.init,
            'restart_values': self.restart_values,
        }


def random_codebook(M, L, P, rng):
    F = rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M))
    F *= math.sqrt(P) / np.linalg.norm(F, axis=1)[:, None]
    return Codebook(F, P)


def initial_codebook(channels, P, L, config, query=None, rng=None):
    """Starting point for the given strategy, plus the name actually used."""
    H = np.atleast_2d(channels)
    if config.init == 'given':
        if config.initial.L != L or config.initial.M != H.shape[1]:
            raise ConfigurationError("initial codebook shape does not match the problem")
        return config.initial, 'given'
    if config.init == 'random':
        rng = np.random.default_rng(config.seed) if rng is None else rng
        return random_codebook(H.shape[1], L, P, rng), 'random'
    g = best_mrt_direction(H) if query is None else query
    if config.init == 'mrt':
        return mrt_codebook(g, P, L), 'mrt'
    if config.init == 'ebf':
        return ebf_codebook(H, P, L), 'ebf'
    mrt = mrt_codebook(g, P, L)
    if L > H.shape[1]:
        # eigen-beamforming needs L <= M orthogonal directions
        return mrt, 'mrt'
    ebf = ebf_codebook(H, P, L)
    if min_sum_gain(ebf, H) > min_sum_gain(mrt, H):
        return ebf, 'ebf'
    return mrt, 'mrt'


def _iterate(U, W, P, config, report):
    best_W, best_val = W, report.objective[-1]
    lam = None
    for _ in range(config.max_iter):
        try:
            res = solve_subproblem(U, W, P, config.inner_tol, lam0=lam)
        except SolverError as exc:
            exc.report = report
            raise
        W, lam = res.beams, res.weights
        val = min_sum_gain(W, U)
        prev = report.objective[-1]
        report.objective.append(val)
        report.iterations.append(IterationInfo(res.t, res.gap, res.newton_steps))
        if val > best_val:
            best_W, best_val = W, val
        if abs(val - prev) <= config.outer_tol * max(1.0, abs(val)):
            report.converged = True
            break
    return best_W, best_val


def sca_design(channels, P, L, config=None, query=None):
    """
    Design an `L`-beam codebook maximizing the worst-case summed gain.

    Each step maximizes the tangent minorant around the current codebook,
    so the true objective never decreases by more than the certified
    subproblem gap. The best iterate is returned, hence the result is never
    worse than the starting point.

    Parameters
    ----------
    channels : array_like, shape (K, M)
        Neighborhood channel vectors (any nonzero scaling).
    P : float
        Per-beam power budget.
    L : int
        Codebook size.
    config : SolverConfig, optional
    query : array_like, optional
        Outdated CSI used by the MRT start; without it the neighbor with the
        best worst-case closeness stands in.

    Returns
    -------
    codebook : Codebook
    report : SolverReport
        Trace of the run that produced `codebook`.
    """
    config = SolverConfig() if config is None else config
    H = np.atleast_2d(np.asarray(channels, dtype=np.complex128))
    if H.shape[0] < 1:
        raise ConfigurationError("empty neighborhood")
    if L < 1 or P <= 0:
        raise ConfigurationError("need L >= 1 and P > 0")
    U = normalized_channels(H)
    rng = np.random.default_rng(config.seed)

    starts = [initial_codebook(H, P, L, config, query, rng)]
    for _ in range(config.restarts):
        starts.append((random_codebook(H.shape[1], L, P, rng), 'random'))

    best = None
    restart_values = []
    for cb, name in starts:
        report = SolverReport(objective=[min_sum_gain(cb, U)], init=name)
        W, val = _iterate(U, cb.vectors, P, config, report)
        restart_values.append(val)
        log.debug("start %s: %.6g -> %.6g in %d iterations", name,
                  report.objective[0], val, report.n_iter)
        if best is None or val > best[1]:
            best = (W, val, report)
    W, _, report = best
    report.restart_values = restart_values
    return Codebook(W, P), report
