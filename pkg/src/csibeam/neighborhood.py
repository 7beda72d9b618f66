"""
Neighborhood channel list generation.

Stage one matches the outdated CSI against every database entry with the
closeness metric (squared normalized correlation). Stage two widens each
match to the ``k`` chronologically adjacent records on either side and
merges the windows.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, EmptyNeighborhoodError
from .numerics import as_cvector

__all__ = ['NeighborhoodParams', 'NeighborhoodList', 'closeness', 'closeness_all',
           'threshold_from_angle', 'match_initial', 'expand_local',
           'build_neighborhood']


@dataclass(frozen=True)
class NeighborhoodParams:
    """
    `mode` is ``'threshold'`` (keep entries with closeness > `gamma`) or
    ``'top_t'`` (keep the `T` closest entries).
    """
    mode: str = 'top_t'
    gamma: float = 0.5
    T: int = 5
    k: int = 5
    exclude_query: bool = False

    def __post_init__(self):
        if self.mode not in ('threshold', 'top_t'):
            raise ConfigurationError(f"unknown selection mode {self.mode!r}")
        if self.mode == 'threshold' and not 0 < self.gamma <= 1:
            raise ConfigurationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.mode == 'top_t' and self.T < 1:
            raise ConfigurationError(f"T must be >= 1, got {self.T}")
        if self.k < 0:
            raise ConfigurationError(f"k must be >= 0, got {self.k}")

    def to_dict(self):
        return {'mode': self.mode, 'gamma': self.gamma, 'T': self.T, 'k': self.k,
                'exclude_query': self.exclude_query}


@dataclass(frozen=True)
class NeighborhoodList:
    indices: np.ndarray
    channels: np.ndarray
    initial: tuple = field(default=())

    @property
    def K(self):
        return len(self.indices)

    def __len__(self):
        return self.K


def closeness(g, h):
    """``|g^H h|^2 / (||g||^2 ||h||^2)``, a number in [0, 1]."""
    g = as_cvector(g, 'g')
    h = as_cvector(h, 'h')
    if g.shape != h.shape:
        raise DimensionError(f"dimension mismatch: {g.shape} vs {h.shape}")
    ng = np.vdot(g, g).real
    nh = np.vdot(h, h).real
    if ng == 0 or nh == 0:
        raise ValueError("closeness is undefined for a zero vector")
    c = abs(np.vdot(g, h)) ** 2 / (ng * nh)
    return float(min(c, 1.0))


def closeness_all(g, H):
    """Closeness of `g` to every row of `H`."""
    g = as_cvector(g, 'g')
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[1] != g.size:
        raise DimensionError(f"expected rows of dimension {g.size}, got {H.shape}")
    ng = np.vdot(g, g).real
    nh = np.einsum('ij,ij->i', H.conj(), H).real
    if ng == 0 or np.any(nh == 0):
        raise ValueError("closeness is undefined for a zero vector")
    return np.minimum(np.abs(H.conj() @ g) ** 2 / (ng * nh), 1.0)


def threshold_from_angle(degrees, rule='squared'):
    """
    Map a maximum angular separation to a closeness threshold.

    ``'squared'`` gives ``cos^2(theta)``, consistent with closeness being a
    squared cosine. ``'cosine'`` gives ``cos(theta)`` (40 deg -> 0.766).
    """
    c = math.cos(math.radians(degrees))
    if rule == 'squared':
        return c * c
    if rule == 'cosine':
        return c
    raise ConfigurationError(f"unknown angle rule {rule!r}")


def match_initial(db, g, params, query_index=None):
    """
    Indices of the initial matches, in chronological order.

    Returns an empty list when nothing qualifies. With
    ``params.exclude_query`` the record `query_index` (default: the most
    recent one) is never matched.
    """
    H = db.channels
    c = closeness_all(g, H)
    candidates = np.arange(len(c))
    if params.exclude_query:
        q = len(c) - 1 if query_index is None else query_index % len(c)
        candidates = candidates[candidates != q]
    if params.mode == 'threshold':
        return [int(i) for i in candidates[c[candidates] > params.gamma]]
    # stable sort on -c: equal closeness keeps the smaller index first
    order = candidates[np.argsort(-c[candidates], kind='stable')]
    return sorted(int(i) for i in order[:params.T])


def expand_local(db, initial, k):
    """Union of the windows ``[m-k, m+k]`` clipped to the database."""
    n = len(db)
    if len(initial) == 0:
        raise EmptyNeighborhoodError("initial match list is empty")
    members = set()
    for m in initial:
        if not 0 <= m < n:
            raise IndexError(f"index {m} outside database of size {n}")
        members.update(range(max(0, m - k), min(n, m + k + 1)))
    idx = np.array(sorted(members), dtype=int)
    return NeighborhoodList(idx, db.channels[idx], tuple(int(m) for m in initial))


def build_neighborhood(db, g, params, query_index=None):
    """
    Match then expand. Raises ``EmptyNeighborhoodError`` when no entry
    passes the threshold; lower `gamma` or switch to ``top_t`` mode.
    """
    initial = match_initial(db, g, params, query_index)
    if not initial:
        raise EmptyNeighborhoodError(
            f"no database entry has closeness above gamma={params.gamma}; "
            "lower the threshold or use top_t selection")
    return expand_local(db, initial, params.k)
