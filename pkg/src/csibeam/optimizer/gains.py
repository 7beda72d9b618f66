"""Codebook container and the max-min-sum objective."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DimensionError

FEASIBILITY_ATOL = 1e-9


@dataclass(frozen=True)
class Codebook:
    """`L` beamforming vectors of dimension `M`, one per row of `vectors`."""
    vectors: np.ndarray
    power: float

    def __post_init__(self):
        F = np.array(self.vectors, dtype=np.complex128)
        if F.ndim == 1:
            F = F[None, :]
        if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
            raise DimensionError(f"codebook must be an (L, M) array, got {F.shape}")
        if self.power <= 0:
            raise ConfigurationError("power budget must be positive")
        norms = np.einsum('ij,ij->i', F.conj(), F).real
        if np.any(norms > self.power + FEASIBILITY_ATOL):
            raise ValueError(f"codebook violates the power budget: max ||f||^2 = {norms.max()!r}")
        F.flags.writeable = False
        object.__setattr__(self, 'vectors', F)

    @property
    def L(self):
        return self.vectors.shape[0]

    @property
    def M(self):
        return self.vectors.shape[1]

    def to_dict(self):
        return {'M': self.M, 'L': self.L, 'P': self.power,
                're': self.vectors.real.tolist(), 'im': self.vectors.imag.tolist()}

    @classmethod
    def from_dict(cls, d):
        F = np.asarray(d['re'], dtype=float) + 1j * np.asarray(d['im'], dtype=float)
        return cls(F, float(d['P']))


def _channel_matrix(channels, M=None):
    H = np.atleast_2d(np.asarray(channels, dtype=np.complex128))
    if H.shape[0] < 1:
        raise ConfigurationError("need at least one channel")
    if M is not None and H.shape[1] != M:
        raise DimensionError(f"channels have dimension {H.shape[1]}, codebook has {M}")
    return H


def normalized_channels(channels):
    """Rows scaled to unit norm; the objective only sees channel directions."""
    H = _channel_matrix(channels)
    n = np.linalg.norm(H, axis=1)
    if np.any(n == 0):
        raise ValueError("zero-norm channel in neighborhood")
    return H / n[:, None]


def sum_gains(codebook, channels):
    """Per-channel sum gains ``sum_l |h_i^H f_l|^2 / ||h_i||^2``, shape (K,)."""
    F = codebook.vectors if isinstance(codebook, Codebook) else np.atleast_2d(codebook)
    U = normalized_channels(_channel_matrix(channels, F.shape[1]))
    return np.sum(np.abs(U.conj() @ F.T) ** 2, axis=1)


def min_sum_gain(codebook, channels):
    """Worst-case (over channels) summed beamforming gain, linear scale."""
    return float(np.min(sum_gains(codebook, channels)))


def to_db(gain):
    return 10.0 * math.log10(gain) if gain > 0 else -math.inf


def taylor_minorant(h, f, w):
    """
    First-order lower bound of ``|h^H f|^2`` around `w`:
    ``2 Re(f^H h h^H w) - |h^H w|^2``. Tight at ``f = w``.
    """
    h = np.asarray(h, dtype=np.complex128)
    f = np.asarray(f, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if not h.shape == f.shape == w.shape:
        raise DimensionError("h, f and w must share one dimension")
    hw = np.vdot(h, w)
    hf = np.vdot(h, f)
    return float(2.0 * (np.conj(hf) * hw).real - abs(hw) ** 2)
