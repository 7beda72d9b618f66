"""MRT and eigen-beamforming reference schemes."""

import math

import numpy as np

from ..neighborhood import closeness_all
from ..numerics import as_cvector, dominant_eigenvectors, outer_sum
from .gains import Codebook, normalized_channels


def mrt_beamformer(g, P):
    """``sqrt(P) g / ||g||``."""
    g = as_cvector(g, 'g')
    n = np.linalg.norm(g)
    if n == 0:
        raise ValueError("MRT is undefined for a zero channel")
    return math.sqrt(P) * g / n


def mrt_codebook(g, P, L):
    """The MRT beam repeated over all `L` channel uses."""
    return Codebook(np.tile(mrt_beamformer(g, P), (L, 1)), P)


def mrt_baseline_gain(g, P, L, channels):
    """Project the outdated CSI onto every neighbor, keep the worst, scale by L."""
    return float(L * P * np.min(closeness_all(g, np.atleast_2d(channels))))


def ebf_codebook(channels, P, L):
    """`L` dominant eigenvectors of the neighborhood covariance, scaled to power P."""
    H = np.atleast_2d(np.asarray(channels, dtype=np.complex128))
    R = outer_sum(H, 1.0 / H.shape[0])
    _, U = dominant_eigenvectors(R, L)
    return Codebook(math.sqrt(P) * U, P)


def best_mrt_direction(channels):
    """
    Neighbor whose worst-case closeness to the others is largest.

    Used as the MRT start when no outdated CSI is supplied.
    """
    U = normalized_channels(channels)
    C = np.abs(U.conj() @ U.T) ** 2
    return U[int(np.argmax(C.min(axis=1)))]
