"""Exhaustive grid search for two-antenna, single-beam instances."""

import math

import numpy as np

from ..errors import DimensionError
from .gains import normalized_channels


def brute_force_oracle(channels, P, L=1, resolution=512, return_argmax=False):
    """
    Grid maximum of the worst-case gain over ``f = sqrt(P) (cos a, sin a e^{jb})``.

    ``a`` takes ``resolution + 1`` values spanning [0, pi/2] (both endpoints,
    so pi/4 is on the grid for even `resolution`) and ``b`` takes
    `resolution` values in [0, 2 pi); the common phase of ``f`` does not
    affect any gain.
    """
    U = normalized_channels(channels)
    if U.shape[1] != 2 or L != 1:
        raise DimensionError("the oracle only supports M = 2 and L = 1")
    a = np.linspace(0.0, math.pi / 2, resolution + 1)
    b = np.arange(resolution) * (2 * math.pi / resolution)
    f0 = np.cos(a)[:, None] * np.ones_like(b)[None, :]
    f1 = np.sin(a)[:, None] * np.exp(1j * b)[None, :]
    worst = np.full(f0.shape, np.inf)
    for u in U:
        g = np.abs(np.conj(u[0]) * f0 + np.conj(u[1]) * f1) ** 2
        np.minimum(worst, g, out=worst)
    i, j = np.unravel_index(np.argmax(worst), worst.shape)
    value = float(P * worst[i, j])
    if return_argmax:
        return value, (float(a[i]), float(b[j]))
    return value
