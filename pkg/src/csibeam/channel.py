"""
Indoor multipath channel simulator.

The channel from an M-antenna wall-mounted array to a single-antenna UE is the
sum of specular components (one per image source: the physical array plus its
first-order mirror images in the room walls) and a diffuse component from
single-bounce point scatterers placed on an ellipsoid surface.

All lengths are in meters. Randomness only enters through
``sample_scatterer_field`` and ``generate_trajectory``; given an
``Environment`` the map position -> channel vector is deterministic.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError

__all__ = ['SPEED_OF_LIGHT', 'wavelength_for', 'RoomGeometry', 'ArrayConfig',
           'ImageSource', 'ScattererField', 'Environment', 'TrajectorySpec',
           'build_image_sources', 'smc_response', 'sample_scatterer_field',
           'lognormal_params', 'dmc_response', 'channel_at',
           'generate_trajectory', 'nominal_position']

SPEED_OF_LIGHT = 299792458.0

_PLANE_ATOL = 1e-9


def wavelength_for(frequency_hz):
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True)
class RoomGeometry:
    """Axis-aligned box. `origin` is the corner with the smallest coordinates."""
    width_x: float
    depth_y: float
    height_z: float
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.width_x, self.depth_y, self.height_z) <= 0:
            raise ConfigurationError("room dimensions must be strictly positive")

    @property
    def lower(self):
        return np.asarray(self.origin, dtype=float)

    @property
    def upper(self):
        return self.lower + np.array([self.width_x, self.depth_y, self.height_z])

    def contains(self, p, atol=1e-9):
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lower - atol) and np.all(p <= self.upper + atol))

    def walls(self):
        """The six boundary planes as ``(axis, coordinate)`` pairs."""
        lo, hi = self.lower, self.upper
        return [(axis, bound[axis]) for axis in range(3) for bound in (lo, hi)]


@dataclass(frozen=True)
class ArrayConfig:
    """
    Uniform rectangular array lying in the wall plane through `center`.

    `normal_axis` names the coordinate axis orthogonal to the array plane
    (1 = the array lies in a plane y = const). The array spans `width` along
    the first remaining axis and `height` along the second.
    """
    center: tuple
    width: float
    height: float
    spacing: float
    wavelength: float
    normal_axis: int = 1

    def __post_init__(self):
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ConfigurationError("spacing and wavelength must be positive")
        if self.width < 0 or self.height < 0:
            raise ConfigurationError("array width/height must be nonnegative")
        if self.normal_axis not in (0, 1, 2):
            raise ConfigurationError("normal_axis must be 0, 1 or 2")

    @classmethod
    def half_wavelength(cls, center, n_cols, n_rows, wavelength, normal_axis=1):
        """An `n_cols` x `n_rows` URA with lambda/2 spacing."""
        spacing = wavelength / 2
        return cls(tuple(center), (n_cols - 1) * spacing, (n_rows - 1) * spacing,
                   spacing, wavelength, normal_axis)

    @property
    def shape(self):
        # the epsilon keeps exact multiples of the spacing from flooring down
        n_cols = int(math.floor(self.width / self.spacing + 1e-9)) + 1
        n_rows = int(math.floor(self.height / self.spacing + 1e-9)) + 1
        return n_cols, n_rows

    @property
    def M(self):
        n_cols, n_rows = self.shape
        return n_cols * n_rows

    @property
    def positions(self):
        """Antenna positions, shape ``(M, 3)``, column-major over the grid."""
        n_cols, n_rows = self.shape
        a1, a2 = [ax for ax in range(3) if ax != self.normal_axis]
        u = (np.arange(n_cols) - (n_cols - 1) / 2) * self.spacing
        v = (np.arange(n_rows) - (n_rows - 1) / 2) * self.spacing
        uu, vv = np.meshgrid(u, v, indexing='ij')
        pos = np.tile(np.asarray(self.center, dtype=float), (n_cols * n_rows, 1))
        pos[:, a1] += uu.ravel()
        pos[:, a2] += vv.ravel()
        return pos


@dataclass(frozen=True)
class ImageSource:
    index: int
    positions: np.ndarray
    gain: complex
    wall: tuple = None  # (axis, coordinate) of the mirroring wall; None for the array


@dataclass(frozen=True)
class ScattererField:
    positions: np.ndarray  # (N_sc, 3)
    rcs: np.ndarray        # (N_sc,), m^2
    phases: np.ndarray     # (N_sc,), radians
    expected_count: float = 0.0

    @property
    def count(self):
        return len(self.rcs)

    @property
    def coefficients(self):
        """Diagonal of the scattering matrix: ``sqrt(sigma_i) exp(j phi_i)``."""
        return np.sqrt(self.rcs) * np.exp(1j * self.phases)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros(0), np.zeros(0), 0.0)


def _array_wall(room, array):
    axis = array.normal_axis
    c = np.asarray(array.center, dtype=float)
    for wall_axis, coord in room.walls():
        if wall_axis == axis and abs(c[axis] - coord) <= _PLANE_ATOL:
            return wall_axis, coord
    raise ConfigurationError(
        f"array center {tuple(c)} does not lie on a wall orthogonal to axis {axis}")


def build_image_sources(room, array, reflection_gain_db=-3.0):
    """
    Physical array plus its first-order images in the five remaining walls.

    The wall holding the array is skipped: its image would coincide with the
    array itself.
    """
    own_wall = _array_wall(room, array)
    pos = array.positions
    sources = [ImageSource(1, pos, 1.0 + 0.0j, None)]
    g = 10.0 ** (reflection_gain_db / 20.0)
    for axis, coord in room.walls():
        if (axis, coord) == own_wall:
            continue
        mirrored = pos.copy()
        mirrored[:, axis] = 2.0 * coord - mirrored[:, axis]
        sources.append(ImageSource(len(sources) + 1, mirrored, complex(g), (axis, coord)))
    return sources


def _spherical(d, wavelength, scale):
    return scale / d * np.exp(-2j * np.pi * d / wavelength)


def _distances(points, target):
    d = np.linalg.norm(np.asarray(points, dtype=float) - np.asarray(target, dtype=float), axis=-1)
    if np.any(d <= 0):
        raise ConfigurationError("zero propagation distance (UE coincides with an emitter)")
    return d


def smc_response(source, ue_pos, wavelength):
    """Specular contribution of one image source, shape ``(M,)``."""
    d = _distances(source.positions, ue_pos)
    return source.gain * _spherical(d, wavelength, wavelength / (4 * np.pi))


def lognormal_params(mean, variance):
    """Underlying normal ``(mu, sigma)`` of a log-normal with given mean/variance."""
    v = math.log1p(variance / mean ** 2)
    return math.log(mean) - v / 2, math.sqrt(v)


def _uniform_on_ellipsoid(n, semi_axes, rng):
    # rejection on the area element of the sphere -> ellipsoid map
    a, b, c = semi_axes
    g_max = max(a * b, a * c, b * c)
    out = np.empty((0, 3))
    while len(out) < n:
        m = max(2 * (n - len(out)), 16)
        u = rng.standard_normal((m, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        g = np.sqrt((b * c * u[:, 0]) ** 2 + (a * c * u[:, 1]) ** 2 + (a * b * u[:, 2]) ** 2)
        keep = rng.uniform(0.0, g_max, m) < g
        out = np.vstack([out, u[keep] * np.array([a, b, c])])
    return out[:n]


def sample_scatterer_field(center, semi_axes, density, rcs_mean, rcs_var, rng):
    """
    Draw point scatterers on the surface of an axis-aligned ellipsoid.

    The count is Poisson with mean ``density * volume`` (volume of the
    ellipsoid); positions are uniform on its surface. Radar cross sections
    are log-normal with the given mean and variance (in m^2 and m^4), phases
    uniform on [0, 2 pi).
    """
    semi_axes = np.asarray(semi_axes, dtype=float)
    if np.any(semi_axes <= 0) or density <= 0:
        raise ConfigurationError("semi-axes and density must be positive")
    expected = density * 4.0 / 3.0 * np.pi * float(np.prod(semi_axes))
    n = int(rng.poisson(expected))
    pos = _uniform_on_ellipsoid(n, semi_axes, rng) + np.asarray(center, dtype=float)
    mu, sigma = lognormal_params(rcs_mean, rcs_var)
    rcs = rng.lognormal(mu, sigma, n)
    phases = rng.uniform(0.0, 2 * np.pi, n)
    return ScattererField(pos, rcs, phases, expected)


def _tx_matrix(source, field, wavelength):
    # [H_TX,s]_{l,m}: scatterer l, antenna m
    d = np.linalg.norm(field.positions[:, None, :] - source.positions[None, :, :], axis=-1)
    if np.any(d <= 0):
        raise ConfigurationError("scatterer coincides with an antenna")
    return source.gain * _spherical(d, wavelength, 1.0 / math.sqrt(4 * np.pi))


def _rx_vector(field, ue_pos, wavelength):
    d = _distances(field.positions, ue_pos)
    return _spherical(d, wavelength, wavelength / (4 * np.pi))


def dmc_response(source, field, ue_pos, wavelength):
    """Diffuse contribution ``H_TX^T Sigma h_RX`` of one image source."""
    M = len(source.positions)
    if field.count == 0:
        return np.zeros(M, dtype=np.complex128)
    H_tx = _tx_matrix(source, field, wavelength)
    h_rx = _rx_vector(field, ue_pos, wavelength)
    return H_tx.T @ (field.coefficients * h_rx)


@dataclass
class Environment:
    """
    Everything needed to evaluate the channel at a position.

    The diffuse part of all sources shares one scatterer field, so the
    transmit-side matrices are summed once at construction.
    """
    room: RoomGeometry
    array: ArrayConfig
    sources: list
    field: ScattererField
    wavelength: float
    _dmc_tx: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        M = self.array.M
        if self.field.count == 0:
            self._dmc_tx = np.zeros((M, 0), dtype=np.complex128)
        else:
            tx = sum(_tx_matrix(s, self.field, self.wavelength) for s in self.sources)
            self._dmc_tx = tx.T * self.field.coefficients[None, :]

    @property
    def M(self):
        return self.array.M

    def channel_at(self, ue_pos):
        h = np.zeros(self.M, dtype=np.complex128)
        for s in self.sources:
            h += smc_response(s, ue_pos, self.wavelength)
        if self.field.count:
            h += self._dmc_tx @ _rx_vector(self.field, ue_pos, self.wavelength)
        return h


def channel_at(ue_pos, env):
    """Channel vector at `ue_pos`: sum of SMC and DMC terms over all sources."""
    if not env.room.contains(ue_pos):
        raise ConfigurationError(f"UE position {tuple(ue_pos)} lies outside the room")
    return env.channel_at(ue_pos)


@dataclass(frozen=True)
class TrajectorySpec:
    """
    Nominal UE path on a horizontal plane at height `z`.

    ``circular``: circle of `radius` around `center` (x, y).
    ``zigzag``: triangle wave across ``x_range`` with `legs` legs advancing
    along ``y_range``.
    """
    kind: str = 'circular'
    n_points: int = 1000
    noise_std: float = 0.05
    z: float = 0.0
    center: tuple = (5.0, 4.5)
    radius: float = 2.0
    x_range: tuple = (3.0, 7.0)
    y_range: tuple = (1.5, 7.5)
    legs: int = 6

    def __post_init__(self):
        if self.kind not in ('circular', 'zigzag'):
            raise ConfigurationError(f"unknown trajectory kind {self.kind!r}")
        if self.n_points < 1:
            raise ConfigurationError("trajectory needs at least one point")
        if self.noise_std < 0:
            raise ConfigurationError("noise_std must be nonnegative")
        if self.kind == 'circular' and self.radius < 0:
            raise ConfigurationError("radius must be nonnegative")
        if self.kind == 'zigzag' and self.legs < 1:
            raise ConfigurationError("zigzag needs at least one leg")

    def _zigzag_vertices(self):
        x0, x1 = self.x_range
        y = np.linspace(self.y_range[0], self.y_range[1], self.legs + 1)
        x = np.where(np.arange(self.legs + 1) % 2 == 0, x0, x1)
        return np.column_stack([x, y])

    def extent(self):
        """Bounding box ``(lo, hi)`` of the nominal path in (x, y)."""
        if self.kind == 'circular':
            c = np.asarray(self.center, dtype=float)
            return c - self.radius, c + self.radius
        v = self._zigzag_vertices()
        return v.min(axis=0), v.max(axis=0)


def nominal_position(spec, u):
    """Noise-free position at fraction(s) `u` in [0, 1) of the path."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if spec.kind == 'circular':
        ang = 2 * np.pi * u
        xy = np.asarray(spec.center, dtype=float) + spec.radius * np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        v = spec._zigzag_vertices()
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        target = u * s[-1]
        xy = np.column_stack([np.interp(target, s, v[:, 0]), np.interp(target, s, v[:, 1])])
    return np.column_stack([xy, np.full(len(u), spec.z)])


def _check_inside(spec, room):
    lo, hi = spec.extent()
    rlo, rhi = room.lower, room.upper
    if np.any(lo < rlo[:2]) or np.any(hi > rhi[:2]) or not rlo[2] <= spec.z <= rhi[2]:
        raise ConfigurationError("trajectory extends beyond the room")


def perturb(points, spec, room, rng):
    """Add horizontal Gaussian noise and clamp into the room."""
    pts = np.array(points, dtype=float)
    if spec.noise_std > 0:
        pts[:, :2] += rng.normal(0.0, spec.noise_std, (len(pts), 2))
    return np.clip(pts, room.lower, room.upper)


def generate_trajectory(spec, room, rng):
    """
    `spec.n_points` noisy positions in chronological order.

    Samples are equally spaced along the nominal path (by angle on the
    circle, by arc length on the zigzag); noise is added in the horizontal
    plane only since the UE moves on a fixed-height plane.
    """
    _check_inside(spec, room)
    n = spec.n_points
    if spec.kind == 'circular':
        u = np.arange(n) / n
    else:
        u = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    return perturb(nominal_position(spec, u), spec, room, rng)
