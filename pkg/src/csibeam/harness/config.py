"""
Experiment configuration.

A configuration is one JSON document. Every field has a default matching
the indoor scenario (2.4 GHz, -3 dB wall reflections, 10 scatterers per
m^3 on an ellipsoid at (5, 8.75, 1) m, 0 dBW per beam), so ``{}`` is a
valid config. Metadata files written by the CLI embed the config under a
``"config"`` key and can be fed back verbatim.
"""

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..channel import (ArrayConfig, Environment, RoomGeometry, ScattererField, TrajectorySpec,
                       build_image_sources, sample_scatterer_field, wavelength_for)
from ..errors import ConfigurationError
from ..neighborhood import NeighborhoodParams, threshold_from_angle
from ..optimizer import SolverConfig

CM2 = 1e-4   # m^2 per cm^2
CM4 = 1e-8   # m^4 per cm^4

SWEEP_AXES = ('neighbors', 'threshold', 'codebook_size')

# per-purpose stream tags for np.random.default_rng([seed, tag, ...])
STREAM_ENVIRONMENT = 0
STREAM_TRAJECTORY = 1
STREAM_TRIAL = 2


@dataclass
class ArraySection:
    center: list = field(default_factory=lambda: [5.0, 0.0, 1.0])
    n_cols: int = 8
    n_rows: int = 4
    # full aperture: width/height in meters at lambda/2 spacing
    full_aperture: bool = False
    width: float = 2.5
    height: float = 1.5
    normal_axis: int = 1


@dataclass
class ScattererSection:
    center: list = field(default_factory=lambda: [5.0, 8.75, 1.0])
    semi_axes: list = field(default_factory=lambda: [1.5, 0.5, 1.5])
    density: float = 10.0
    rcs_mean_cm2: float = 100.0 * math.pi
    rcs_var_cm4: float = 20.0 * math.pi
    enabled: bool = True


@dataclass
class EnvironmentSection:
    frequency_hz: float = 2.4e9
    # x spans [2.5, 7.5] so the array at x = 5 and the ellipsoid fit inside
    room: dict = field(default_factory=lambda: {
        'width_x': 5.0, 'depth_y': 9.0, 'height_z': 3.5, 'origin': [2.5, 0.0, 0.0]})
    array: ArraySection = field(default_factory=ArraySection)
    reflection_gain_db: float = -3.0
    scatterers: ScattererSection = field(default_factory=ScattererSection)


@dataclass
class NeighborhoodSection:
    mode: str = 'top_t'
    gamma: float = 0.5
    T: int = 5
    k: int = 5
    exclude_query: bool = False
    angle_deg: float = None
    angle_rule: str = 'squared'

    def params(self, **override):
        d = {'mode': self.mode, 'gamma': self.gamma, 'T': self.T, 'k': self.k,
             'exclude_query': self.exclude_query}
        if self.angle_deg is not None:
            d['gamma'] = threshold_from_angle(self.angle_deg, self.angle_rule)
        d.update(override)
        return NeighborhoodParams(**d)


@dataclass
class SolverSection:
    max_iter: int = 200
    outer_tol: float = 1e-6
    inner_tol: float = 1e-8
    init: str = 'best_baseline'
    seed: int = 0
    restarts: int = 0

    def config(self):
        return SolverConfig(**asdict(self))


@dataclass
class SweepSection:
    axis: str = 'neighbors'
    values: list = field(default_factory=lambda: [1, 3, 5, 8])


@dataclass
class ExperimentConfig:
    environment: EnvironmentSection = field(default_factory=EnvironmentSection)
    trajectory: dict = field(default_factory=lambda: {'kind': 'circular', 'n_points': 1000})
    sample_period: float = None
    neighborhood: NeighborhoodSection = field(default_factory=NeighborhoodSection)
    solver: SolverSection = field(default_factory=SolverSection)
    power_dbw: float = 0.0
    codebook_size: int = 1
    sweep: SweepSection = field(default_factory=SweepSection)
    trials: int = 20
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.codebook_size < 1:
            raise ConfigurationError("codebook_size must be >= 1")
        sw = self.sweep
        if sw.axis not in SWEEP_AXES:
            raise ConfigurationError(f"sweep axis must be one of {SWEEP_AXES}, got {sw.axis!r}")
        if not sw.values:
            raise ConfigurationError("sweep values must be non-empty")
        if list(sw.values) != sorted(sw.values):
            raise ConfigurationError("sweep values must be sorted")
        self.trajectory_spec()
        self.neighborhood.params()
        self.solver.config()

    @property
    def power(self):
        return 10.0 ** (self.power_dbw / 10.0)

    @property
    def wavelength(self):
        return wavelength_for(self.environment.frequency_hz)

    def trajectory_spec(self):
        d = dict(self.trajectory)
        for key in ('center', 'x_range', 'y_range'):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return TrajectorySpec(**d)
        except TypeError as exc:
            raise ConfigurationError(f"bad trajectory section: {exc}") from None

    def build_environment(self):
        """Deterministic environment for this config's master seed."""
        env = self.environment
        lam = self.wavelength
        room_d = dict(env.room)
        room = RoomGeometry(room_d['width_x'], room_d['depth_y'], room_d['height_z'],
                            tuple(room_d.get('origin', (0.0, 0.0, 0.0))))
        a = env.array
        if a.full_aperture:
            array = ArrayConfig(tuple(a.center), a.width, a.height, lam / 2, lam, a.normal_axis)
        else:
            array = ArrayConfig.half_wavelength(a.center, a.n_cols, a.n_rows, lam, a.normal_axis)
        sources = build_image_sources(room, array, env.reflection_gain_db)
        sc = env.scatterers
        if sc.enabled:
            rng = np.random.default_rng([self.seed, STREAM_ENVIRONMENT])
            fld = sample_scatterer_field(sc.center, sc.semi_axes, sc.density,
                                         sc.rcs_mean_cm2 * CM2, sc.rcs_var_cm4 * CM4, rng)
        else:
            fld = ScattererField.empty()
        return Environment(room, array, sources, fld, lam)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        if 'config' in d and isinstance(d['config'], dict):
            d = d['config']
        return _build(cls, d)

    @classmethod
    def load(cls, path):
        text = Path(path).read_text(encoding='utf-8')
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None

    def replace(self, **changes):
        d = copy.deepcopy(self.to_dict())
        d.update(changes)
        return ExperimentConfig.from_dict(d)


_NESTED = {
    ExperimentConfig: {'environment': EnvironmentSection, 'neighborhood': NeighborhoodSection,
                       'solver': SolverSection, 'sweep': SweepSection},
    EnvironmentSection: {'array': ArraySection, 'scatterers': ScattererSection},
}


def _build(cls, d):
    if not isinstance(d, dict):
        raise ConfigurationError(f"section for {cls.__name__} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ConfigurationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for key, val in d.items():
        sub = _NESTED.get(cls, {}).get(key)
        kwargs[key] = _build(sub, val) if sub is not None else copy.deepcopy(val)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid {cls.__name__}: {exc}") from None


def preset(name):
    """Named starting configs for the three experiment families."""
    if name == 'neighbors':
        return ExperimentConfig()
    if name == 'threshold':
        return ExperimentConfig.from_dict({
            'neighborhood': {'mode': 'threshold'},
            'sweep': {'axis': 'threshold', 'values': [0.2, 0.3, 0.4, 0.5, 0.6]}})
    if name == 'codebook_size':
        return ExperimentConfig.from_dict({
            'trajectory': {'kind': 'zigzag', 'n_points': 2000},
            'neighborhood': {'mode': 'threshold', 'gamma': 0.766},
            'sweep': {'axis': 'codebook_size', 'values': [1, 2, 3, 4, 5]}})
    raise ConfigurationError(f"unknown preset {name!r}")
