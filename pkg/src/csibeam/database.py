"""
Chronological CSI database and its JSON-lines file format.

Each line of the database file is one record::

    {"idx": 0, "t": null, "pos": [x, y, z], "re": [...], "im": [...]}

A sidecar metadata JSON holds the generating configuration and seed.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import channel_at
from .errors import ConfigurationError, DimensionError

__all__ = ['CsiRecord', 'CsiDatabase', 'generate_database']


@dataclass(frozen=True)
class CsiRecord:
    index: int
    h: np.ndarray
    timestamp: float = None
    position: np.ndarray = None  # ground truth, evaluation only


class CsiDatabase:
    """
    Immutable, chronologically ordered set of channel vectors.

    Channels are held as one ``(N, M)`` array; records are views onto it.
    """

    def __init__(self, channels, positions=None, timestamps=None):
        H = np.array(channels, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise DimensionError(f"channels must be a non-empty (N, M) array, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValueError("channels contain non-finite entries")
        n = H.shape[0]
        if positions is not None:
            positions = np.array(positions, dtype=float).reshape(n, 3)
            positions.flags.writeable = False
        if timestamps is not None:
            timestamps = np.array(timestamps, dtype=float).reshape(n)
            if np.any(np.diff(timestamps) < 0):
                raise ValueError("timestamps must be non-decreasing")
            timestamps.flags.writeable = False
        H.flags.writeable = False
        self._H = H
        self._positions = positions
        self._timestamps = timestamps

    @property
    def channels(self):
        return self._H

    @property
    def positions(self):
        return self._positions

    @property
    def timestamps(self):
        return self._timestamps

    @property
    def M(self):
        return self._H.shape[1]

    def __len__(self):
        return self._H.shape[0]

    def __getitem__(self, i):
        n = len(self)
        if not -n <= i < n:
            raise IndexError(f"record index {i} out of range for database of size {n}")
        i = i % n
        return CsiRecord(
            i, self._H[i],
            None if self._timestamps is None else float(self._timestamps[i]),
            None if self._positions is None else self._positions[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def save(self, path):
        """Write the JSON-lines file; output is byte-stable for equal content."""
        with open(path, 'w', encoding='utf-8') as fh:
            for rec in self:
                fh.write(json.dumps({
                    'idx': rec.index,
                    't': rec.timestamp,
                    'pos': None if rec.position is None else [float(x) for x in rec.position],
                    're': [float(x) for x in rec.h.real],
                    'im': [float(x) for x in rec.h.imag],
                }) + '\n')

    @classmethod
    def load(cls, path):
        rows = []
        with open(path, encoding='utf-8') as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ConfigurationError(f"{path}:{lineno}: malformed record ({exc})") from None
        if not rows:
            raise ConfigurationError(f"{path}: database file is empty")
        for expected, row in enumerate(rows):
            if row.get('idx') != expected:
                raise ConfigurationError(
                    f"{path}: record indices must be contiguous from 0 (got {row.get('idx')} at line {expected + 1})")
        H = np.array([np.asarray(r['re']) + 1j * np.asarray(r['im']) for r in rows])
        pos = None
        if all(r.get('pos') is not None for r in rows):
            pos = [r['pos'] for r in rows]
        ts = None
        if all(r.get('t') is not None for r in rows):
            ts = [r['t'] for r in rows]
        return cls(H, pos, ts)


def generate_database(trajectory, env, sample_period=None):
    """Evaluate the channel at every trajectory point, keeping the order."""
    pts = np.asarray(trajectory, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ConfigurationError("trajectory is empty")
    H = np.array([channel_at(p, env) for p in pts])
    ts = None if sample_period is None else np.arange(len(pts)) * float(sample_period)
    return CsiDatabase(H, pts, ts)


def write_metadata(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')


def read_metadata(path):
    return json.loads(Path(path).read_text(encoding='utf-8'))
