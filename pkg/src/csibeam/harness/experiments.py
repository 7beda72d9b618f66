"""
End-to-end pipeline: database synthesis, query draws, scheme comparison and
parameter sweeps.

Every random draw comes from a generator seeded by ``[master_seed, stream,
...]``, so a trial's outcome depends only on the config, the master seed
and the trial id.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..channel import generate_trajectory, nominal_position, perturb
from ..database import generate_database
from ..errors import CsibeamError
from ..neighborhood import build_neighborhood
from ..optimizer import (ebf_codebook, min_sum_gain, mrt_baseline_gain, mrt_codebook,
                         sca_design, sum_gains, to_db)
from .config import STREAM_TRAJECTORY, STREAM_TRIAL

log = logging.getLogger(__name__)

SCHEMES = ('MMS', 'EBF', 'MRT')
CSV_HEADER = ('sweep_value', 'scheme', 'gain_db', 'K', 'trial', 'seed')
AVERAGING = 'linear-scale mean over successful trials, reported in dB'


def build_database(config):
    """Environment, trajectory spec and CSI database for `config`."""
    env = config.build_environment()
    spec = config.trajectory_spec()
    rng = np.random.default_rng([config.seed, STREAM_TRAJECTORY])
    pts = generate_trajectory(spec, env.room, rng)
    return env, spec, generate_database(pts, env, config.sample_period)


def trial_seed(master_seed, trial):
    """Integer fingerprint of a trial's random stream (for the CSV)."""
    return int(np.random.SeedSequence([master_seed, STREAM_TRIAL, trial]).generate_state(1)[0])


@dataclass
class Query:
    position: np.ndarray
    g: np.ndarray           # outdated CSI
    true_position: np.ndarray
    h_true: np.ndarray      # channel where the UE actually is at transmission


def draw_query(config, env, spec, trial):
    """
    Outdated CSI at a random point of the noisy path, plus the channel one
    sample period further along (fresh noise) as the realized location.
    """
    rng = np.random.default_rng([config.seed, STREAM_TRIAL, trial])
    u = rng.uniform()
    p = perturb(nominal_position(spec, u), spec, env.room, rng)[0]
    u_next = (u + 1.0 / spec.n_points) % 1.0
    p_true = perturb(nominal_position(spec, u_next), spec, env.room, rng)[0]
    return Query(p, env.channel_at(p), p_true, env.channel_at(p_true))


@dataclass
class SchemeResult:
    gain: float
    codebook: object
    report: object = None


def compare_schemes(channels, g, P, L, solver_config):
    """
    Worst-case summed gain of MMS, EBF and MRT on one neighborhood.

    MMS starts from the better baseline by default, so it can only match or
    beat both; a violation is logged since it would indicate a solver bug.
    """
    mrt = mrt_codebook(g, P, L)
    ebf = ebf_codebook(channels, P, L)
    cb, report = sca_design(channels, P, L, solver_config, query=g)
    out = {
        'MMS': SchemeResult(min_sum_gain(cb, channels), cb, report),
        'EBF': SchemeResult(min_sum_gain(ebf, channels), ebf),
        'MRT': SchemeResult(mrt_baseline_gain(g, P, L, channels), mrt),
    }
    if solver_config.init == 'best_baseline':
        floor = max(out['EBF'].gain, out['MRT'].gain)
        if out['MMS'].gain < floor - 1e-8:
            log.error("MMS below best baseline: %.12g < %.12g", out['MMS'].gain, floor)
    return out


def _params_for(config, axis, value):
    nb = config.neighborhood
    if axis == 'neighbors':
        return nb.params(mode='top_t', T=int(value)), config.codebook_size
    if axis == 'threshold':
        return nb.params(mode='threshold', gamma=float(value)), config.codebook_size
    return nb.params(), int(value)


def _fmt(x):
    return format(x, '.12g')


@dataclass
class SweepResult:
    rows: list
    metadata: dict

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(CSV_HEADER)
        w.writerows(self.rows)
        return buf.getvalue()


def run_sweep(config, progress=None):
    """
    Evaluate every (sweep value, trial, scheme) triple.

    A failing trial yields one row per scheme whose ``gain_db`` is
    ``ERROR:<reason>`` and the sweep continues.
    """
    env, spec, db = build_database(config)
    axis, values = config.sweep.axis, list(config.sweep.values)
    P = config.power
    solver = config.solver.config()
    queries = {}
    rows, errors = [], []
    gains = {(v, s): [] for v in values for s in SCHEMES}
    realized = {(v, s): [] for v in values for s in SCHEMES}
    for value in values:
        params, L = _params_for(config, axis, value)
        for trial in range(config.trials):
            if trial not in queries:
                queries[trial] = draw_query(config, env, spec, trial)
            q = queries[trial]
            seed = trial_seed(config.seed, trial)
            try:
                nb = build_neighborhood(db, q.g, params)
                res = compare_schemes(nb.channels, q.g, P, L, solver)
            except CsibeamError as exc:
                reason = type(exc).__name__
                errors.append({'sweep_value': value, 'trial': trial, 'error': str(exc)})
                for s in SCHEMES:
                    rows.append([value, s, f'ERROR:{reason}', '', trial, seed])
                continue
            for s in SCHEMES:
                g_lin = res[s].gain
                rows.append([value, s, _fmt(to_db(g_lin)), nb.K, trial, seed])
                gains[(value, s)].append(g_lin)
                realized[(value, s)].append(float(sum_gains(res[s].codebook, q.h_true[None, :])[0]))
            if progress is not None:
                progress(value, trial)

    summary = []
    for value in values:
        for s in SCHEMES:
            lin = np.array(gains[(value, s)])
            entry = {'sweep_value': value, 'scheme': s, 'n': int(lin.size)}
            if lin.size:
                db_vals = 10 * np.log10(np.maximum(lin, 1e-300))
                entry['mean_gain_db'] = to_db(float(lin.mean()))
                entry['mean_gain_linear'] = float(lin.mean())
                entry['stderr_db'] = float(db_vals.std(ddof=1) / math.sqrt(lin.size)) if lin.size > 1 else 0.0
                entry['mean_realized_gain_db'] = to_db(float(np.mean(realized[(value, s)])))
            summary.append(entry)
    metadata = {
        'config': config.to_dict(),
        'seed': config.seed,
        'database': {'N': len(db), 'M': db.M},
        'averaging': AVERAGING,
        'summary': summary,
        'errors': errors,
    }
    return SweepResult(rows, metadata)
