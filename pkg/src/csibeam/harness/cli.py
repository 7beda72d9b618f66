"""
Command-line entry point: ``csibeam {generate,neighborhood,design,sweep,verify}``.

Configuration comes from flags and, optionally, a JSON file given with
``--config``; values in the file take precedence over flags. Exit codes:
0 success, 1 validation (bad config, bad query, empty neighborhood),
2 solver failure, 3 I/O failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..channel import generate_trajectory
from ..database import CsiDatabase, generate_database, write_metadata
from ..errors import ConfigurationError, ConvergenceError, CsibeamError
from ..neighborhood import build_neighborhood
from ..optimizer import to_db
from .config import STREAM_TRAJECTORY, ExperimentConfig, preset
from .experiments import SCHEMES, compare_schemes, run_sweep
from . import verify as verify_mod

log = logging.getLogger('csibeam')

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _add_config_flags(p):
    g = p.add_argument_group('experiment config')
    g.add_argument('--config', type=Path, help='JSON config file; its values override flags')
    g.add_argument('--seed', type=int)
    g.add_argument('--trials', type=int)
    g.add_argument('--trajectory', choices=('circular', 'zigzag'))
    g.add_argument('--n-points', type=int, help='database size N')
    g.add_argument('--noise-std', type=float)
    g.add_argument('--power-dbw', type=float)
    g.add_argument('--codebook-size', '-L', type=int)
    g.add_argument('--mode', choices=('top_t', 'threshold'))
    g.add_argument('--gamma', type=float, help='closeness threshold')
    g.add_argument('--angle', type=float, help='max angle in degrees (alternative to --gamma)')
    g.add_argument('--angle-rule', choices=('squared', 'cosine'))
    g.add_argument('--top-t', '-T', type=int)
    g.add_argument('--window', '-k', type=int, help='local window half-width k')
    g.add_argument('--exclude-query', action='store_true', default=None)
    g.add_argument('--init', choices=('mrt', 'ebf', 'best_baseline', 'random'))
    g.add_argument('--restarts', type=int)
    g.add_argument('--max-iter', type=int)
    g.add_argument('--no-scatterers', action='store_true', default=None)
    g.add_argument('--full-aperture', action='store_true', default=None)


def _flag_overrides(args):
    """Nested dict holding only the flags the user actually set."""
    table = {
        'seed': ('seed',), 'trials': ('trials',),
        'trajectory': ('trajectory', 'kind'), 'n_points': ('trajectory', 'n_points'),
        'noise_std': ('trajectory', 'noise_std'),
        'power_dbw': ('power_dbw',), 'codebook_size': ('codebook_size',),
        'mode': ('neighborhood', 'mode'), 'gamma': ('neighborhood', 'gamma'),
        'angle': ('neighborhood', 'angle_deg'), 'angle_rule': ('neighborhood', 'angle_rule'),
        'top_t': ('neighborhood', 'T'), 'window': ('neighborhood', 'k'),
        'exclude_query': ('neighborhood', 'exclude_query'),
        'init': ('solver', 'init'), 'restarts': ('solver', 'restarts'),
        'max_iter': ('solver', 'max_iter'),
        'full_aperture': ('environment', 'array', 'full_aperture'),
    }
    out = {}
    for attr, path in table.items():
        val = getattr(args, attr, None)
        if val is None:
            continue
        node = out
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = val
    if getattr(args, 'no_scatterers', None):
        out.setdefault('environment', {}).setdefault('scatterers', {})['enabled'] = False
    if getattr(args, 'sweep_axis', None):
        out.setdefault('sweep', {})['axis'] = args.sweep_axis
    if getattr(args, 'values', None):
        out.setdefault('sweep', {})['values'] = args.values
    return out


def _merge(base, top):
    out = dict(base)
    for key, val in top.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def resolve_config(args):
    base = preset(args.preset).to_dict() if getattr(args, 'preset', None) else {}
    d = _merge(base, _flag_overrides(args))
    if args.config is not None:
        try:
            from_file = json.loads(args.config.read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{args.config}: invalid JSON ({exc})") from None
        if isinstance(from_file, dict) and isinstance(from_file.get('config'), dict):
            from_file = from_file['config']
        d = _merge(d, from_file)
    return ExperimentConfig.from_dict(d)


def _default_meta(path):
    return Path(str(path) + '.meta.json')


def _write_json(path, payload):
    if path is None:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write('\n')
    else:
        write_metadata(path, payload)


def _load_query(args, db):
    if args.query_vector is not None:
        d = json.loads(Path(args.query_vector).read_text(encoding='utf-8'))
        try:
            g = np.asarray(d['re'], dtype=float) + 1j * np.asarray(d['im'], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ConfigurationError(
                f"{args.query_vector}: expected an object with 're' and 'im' lists") from None
        if g.shape != (db.M,):
            raise ConfigurationError(f"query vector has length {g.size}, database has M={db.M}")
        return g, None, {'query_vector': {'re': g.real.tolist(), 'im': g.imag.tolist()}}
    idx = len(db) - 1 if args.query_index is None else args.query_index
    if idx < 0:
        idx += len(db)
    if not 0 <= idx < len(db):
        raise ConfigurationError(f"query index {args.query_index} out of range for N={len(db)}")
    return db[idx].h, idx, {'query_index': idx}


def cmd_generate(args):
    config = resolve_config(args)
    env = config.build_environment()
    spec = config.trajectory_spec()
    rng = np.random.default_rng([config.seed, STREAM_TRAJECTORY])
    db = generate_database(generate_trajectory(spec, env.room, rng), env, config.sample_period)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    db.save(args.out)
    meta = {
        'config': config.to_dict(),
        'database': {'N': len(db), 'M': db.M, 'file': args.out.name},
        'wavelength_m': env.wavelength,
        'image_sources': len(env.sources),
        'scatterers': {'count': env.field.count, 'expected_count': env.field.expected_count},
    }
    write_metadata(args.meta or _default_meta(args.out), meta)
    print(f"wrote {len(db)} records (M={db.M}) to {args.out}")
    return EXIT_OK


def cmd_neighborhood(args):
    config = resolve_config(args)
    db = CsiDatabase.load(args.db)
    g, idx, query = _load_query(args, db)
    params = config.neighborhood.params()
    nb = build_neighborhood(db, g, params, query_index=idx)
    payload = dict(query)
    payload.update({'params': params.to_dict(), 'initial_indices': list(nb.initial),
                    'member_indices': [int(i) for i in nb.indices], 'K': nb.K})
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_design(args):
    config = resolve_config(args)
    db = CsiDatabase.load(args.db)
    g, idx, query = _load_query(args, db)
    params = config.neighborhood.params()
    nb = build_neighborhood(db, g, params, query_index=idx)
    P, L = config.power, config.codebook_size
    res = compare_schemes(nb.channels, g, P, L, config.solver.config())
    mms = res['MMS']
    payload = mms.codebook.to_dict()
    payload.update(query)
    payload['neighborhood'] = {'params': params.to_dict(), 'initial_indices': list(nb.initial),
                               'member_indices': [int(i) for i in nb.indices], 'K': nb.K}
    payload['metrics'] = {s: {'min_sum_gain': res[s].gain, 'gain_db': to_db(res[s].gain)}
                          for s in SCHEMES}
    payload['report'] = mms.report.to_dict()
    payload['config'] = config.to_dict()
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        write_metadata(args.out, payload)
    print(f"K = {nb.K}, L = {L}, P = {P:g} W")
    print(f"{'scheme':<8}{'gain (dB)':>12}")
    for s in SCHEMES:
        print(f"{s:<8}{to_db(res[s].gain):>12.4f}")
    return EXIT_OK


def cmd_sweep(args):
    config = resolve_config(args)

    def progress(value, trial):
        log.info("sweep value %s trial %d done", value, trial)

    result = run_sweep(config, progress)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(result.csv_text(), encoding='utf-8')
    write_metadata(args.meta or _default_meta(args.out), result.metadata)
    for entry in result.metadata['summary']:
        if entry['n']:
            print(f"{entry['sweep_value']!s:>8} {entry['scheme']:<4} "
                  f"{entry['mean_gain_db']:9.4f} dB  (n={entry['n']})")
    if result.metadata['errors']:
        print(f"{len(result.metadata['errors'])} failed trials recorded", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    results = verify_mod.run_all()
    payload = {'passed': all(r.passed for r in results), 'checks': [r.to_dict() for r in results]}
    _write_json(args.out, payload)
    return EXIT_OK if payload['passed'] else EXIT_VALIDATION


def _add_query(p):
    p.add_argument('--db', type=Path, required=True, help='JSON-lines CSI database')
    q = p.add_mutually_exclusive_group()
    q.add_argument('--query-index', type=int, help='database index of the outdated CSI (default: last)')
    q.add_argument('--query-vector', type=Path, help='JSON file {"re": [...], "im": [...]}')


def build_parser():
    parser = argparse.ArgumentParser(prog='csibeam', description=__doc__.strip().splitlines()[0])
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='synthesize a CSI database along a trajectory')
    _add_config_flags(p)
    p.add_argument('--out', type=Path, required=True)
    p.add_argument('--meta', type=Path, help='metadata path (default: <out>.meta.json)')
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('neighborhood', help='list the neighborhood of a query')
    _add_config_flags(p)
    _add_query(p)
    p.add_argument('--out', type=Path, help='JSON output (default: stdout)')
    p.set_defaults(func=cmd_neighborhood)

    p = sub.add_parser('design', help='design a codebook and compare with the baselines')
    _add_config_flags(p)
    _add_query(p)
    p.add_argument('--out', type=Path, help='codebook JSON path')
    p.set_defaults(func=cmd_design)

    p = sub.add_parser('sweep', help='run an experiment sweep to CSV')
    _add_config_flags(p)
    p.add_argument('--preset', choices=('neighbors', 'threshold', 'codebook_size'))
    p.add_argument('--sweep-axis', choices=('neighbors', 'threshold', 'codebook_size'))
    p.add_argument('--values', type=float, nargs='+')
    p.add_argument('--out', type=Path, required=True)
    p.add_argument('--meta', type=Path, help='metadata path (default: <out>.meta.json)')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('verify', help='run the built-in property and oracle checks')
    p.add_argument('--out', type=Path, help='JSON output (default: stdout)')
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CsibeamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
