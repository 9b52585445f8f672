"""Batch driver.

    python -m metricdiff corpus-list
    python -m metricdiff analyze-md --map corner --c 0 --n 1 --depth 8 --delta 0.25 --out out/
    python -m metricdiff analyze-beta --map affine --A 2 --n 1 --depth 8 --N 2
    python -m metricdiff scan-point --map corner --c 0 --z 0.3 --depth 10
    python -m metricdiff beta-md --map corner --c 0 --depth 6

Exit codes: 0 success, 1 configuration error, 2 numerical or IO failure.
"""
import argparse
import csv
import dataclasses
import datetime
import json
import logging
import os
import sys
import time

import numpy as np

from metricdiff import __version__
from metricdiff.beta import carleson_beta_sum
from metricdiff.carleson import Carleson
from metricdiff.corpus import (FAMILIES, default_margin, lift_map, make_spec,
                               read_map_csv, sample_map)
from metricdiff.dyadic import root_cube
from metricdiff.errors import (ConfigError, InvalidMetric, MetricDiffError,
                               ResolutionTooCoarse)
from metricdiff.metricspace import load_distance_matrix
from metricdiff.params import AnalysisParams, QuadratureSpec
from metricdiff.utils.parallel import default_workers

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMMANDS = ('corpus-list', 'analyze-md', 'analyze-beta', 'scan-point', 'beta-md')
FAMILY_FLAGS = ('c', 'A', 'b', 'gauge', 'K', 'amplitudes', 'periods', 'points',
                'vertices', 'knots')

# flag name -> (type, default); the config file uses the same keys
SETTINGS = {
    'map': (str, 'corner'), 'n': (int, 1), 'depth': (int, 6),
    'delta': (str, '0.25'), 'alpha': (str, 'auto'), 'N': (int, 2),
    'epsilon': (float, 1e-3), 'seed': (int, None), 'lines': (int, 128),
    'm': (int, 32), 'pairs': (int, 32), 'directions': (int, None),
    'grid_points': (int, None), 'out': (str, '.'),
    'format': (str, 'both'), 'workers': (int, None), 'h': (float, None),
    'margin': (float, None), 'root_origin': (float, -1.0),
    'root_side': (float, 2.0), 'z': (str, '0'), 'lift': (int, 0),
    'data': (str, None), 'matrix': (str, None),
}
SETTINGS.update({name: (str, None) for name in FAMILY_FLAGS})


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = Parser(prog='metricdiff',
                    description='Quantitative metric differentiation of '
                                'Lipschitz maps on dyadic cubes')
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command')
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument('--config', help='flat "key = value" file')
        cmd.add_argument('-v', '--verbose', action='count', default=0)
        for key, (kind, _) in SETTINGS.items():
            flag = '--' + key.replace('_', '-')
            cmd.add_argument(flag, dest=key, type=kind, default=None)
    return parser


def read_config(path):
    """Reads a flat key = value file; blank lines and # comments skipped"""
    settings = {}
    with open(path, 'r') as handle:
        for number, line in enumerate(handle, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError('%s:%d: expected "key = value"' % (path, number))
            key, value = (part.strip() for part in line.split('=', 1))
            key = key.lstrip('-').replace('-', '_')
            if key not in SETTINGS:
                raise ConfigError('%s:%d: unknown key %r' % (path, number, key))
            kind = SETTINGS[key][0]
            try:
                settings[key] = kind(value)
            except ValueError:
                raise ConfigError('%s:%d: bad value %r for %s'
                                  % (path, number, value, key))
    return settings


def _floats(text, what):
    try:
        return [float(v) for v in str(text).replace(' ', '').split(',') if v]
    except ValueError:
        raise ConfigError('bad %s %r' % (what, text))


@dataclasses.dataclass
class RunConfig:
    """Validated settings of one command"""
    command: str
    family: str
    family_options: dict
    n: int
    root_origin: float
    root_side: float
    depth: int
    deltas: list
    params: AnalysisParams
    quadrature: QuadratureSpec
    h: float
    margin: float
    out: str
    format: str
    workers: int
    z: list
    lift: bool
    data: str
    matrix: str

    @classmethod
    def from_args(cls, args):
        settings = {key: default for key, (_, default) in SETTINGS.items()}
        if args.config:
            settings.update(read_config(args.config))
        settings.update({key: getattr(args, key) for key in SETTINGS
                         if getattr(args, key) is not None})
        if settings['seed'] is None:
            env = os.environ.get('METRICDIFF_SEED')
            try:
                settings['seed'] = int(env) if env else 0
            except ValueError:
                raise ConfigError('METRICDIFF_SEED must be an integer')

        n = settings['n']
        deltas = _floats(settings['delta'], 'delta list')
        if not deltas:
            raise ConfigError('need at least one delta')
        alpha = settings['alpha']
        alpha = None if str(alpha).lower() == 'auto' else _floats(alpha, 'alpha')[0]
        if settings['depth'] < 0:
            raise ConfigError('depth must be >= 0')
        if settings['format'] not in ('record', 'csv', 'both'):
            raise ConfigError('format must be record, csv or both')
        workers = settings['workers']
        if workers is None:
            workers = default_workers()
        elif workers < 1:
            raise ConfigError('workers must be >= 1')
        # md parameters are shared by every threshold of the run
        params = AnalysisParams(n=n, delta=min(deltas), alpha=alpha,
                                N=settings['N'], epsilon=settings['epsilon'],
                                directions=settings['directions'],
                                pairs=settings['pairs'],
                                grid_points=settings['grid_points'],
                                seed=settings['seed'])
        quadrature = QuadratureSpec(m=settings['m'], mc_lines=settings['lines'],
                                    seed=settings['seed'])
        z = _floats(settings['z'], 'point')
        if len(z) == 1 and n > 1:
            z = z*n
        margin = settings['margin'] or default_margin(settings['N'])
        h = settings['h']
        if h is None:
            # closed-form maps only use the table for the Lipschitz estimate,
            # so it is capped near 2^20 nodes
            k = min(settings['depth'] + 3,
                    int(np.floor(np.log2(2.0**(20.0/n)/margin))))
            h = settings['root_side']*2.0**(-max(k, 0))
        options = {key: settings[key] for key in FAMILY_FLAGS
                   if settings[key] is not None}
        return cls(args.command, settings['map'], options, n,
                   settings['root_origin'], settings['root_side'],
                   settings['depth'], deltas, params, quadrature, h, margin,
                   settings['out'], settings['format'], workers,
                   z, bool(settings['lift']), settings['data'],
                   settings['matrix'])

    def build_map(self):
        root = root_cube([self.root_origin]*self.n, self.root_side)
        if self.data:
            matrix = load_distance_matrix(self.matrix) if self.matrix else None
            f = read_map_csv(self.data, root, matrix)
            if root.side*2.0**(-self.depth) < 8*f.h*(1 - 1e-12):
                raise ResolutionTooCoarse('data step %g gives fewer than 8 '
                                          'samples per side at depth %d'
                                          % (f.h, self.depth))
        else:
            spec = make_spec(self.family, self.family_options, self.n)
            f = sample_map(spec, root, self.h, self.margin, N=self.params.N,
                           seed=self.params.seed)
        log.info('map ready: L_hat=%.6g, %d nodes per axis', f.L_hat,
                 f.nodes_per_axis)
        return f

    def as_record(self):
        return {'command': self.command, 'map': self.family,
                'map_options': self.family_options, 'data': self.data,
                'n': self.n, 'root_origin': self.root_origin,
                'root_side': self.root_side, 'depth': self.depth,
                'deltas': self.deltas, 'h': self.h, 'margin': self.margin,
                'z': self.z, 'lift': self.lift,
                'params': self.params.as_record(),
                'quadrature': self.quadrature.as_record()}


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('cannot serialize %r' % (value,))


def emit_report(report, fmt, path, rows=None):
    """Writes report (a dict) to path.json and rows (header first) to
       path.csv as selected by fmt.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    written = []
    if fmt in ('record', 'both'):
        document = {'schema_version': SCHEMA_VERSION}
        document.update(report)
        with open(path + '.json', 'w') as handle:
            json.dump(document, handle, indent=2, sort_keys=True, default=_plain)
            handle.write('\n')
        written.append(path + '.json')
    if fmt in ('csv', 'both') and rows is not None:
        with open(path + '.csv', 'w', newline='') as handle:
            csv.writer(handle, lineterminator='\n').writerows(rows)
        written.append(path + '.csv')
    return written


def write_sidecar(path, argv, started):
    """Wall-clock metadata, kept out of the reproducible reports"""
    meta = {'argv': list(argv), 'version': __version__,
            'started': datetime.datetime.fromtimestamp(started).isoformat(),
            'elapsed_seconds': time.time() - started}
    with open(path + '.meta.json', 'w') as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
        handle.write('\n')


def corpus_list():
    for name in sorted(FAMILIES):
        print(name)
        for key, text in sorted(FAMILIES[name].schema.items()):
            print('    --%-12s %s' % (key, text))
    return 0


def analyze_md(config, f):
    engine = Carleson(f, config.params, config.quadrature, config.workers)
    reports = [engine.md_packing_sum(config.depth, delta)
               for delta in config.deltas]
    stem = os.path.join(config.out, 'analyze-md')
    record = {'config': config.as_record(),
              'reports': [r.as_record() for r in reports]}
    emit_report(record, config.format, stem, None)
    if config.format in ('csv', 'both'):
        for r in reports:
            emit_report({}, 'csv', '%s-delta%g' % (stem, r.delta), r.csv_rows())
    summary = ', '.join('delta=%g ratio=%.6g' % (r.delta, r.ratio)
                        for r in reports)
    return stem, 'analyze-md depth=%d: %s' % (config.depth, summary)


def analyze_beta(config, f):
    g = lift_map(f) if config.lift else f
    report = carleson_beta_sum(g, f.root, config.depth, config.params.N,
                               config.quadrature, config.workers)
    rows = [('level', 'sum', 'cubes')] + \
        [(r['level'], r['sum'], r['cubes']) for r in report.per_level]
    stem = os.path.join(config.out, 'analyze-beta')
    emit_report({'config': config.as_record(), 'report': report.as_record()},
                config.format, stem, rows)
    return stem, 'analyze-beta depth=%d N=%d: total=%.6g ratio=%.6g' % (
        config.depth, config.params.N, report.total, report.ratio)


def scan_point(config, f):
    engine = Carleson(f, config.params, config.quadrature, config.workers)
    scan = engine.kirchheim_scan(np.asarray(config.z), config.depth)
    rows = [('level', 'side', 'md')] + scan
    stem = os.path.join(config.out, 'scan-point')
    emit_report({'config': config.as_record(), 'L_hat': f.L_hat,
                 'scan': [{'level': l, 'side': s, 'md': m} for l, s, m in scan]},
                config.format, stem, rows)
    return stem, 'scan-point z=%s: md %.4g at level 0, %.4g at level %d' % (
        config.z, scan[0][2], scan[-1][2], scan[-1][0])


def beta_md(config, f):
    engine = Carleson(f, config.params, config.quadrature, config.workers)
    table = engine.beta_vs_md_table(config.depth)
    rows = [('cube', 'level', 'beta', 'md')] + table
    stem = os.path.join(config.out, 'beta-md')
    emit_report({'config': config.as_record(), 'L_hat': f.L_hat,
                 'rows': [{'cube': c, 'level': l, 'beta': b, 'md': m}
                          for c, l, b, m in table]},
                config.format, stem, rows)
    small = [row[3] for row in table if row[2] < config.params.epsilon]
    return stem, 'beta-md depth=%d: %d cubes, max md %.4g where beta < %g' % (
        config.depth, len(table), max(small) if small else 0.0,
        config.params.epsilon)


ACTIONS = {'analyze-md': analyze_md, 'analyze-beta': analyze_beta,
           'scan-point': scan_point, 'beta-md': beta_md}


def run_command(argv):
    """Runs one command; returns the process exit code"""
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError('choose a command: %s' % ', '.join(COMMANDS))
        level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose,
                                                          logging.DEBUG)
        logging.basicConfig(level=level, stream=sys.stderr,
                            format='%(levelname)s %(name)s: %(message)s')
        if args.command == 'corpus-list':
            return corpus_list()
        config = RunConfig.from_args(args)
        f = config.build_map()
        stem, summary = ACTIONS[args.command](config, f)
        write_sidecar(stem, argv, started)
    except (ConfigError, InvalidMetric, ResolutionTooCoarse) as err:
        print('metricdiff: configuration error: %s' % err, file=sys.stderr)
        return 1
    except (MetricDiffError, OSError) as err:
        print('metricdiff: %s: %s' % (type(err).__name__, err), file=sys.stderr)
        return 2
    print(summary)
    return 0


def main(argv=None):
    return run_command(sys.argv[1:] if argv is None else argv)
