"""Synthetic Lipschitz maps, grid sampling and lifting.

A MapSpec is a closed-form family member; it knows its dimension, its target
backend and a closed-form Lipschitz bound. A SampledMap holds a map on the
regular grid of an enlarged root cube. When a MapSpec is attached, evaluation
is closed-form and the table is only used for the Lipschitz estimate; maps
ingested as raw data are evaluated at the nearest grid node.
"""
import csv
import logging

import numpy as np

from metricdiff.dyadic import Box, dilate
from metricdiff.errors import ConfigError, OutOfDomain, ResolutionTooCoarse
from metricdiff.metricspace import (DistanceMatrix, LiftedSpace, NormedPlane,
                                    SupNormVectors)
from metricdiff.seminorm import PolyhedralSeminorm

log = logging.getLogger(__name__)


def parse_matrix(text):
    """'1,0;0,2' -> [[1,0],[0,2]]; a bare scalar gives a 1x1 matrix"""
    rows = [r for r in str(text).replace(' ', '').split(';') if r]
    return np.array([[float(v) for v in r.split(',')] for r in rows])


def parse_vector(text):
    return np.array([float(v) for v in str(text).replace(' ', '').split(',') if v])


class MapSpec(object):
    """Base class of the closed-form map families"""
    family = None
    schema = {}

    @property
    def width(self):
        return self.backend.width

    def evaluate(self, x):
        """Vectorized evaluation, x of shape (..., n)"""
        x = np.asarray(x, dtype=float)
        assert x.shape[-1] == self.n, 'expected points in R^%d' % self.n
        return self._evaluate(x)

    def as_record(self):
        record = {'family': self.family, 'n': self.n,
                  'lipschitz': self.lipschitz}
        record.update(self._params())
        return record


class Affine(MapSpec):
    """x -> A x + b into R^m with the sup norm"""
    family = 'affine'
    schema = {'A': 'matrix rows "a11,a12;a21,a22" or a scalar multiple of Id',
              'b': 'offset vector (optional)'}

    def __init__(self, A, b=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.n = self.A.shape[1]
        self.b = np.zeros(self.A.shape[0]) if b is None else \
            np.asarray(b, dtype=float)
        self.backend = SupNormVectors(self.A.shape[0])
        self.lipschitz = float(np.max(np.linalg.norm(self.A, axis=1)))

    def _evaluate(self, x):
        return x @ self.A.T + self.b

    def _params(self):
        return {'A': self.A.tolist(), 'b': self.b.tolist()}

    @classmethod
    def from_options(cls, opts, n):
        A = parse_matrix(opts.get('A', '1'))
        if A.shape == (1, 1) and n > 1:
            A = A[0, 0]*np.eye(n)
        b = parse_vector(opts['b']) if opts.get('b') else None
        return cls(A, b)


class NormPullback(MapSpec):
    """Identity of R^n into (R^n, gauge)"""
    family = 'normpullback'
    schema = {'gauge': '"l1", "linf" or functional rows "a11,a12;a21,a22"'}

    def __init__(self, gauge):
        self.gauge = gauge
        self.n = gauge.n
        self.backend = NormedPlane(gauge)
        self.lipschitz = float(np.max(np.linalg.norm(gauge.functionals, axis=1)))

    def _evaluate(self, x):
        return x

    def _params(self):
        return {'gauge': self.gauge.as_record()}

    @classmethod
    def from_options(cls, opts, n):
        name = str(opts.get('gauge', 'l1')).lower()
        if name == 'l1':
            gauge = PolyhedralSeminorm.l1(n)
        elif name == 'linf':
            gauge = PolyhedralSeminorm(np.eye(n))
        else:
            gauge = PolyhedralSeminorm(parse_matrix(name))
        return cls(gauge)


class Corner(MapSpec):
    """x -> |x - c|_2 into R"""
    family = 'corner'
    schema = {'c': 'corner location, comma separated'}

    def __init__(self, c):
        self.c = np.atleast_1d(np.asarray(c, dtype=float))
        self.n = self.c.shape[0]
        self.backend = SupNormVectors(1)
        self.lipschitz = 1.0

    def _evaluate(self, x):
        return np.linalg.norm(x - self.c, axis=-1)[..., None]

    def _params(self):
        return {'c': self.c.tolist()}

    @classmethod
    def from_options(cls, opts, n):
        c = parse_vector(opts.get('c', '0'))
        if c.shape[0] == 1 and n > 1:
            c = np.full(n, c[0])
        return cls(c)


def tooth(t):
    """Triangle wave of period 1, 0 at the integers and 1 at the half integers"""
    return 2.0*np.abs(t - np.round(t))


class Sawtooth(MapSpec):
    """sum_k a_k tooth(<w,x>/s_k) into R: level k has peak a_k, period s_k.
       Defaults: s_k = 2^-k, a_k = s_k/2 (unit slope per level), w = e_1.
    """
    family = 'sawtooth'
    schema = {'K': 'number of levels',
              'amplitudes': 'peak heights a_k (default s_k/2)',
              'periods': 'periods s_k (default 2^-k, k=1..K)'}

    def __init__(self, K, amplitudes=None, periods=None, n=1, direction=None):
        self.K = int(K)
        self.n = int(n)
        self.periods = 2.0**(-np.arange(1, self.K + 1)) if periods is None \
            else np.asarray(periods, dtype=float)
        self.amplitudes = 0.5*self.periods if amplitudes is None \
            else np.asarray(amplitudes, dtype=float)
        assert self.periods.shape == self.amplitudes.shape == (self.K,)
        self.direction = np.eye(self.n)[0] if direction is None \
            else np.asarray(direction, dtype=float)
        self.backend = SupNormVectors(1)
        self.lipschitz = float(np.sum(2.0*np.abs(self.amplitudes)/self.periods)
                               * np.linalg.norm(self.direction))

    def _evaluate(self, x):
        t = x @ self.direction
        out = np.zeros(t.shape)
        for a, s in zip(self.amplitudes, self.periods):
            out += a*tooth(t/s)
        return out[..., None]

    def _params(self):
        return {'K': self.K, 'amplitudes': self.amplitudes.tolist(),
                'periods': self.periods.tolist(),
                'direction': self.direction.tolist()}

    @classmethod
    def from_options(cls, opts, n):
        amps = parse_vector(opts['amplitudes']) if opts.get('amplitudes') else None
        periods = parse_vector(opts['periods']) if opts.get('periods') else None
        return cls(int(opts.get('K', 3)), amps, periods, n=n)


class DistanceCoords(MapSpec):
    """x -> (|x - p|_2)_{p in P} into the sup norm"""
    family = 'distancecoords'
    schema = {'points': 'point cloud rows "x1,y1;x2,y2"'}

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.n = self.points.shape[1]
        self.backend = SupNormVectors(self.points.shape[0])
        self.lipschitz = 1.0

    def _evaluate(self, x):
        return np.linalg.norm(x[..., None, :] - self.points, axis=-1)

    def _params(self):
        return {'points': self.points.tolist()}

    @classmethod
    def from_options(cls, opts, n):
        return cls(parse_matrix(opts.get('points', ','.join(['0']*n))))


class BrokenCurve(MapSpec):
    """Piecewise linear curve t -> v(t) through vertices at knots (n = 1),
       constant beyond the end knots, into the sup norm.
    """
    family = 'brokencurve'
    schema = {'vertices': 'vertex rows "x1,y1;x2,y2;..."',
              'knots': 'increasing parameters of the vertices (default '
                       'equally spaced on [0,1])'}

    def __init__(self, vertices, knots=None):
        self.vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        V = self.vertices.shape[0]
        assert V >= 2
        self.knots = np.linspace(0.0, 1.0, V) if knots is None \
            else np.asarray(knots, dtype=float)
        assert np.all(np.diff(self.knots) > 0)
        self.n = 1
        self.backend = SupNormVectors(self.vertices.shape[1])
        steps = np.max(np.abs(np.diff(self.vertices, axis=0)), axis=1)
        self.lipschitz = float(np.max(steps/np.diff(self.knots)))

    def _evaluate(self, x):
        t = x[..., 0]
        return np.stack([np.interp(t, self.knots, self.vertices[:, j])
                         for j in range(self.vertices.shape[1])], axis=-1)

    def _params(self):
        return {'vertices': self.vertices.tolist(), 'knots': self.knots.tolist()}

    @classmethod
    def from_options(cls, opts, n):
        if n != 1:
            raise ConfigError('brokencurve is defined for n = 1 only')
        knots = parse_vector(opts['knots']) if opts.get('knots') else None
        return cls(parse_matrix(opts.get('vertices', '0,0;1,1;2,0')), knots)


class Lifted(MapSpec):
    """x -> (x, f(x)) into R^n x M"""
    family = 'lifted'

    def __init__(self, spec):
        self.spec = spec
        self.n = spec.n
        self.backend = LiftedSpace(spec.backend, spec.n)
        self.lipschitz = float(np.sqrt(1.0 + spec.lipschitz**2))

    def _evaluate(self, x):
        return np.concatenate([x, self.spec._evaluate(x)], axis=-1)

    def _params(self):
        return {'inner': self.spec.as_record()}


FAMILIES = {cls.family: cls for cls in
            (Affine, NormPullback, Corner, Sawtooth, DistanceCoords, BrokenCurve)}


def make_spec(family, opts, n):
    """Builds a MapSpec from a family name and string options"""
    try:
        cls = FAMILIES[family.lower()]
    except KeyError:
        raise ConfigError('unknown map family %r; choose from %s'
                          % (family, ', '.join(sorted(FAMILIES))))
    try:
        spec = cls.from_options(opts, n)
    except (ValueError, AssertionError) as err:
        raise ConfigError('bad parameters for %s: %s' % (family, err))
    if spec.n != n:
        raise ConfigError('%s parameters give n=%d but n=%d was requested'
                          % (family, spec.n, n))
    return spec


class SampledMap(object):
    """A map known on the regular grid (step h) of a cube `domain`, analyzed
       on `root`. values has shape (g,)*n + (width,).
    """
    def __init__(self, root, domain, h, values, backend, spec=None, L_hat=None,
                 seed=0):
        self.root = root
        self.domain = domain
        self.h = float(h)
        self.values = np.asarray(values, dtype=float)
        self.backend = backend
        self.spec = spec
        self.n = root.n
        assert self.values.ndim == self.n + 1
        assert self.values.shape[-1] == backend.width
        self.L_spec = spec.lipschitz if spec is not None else None
        self.L_hat = lipschitz_estimate(self, seed=seed) if L_hat is None \
            else float(L_hat)

    @property
    def nodes_per_axis(self):
        return self.values.shape[0]

    @property
    def margin(self):
        return self.domain.side/self.root.side

    def axis(self):
        return self.domain.lower[0] + self.h*np.arange(self.nodes_per_axis)

    def grid_points(self):
        """All node coordinates, shape (g,)*n + (n,)"""
        axes = [self.domain.lower[i] + self.h*np.arange(self.nodes_per_axis)
                for i in range(self.n)]
        return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)

    def evaluate(self, x):
        """f at points x (..., n): closed form if a spec is attached,
           otherwise the nearest grid node.
        """
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x, tol=1e-9*self.domain.side)):
            raise OutOfDomain('points outside the sampled domain [%s, %s]'
                              % (self.domain.lower, self.domain.upper))
        if self.spec is not None:
            return self.spec.evaluate(x)
        index = np.rint((x - self.domain.lower)/self.h).astype(int)
        index = np.clip(index, 0, self.nodes_per_axis - 1)
        return self.values[tuple(np.moveaxis(index, -1, 0))]

    def distance(self, x, y):
        """dist(f(x), f(y)) for point arrays"""
        return self.backend.distance(self.evaluate(x), self.evaluate(y))

    def as_record(self):
        return {'spec': self.spec.as_record() if self.spec is not None else None,
                'backend': self.backend.as_record(),
                'root_lower': self.root.lower.tolist(),
                'root_side': self.root.side, 'margin': self.margin,
                'h': self.h, 'L_hat': self.L_hat, 'L_spec': self.L_spec}


def default_margin(N):
    """Enlargement covering 7Q, 3Q^N and the beta lines of 3Q^N (inside
       7(3Q^N)) for every cube of the root
    """
    return max(21, 3*2**N)


def sample_map(spec, root, h, margin=None, depth=None, N=2, seed=0):
    """Samples spec on the grid of step h over the margin-enlarged root.
       If depth is given, every analyzed cube side must hold 8 steps.
    """
    if margin is None:
        margin = default_margin(N)
    if spec.n != root.n:
        raise ConfigError('map dimension %d does not match root dimension %d'
                          % (spec.n, root.n))
    domain = dilate(root, margin)
    steps = domain.side/h
    if abs(steps - round(steps)) > 1e-9*steps or round(steps) < 1:
        raise ConfigError('h=%g does not divide the enlarged side %g'
                          % (h, domain.side))
    if depth is not None and root.side*2.0**(-depth) < 8*h*(1 - 1e-12):
        raise ResolutionTooCoarse('h=%g gives fewer than 8 samples per side at '
                                  'depth %d' % (h, depth))
    g = int(round(steps)) + 1
    axes = [domain.lower[i] + h*np.arange(g) for i in range(root.n)]
    points = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    values = spec.evaluate(points)
    log.debug('sampled %s on %d^%d nodes', spec.family, g, root.n)
    return SampledMap(root, domain, h, values, spec.backend, spec=spec, seed=seed)


def lift_map(f):
    """The lifted map x -> (x, f(x)) with the mixed product metric"""
    values = np.concatenate([f.grid_points(), f.values], axis=-1)
    spec = Lifted(f.spec) if f.spec is not None else None
    return SampledMap(f.root, f.domain, f.h, values, LiftedSpace(f.backend, f.n),
                      spec=spec)


def lipschitz_estimate(f, pairs=10000, seed=0):
    """Max of dist/|dx| over adjacent grid nodes and seeded random node pairs"""
    values = f.values
    n = f.n
    g = values.shape[0]
    assert g**n >= 2, 'need at least two grid nodes'
    best = 0.0
    for ax in range(n):
        lo = [slice(None)]*n
        hi = [slice(None)]*n
        lo[ax] = slice(0, g - 1)
        hi[ax] = slice(1, g)
        d = f.backend.distance(values[tuple(hi)], values[tuple(lo)])
        if d.size:
            best = max(best, float(np.max(d))/f.h)
    rng = np.random.default_rng(seed)
    flat = values.reshape(-1, values.shape[-1])
    i = rng.integers(0, flat.shape[0], size=pairs)
    j = rng.integers(0, flat.shape[0], size=pairs)
    keep = i != j
    i, j = i[keep], j[keep]
    if i.size:
        xi = np.stack(np.unravel_index(i, values.shape[:-1]), axis=-1)
        xj = np.stack(np.unravel_index(j, values.shape[:-1]), axis=-1)
        dx = f.h*np.linalg.norm((xi - xj).astype(float), axis=-1)
        ratio = f.backend.distance(flat[i], flat[j])/dx
        best = max(best, float(np.max(ratio)))
    return best


def read_map_csv(path, root, matrix=None):
    """Ingests a raw map: n domain columns, then m value columns (sup norm
       target) or one index column into `matrix` (a DistanceMatrix). The rows
       must form a full regular grid over a cube containing root.
    """
    n = root.n
    with open(path, 'r', newline='') as handle:
        rows = [r for r in csv.reader(handle) if r and not r[0].startswith('#')]
    try:
        float(rows[0][0])
    except (IndexError, ValueError):
        # header row
        rows = rows[1:]
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as err:
        raise ConfigError('%s: bad data row (%s)' % (path, err))
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] <= n:
        raise ConfigError('%s: expected rows of at least %d numbers'
                          % (path, n + 1))
    coords, payload = data[:, :n], data[:, n:]
    if matrix is not None:
        if payload.shape[1] != 1:
            raise ConfigError('expected one index column for a distance matrix')
        backend = matrix
        backend.check(payload)
    else:
        backend = SupNormVectors(payload.shape[1])
    axes = [np.unique(coords[:, i]) for i in range(n)]
    g = axes[0].shape[0]
    if any(a.shape[0] != g for a in axes) or g**n != data.shape[0] or g < 2:
        raise ConfigError('rows of %s do not form a full cubic grid' % path)
    h = axes[0][1] - axes[0][0]
    for a in axes:
        if not np.allclose(np.diff(a), h, rtol=1e-9, atol=0):
            raise ConfigError('grid of %s is not regular' % path)
    lower = np.array([a[0] for a in axes])
    side = h*(g - 1)
    domain = Box(tuple(lower + 0.5*side), 0.5*side)
    if not domain.contains_box(Box(tuple(root.center), 0.5*root.side),
                               tol=1e-9*side):
        raise ConfigError('sampled domain does not cover the root cube')
    index = np.rint((coords - lower)/h).astype(int)
    values = np.zeros((g,)*n + (payload.shape[1],))
    values[tuple(index.T)] = payload
    return SampledMap(root, domain, h, values, backend)


def write_map_csv(f, path):
    """Writes the grid table of f in the format read by read_map_csv"""
    points = f.grid_points().reshape(-1, f.n)
    values = f.values.reshape(-1, f.values.shape[-1])
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(['x%d' % i for i in range(f.n)] +
                        ['v%d' % j for j in range(values.shape[1])])
        for x, v in zip(points, values):
            writer.writerow([repr(float(a)) for a in x] +
                            [repr(float(b)) for b in v])
