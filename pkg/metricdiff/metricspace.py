"""Metric backends for the target space.

Points are numpy arrays whose last axis is the backend payload (width):
sup-norm vectors, a single index into a distance matrix, a vector of the
normed plane, or a lifted pair (u, v) stored as u followed by v. Every
distance routine is vectorized over the leading axes.
"""
import logging

import numpy as np
from scipy.sparse.csgraph import shortest_path

from metricdiff.errors import BackendMismatch, InvalidMetric

log = logging.getLogger(__name__)


class MetricBackend(object):
    """Base class: subclasses set `width` and implement `_distance`"""
    name = 'abstract'
    width = 0

    def check(self, p):
        """Returns p as a float array after checking it belongs here"""
        p = np.asarray(p, dtype=float)
        if p.ndim == 0 or p.shape[-1] != self.width:
            raise BackendMismatch('%s expects payload width %d, got shape %s'
                                  % (self.name, self.width, p.shape))
        return p

    def distance(self, p, q):
        return self._distance(self.check(p), self.check(q))

    def as_record(self):
        return {'backend': self.name, 'width': self.width}


class SupNormVectors(MetricBackend):
    """R^m with the sup norm; stands in for l-infinity"""
    name = 'supnorm'

    def __init__(self, m):
        assert m >= 1
        self.width = int(m)

    def _distance(self, p, q):
        return np.max(np.abs(p - q), axis=-1)


class DistanceMatrix(MetricBackend):
    """Finite metric space given by its distance matrix; points are indices"""
    name = 'matrix'
    width = 1

    def __init__(self, D, validate=True, tol=1e-12):
        D = np.array(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise InvalidMetric('distance matrix must be square, got %s'
                                % (D.shape,))
        if validate:
            check_metric(D, tol)
        self.D = D
        self.D.flags.writeable = False

    @property
    def size(self):
        return self.D.shape[0]

    def check(self, p):
        p = super().check(p)
        idx = p[..., 0]
        if np.any(idx != np.round(idx)) or np.any(idx < 0) or \
           np.any(idx >= self.size):
            raise BackendMismatch('indices must be integers in [0, %d)'
                                  % self.size)
        return p

    def _distance(self, p, q):
        return self.D[p[..., 0].astype(int), q[..., 0].astype(int)]

    def as_record(self):
        record = super().as_record()
        record['size'] = self.size
        return record


class NormedPlane(MetricBackend):
    """R^n with distance gauge(p - q) for a seminorm gauge"""
    name = 'normed'

    def __init__(self, gauge):
        self.gauge = gauge
        self.width = gauge.n

    def _distance(self, p, q):
        return self.gauge.value(p - q)

    def as_record(self):
        record = super().as_record()
        record['gauge'] = self.gauge.as_record()
        return record


class LiftedSpace(MetricBackend):
    """R^n x inner with distance sqrt(|u1-u2|_2^2 + d(v1,v2)^2)"""
    name = 'lifted'

    def __init__(self, inner, n):
        self.inner = inner
        self.n = int(n)
        self.width = self.n + inner.width

    def split(self, p):
        return p[..., :self.n], p[..., self.n:]

    def _distance(self, p, q):
        u1, v1 = self.split(p)
        u2, v2 = self.split(q)
        du = np.linalg.norm(u1 - u2, axis=-1)
        dv = self.inner._distance(v1, v2)
        return np.sqrt(du*du + dv*dv)

    def as_record(self):
        record = super().as_record()
        record['n'] = self.n
        record['inner'] = self.inner.as_record()
        return record


def distance(backend, p, q):
    """Distance between (arrays of) points of a backend"""
    return backend.distance(p, q)


def check_metric(D, tol=1e-12):
    """Raises InvalidMetric naming a violating triple if D is not a metric"""
    D = np.asarray(D, dtype=float)
    scale = max(1.0, float(np.max(np.abs(D)))) if D.size else 1.0
    if np.any(D < 0):
        i, j = np.argwhere(D < 0)[0]
        raise InvalidMetric('negative distance at (%d,%d)' % (i, j), (i, j, j))
    if np.any(np.abs(np.diag(D)) > tol*scale):
        i = int(np.argmax(np.abs(np.diag(D))))
        raise InvalidMetric('nonzero diagonal at %d' % i, (i, i, i))
    if np.any(np.abs(D - D.T) > tol*scale):
        i, j = np.argwhere(np.abs(D - D.T) > tol*scale)[0]
        raise InvalidMetric('asymmetric at (%d,%d)' % (i, j), (i, j, i))
    # D[i,k] <= D[i,j] + D[j,k] for all triples
    excess = D[:, None, :] - D[:, :, None] - D[None, :, :]
    if np.any(excess > tol*scale):
        i, j, k = (int(a) for a in np.argwhere(excess > tol*scale)[0])
        raise InvalidMetric('triangle inequality fails: d(%d,%d) > d(%d,%d) + '
                            'd(%d,%d)' % (i, k, i, j, j, k), (i, j, k))


def kuratowski_embed(D):
    """Isometric embedding of a finite metric space into sup-norm vectors.
       Point i goes to (D[i,k] - D[0,k])_k. Returns (backend, points).
    """
    if isinstance(D, DistanceMatrix):
        D = D.D
    else:
        D = np.asarray(D, dtype=float)
        check_metric(D)
    points = D - D[0][None, :]
    return SupNormVectors(D.shape[0]), points


def load_distance_matrix(path):
    """Reads a DistanceMatrix from text: the size, then the strict upper
       triangle in row-major order, whitespace separated.
    """
    with open(path, 'r') as handle:
        tokens = handle.read().split()
    if not tokens:
        raise InvalidMetric('empty distance matrix file %s' % path)
    size = int(tokens[0])
    values = [float(t) for t in tokens[1:]]
    if len(values) != size*(size - 1)//2:
        raise InvalidMetric('expected %d upper triangle entries, found %d'
                            % (size*(size - 1)//2, len(values)))
    D = np.zeros((size, size))
    D[np.triu_indices(size, 1)] = values
    D += D.T
    return DistanceMatrix(D)


def save_distance_matrix(backend, path):
    """Writes a DistanceMatrix in the format read by load_distance_matrix"""
    D = backend.D
    with open(path, 'w') as handle:
        print(D.shape[0], file=handle)
        for i in range(D.shape[0] - 1):
            print(' '.join(repr(float(x)) for x in D[i, i + 1:]), file=handle)


def triangle_excess(backend, x, y, z):
    """d(x,z) - d(x,y) - d(y,z); nonpositive for a metric"""
    return backend.distance(x, z) - backend.distance(x, y) - \
        backend.distance(y, z)


def pairwise(backend, points):
    """Matrix of distances between all rows of points (k, width)"""
    points = backend.check(points)
    return backend.distance(points[:, None, :], points[None, :, :])


def shortest_path_closure(W):
    """Shortest-path closure of a symmetric positive weight matrix; yields a
       metric. Diagonal entries are ignored.
    """
    W = np.array(W, dtype=float)
    np.fill_diagonal(W, 0.0)
    return shortest_path(W, method='D', directed=False)

