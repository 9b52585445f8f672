"""Metric defect and beta numbers.

The defect of a triple measures how far f(x), f(y), f(z) are from lying on a
geodesic. beta_segment averages it over the ordered triples of a segment;
beta_cube averages segment betas over the lines meeting 7Q. For n = 1 the
rotation average collapses and beta_cube is the segment beta of 7Q.
"""
import dataclasses
import functools
import itertools
import logging

import numpy as np
from scipy.special import gamma

from metricdiff.dyadic import (DyadicCube, as_box, clamped_ancestor, cube_key,
                               dilate, enumerate_cubes)
from metricdiff.errors import DegenerateSegment, InsufficientCoverage
from metricdiff.params import QuadratureSpec
from metricdiff.utils.parallel import pmap, task_rng

log = logging.getLogger(__name__)

# defects below this fraction of d(x,y)+d(y,z) are rounding noise
DEFECT_RTOL = 1e-11


@dataclasses.dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'a', np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, 'b', np.atleast_1d(np.asarray(self.b, dtype=float)))
        if not self.diam > 0:
            raise DegenerateSegment('segment endpoints coincide: %s' % self.a)

    @property
    def diam(self):
        return float(np.linalg.norm(self.b - self.a))

    def reversed(self):
        return Segment(self.b, self.a)


def defect(f, x, y, z):
    """d(f(x),f(y)) + d(f(y),f(z)) - d(f(x),f(z)), vectorized over triples"""
    return f.distance(x, y) + f.distance(y, z) - f.distance(x, z)


@functools.lru_cache(maxsize=8)
def ordered_triples(m):
    """Index arrays (i, j, k) of all i < j < k < m"""
    idx = np.array(list(itertools.combinations(range(m), 3)), dtype=np.intp)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def beta_segment(f, S, q=None):
    """Routine to compute beta_f(S): midpoint rule with q.m nodes per axis on
       the ordered simplex a <= x <= y <= z <= b, beta = sqrt(integral/diam^4).
    """
    q = q or QuadratureSpec()
    m = q.m
    diam = S.diam
    h = diam/m
    t = (np.arange(m) + 0.5)/m
    points = S.a + t[:, None]*(S.b - S.a)
    values = f.evaluate(points)
    D = f.backend.distance(values[:, None, :], values[None, :, :])
    i, j, k = ordered_triples(m)
    dxy = D[i, j]
    dyz = D[j, k]
    excess = dxy + dyz - D[i, k]
    excess[excess <= DEFECT_RTOL*(dxy + dyz)] = 0.0
    integral = float(np.sum(excess))*h**3
    return float(np.sqrt(integral/diam**4))


def ball_volume(dim, radius):
    """Lebesgue measure of the dim-dimensional ball"""
    return np.pi**(dim/2.0)*radius**dim/gamma(dim/2.0 + 1.0)


def sample_lines(rng, n, count, center, radius):
    """Unit directions on a hemisphere and offsets uniform in the
       (n-1)-ball of the given radius orthogonal to each direction.
    """
    u = rng.standard_normal((count, n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    u[u[:, 0] < 0] *= -1
    w = rng.standard_normal((count, n))
    w -= np.sum(w*u, axis=1)[:, None]*u
    w /= np.linalg.norm(w, axis=1)[:, None]
    r = radius*rng.random(count)**(1.0/(n - 1))
    return u, np.asarray(center) + r[:, None]*w


def chord(box, p, u):
    """Parameter interval [t0, t1] of {p + t u} inside box; t1 < t0 if empty"""
    lower, upper = box.lower, box.upper
    t0, t1 = -np.inf, np.inf
    for i in range(box.n):
        if abs(u[i]) < 1e-15:
            if p[i] < lower[i] or p[i] > upper[i]:
                return 0.0, -1.0
            continue
        a = (lower[i] - p[i])/u[i]
        b = (upper[i] - p[i])/u[i]
        t0 = max(t0, min(a, b))
        t1 = min(t1, max(a, b))
    return t0, t1


def beta_cube(f, Q, q=None, key=None, full_output=False):
    """Routine to compute beta^(n)_f(Q) over lines meeting 7Q.
       Q: DyadicCube or Box; key: integer tuple for the line sampler's seed
       stream (defaults to the cube key of a DyadicCube).
       With full_output, returns (beta, stderr of beta^2, lines that passed).
    """
    q = q or QuadratureSpec()
    box = as_box(Q)
    side = box.side
    big = dilate(box, 7)
    n = box.n
    if n == 1:
        beta = beta_segment(f, Segment(big.lower, big.upper), q)
        return (beta, 0.0, 1) if full_output else beta

    if key is None:
        key = cube_key(Q) if isinstance(Q, DyadicCube) else (0,)
    rng = task_rng(q.seed, key)
    radius = big.half_side*np.sqrt(n)
    directions, offsets = sample_lines(rng, n, q.mc_lines, big.center, radius)
    samples = np.zeros(q.mc_lines)
    passed = 0
    for line, (u, p) in enumerate(zip(directions, offsets)):
        t0, t1 = chord(big, p, u)
        if t1 - t0 < side:
            continue
        passed += 1
        b = beta_segment(f, Segment(p + t0*u, p + t1*u), q)
        samples[line] = b*b
    if passed == 0:
        raise InsufficientCoverage('no sampled line meets 7Q in a chord of '
                                   'length side(Q)')
    scale = ball_volume(n - 1, radius)/side**(n - 1)
    beta2 = scale*float(np.mean(samples))
    stderr = scale*float(np.std(samples))/np.sqrt(q.mc_lines)
    log.debug('beta_cube: %d of %d lines passed, beta^2=%.3e +- %.1e',
              passed, q.mc_lines, beta2, stderr)
    beta = float(np.sqrt(beta2))
    return (beta, stderr, passed) if full_output else beta


def _ancestor_beta(f, q, cube):
    return beta_cube(f, dilate(cube, 3), q, key=cube_key(cube))


@dataclasses.dataclass
class BetaReport:
    total: float
    per_level: list
    L_hat: float
    clamped_count: int
    seed: int
    N: int
    depth: int

    @property
    def ratio(self):
        if self.L_hat > 0:
            return self.total/self.L_hat
        return 0.0

    def as_record(self):
        record = dataclasses.asdict(self)
        record['ratio'] = self.ratio
        return record


def carleson_beta_sum(f, R, depth, N=2, q=None, workers=1, betas=None):
    """Routine to accumulate sum_Q beta_f(3Q^N)^2 vol(Q) over the dyadic
       subcubes of R down to `depth`. Ancestors above the grid root are
       clamped to it. Each distinct ancestor is evaluated once.
       betas: optional dict cube -> beta, filled with the ancestor betas.
    """
    q = q or QuadratureSpec()
    cubes = enumerate_cubes(R, depth)
    ancestors = []
    clamped_count = 0
    for Q in cubes:
        QN, clamped = clamped_ancestor(Q, N)
        clamped_count += clamped
        ancestors.append(QN)
    unique = list(dict.fromkeys(ancestors))
    log.info('beta sum: %d cubes, %d distinct ancestors, %d clamped',
             len(cubes), len(unique), clamped_count)
    values = pmap(functools.partial(_ancestor_beta, f, q), unique, workers)
    beta_of = dict(zip(unique, values))
    if betas is not None:
        betas.update(beta_of)

    per_level = {}
    for Q, QN in zip(cubes, ancestors):
        entry = per_level.setdefault(Q.level, {'level': Q.level, 'sum': 0.0,
                                               'cubes': 0})
        entry['sum'] += beta_of[QN]**2*Q.volume
        entry['cubes'] += 1
    levels = [per_level[j] for j in sorted(per_level)]
    total = float(sum(entry['sum'] for entry in levels))
    return BetaReport(total, levels, f.L_hat, clamped_count, q.seed, N, depth)
