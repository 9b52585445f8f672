"""Slow pure-python versions of the numerical routines, used to check the
vectorized and LP based code on small inputs.
"""
import itertools

import numpy as np


def defect(f, x, y, z):
    ''' Metric defect d(x,y) + d(y,z) - d(x,z) of a single triple, from three
        separate evaluations of f.
    '''
    fx, fy, fz = (f.evaluate(np.atleast_1d(p)) for p in (x, y, z))
    d = f.backend.distance
    return float(d(fx, fy)) + float(d(fy, fz)) - float(d(fx, fz))


def beta_segment(f, a, b, m):
    ''' beta of the segment [a, b] by explicit loops over the midpoint nodes
        i < j < k. No rounding clamp: affine maps give O(eps) values.
    '''
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    diam = np.linalg.norm(b - a)
    h = diam/m
    nodes = [a + (i + 0.5)/m*(b - a) for i in range(m)]
    values = [f.evaluate(p) for p in nodes]
    d = f.backend.distance
    total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                total += float(d(values[i], values[j])) + \
                    float(d(values[j], values[k])) - \
                    float(d(values[i], values[k]))
    return np.sqrt(max(total, 0.0)*h**3/diam**4)


def sigma(f, x, y, t0, t1, gap, M):
    ''' min of d(f(p), f(q))/|p-q| over pairs of M points equispaced on the
        chord x + t(y-x)/|y-x|, t in [t0, t1], with |p-q| >= gap.
    '''
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    u = (y - x)/np.linalg.norm(y - x)
    ts = [t0 + (t1 - t0)*i/(M - 1) for i in range(M)]
    best = np.inf
    for s, t in itertools.combinations(ts, 2):
        if abs(t - s) < gap:
            continue
        ratio = float(f.distance(x + s*u, x + t*u))/abs(t - s)
        best = min(best, ratio)
    return best


def gauge_bruteforce(points, recession, x):
    ''' Minkowski functional of co(points) + span(recession) at x by
        enumerating cones over n generators: an optimal combination needs at
        most n of them. Recession generators (both signs) cost nothing.
    '''
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if not np.any(x):
        return 0.0
    gens = [(np.asarray(p, dtype=float), 1.0) for p in points]
    for r in recession:
        r = np.asarray(r, dtype=float)
        gens += [(r, 0.0), (-r, 0.0)]
    best = np.inf
    for k in range(1, n + 1):
        for subset in itertools.combinations(gens, k):
            G = np.array([g for g, _ in subset]).T
            cost = np.array([c for _, c in subset])
            lam, _, rank, _ = np.linalg.lstsq(G, x, rcond=None)
            if rank < k or np.linalg.norm(G @ lam - x) > 1e-9*max(1.0, np.abs(x).max()):
                continue
            if np.all(lam >= -1e-12):
                best = min(best, float(cost @ lam))
    return best


def md_scan_1d(f, a, b, grid, cs):
    ''' md of [a, b] for n = 1 by scanning the slopes cs over all pairs of a
        regular grid; returns (value, best slope).
    '''
    xs = [a + (b - a)*i/(grid - 1) for i in range(grid)]
    vals = [f.evaluate(np.array([x])) for x in xs]
    best = (np.inf, None)
    for c in cs:
        worst = 0.0
        for i, j in itertools.combinations(range(grid), 2):
            dev = abs(float(f.backend.distance(vals[i], vals[j])) -
                      c*abs(xs[j] - xs[i]))
            worst = max(worst, dev)
        best = min(best, (worst/(b - a), c))
    return best


def lipschitz(f, points):
    ''' max of d(f(x), f(y))/|x - y| over all pairs of the given points '''
    best = 0.0
    for x, y in itertools.combinations(points, 2):
        x, y = np.atleast_1d(x), np.atleast_1d(y)
        best = max(best, float(f.distance(x, y))/np.linalg.norm(x - y))
    return best
