"""Linear programming and 1-D convex search helpers"""
import logging

import numpy as np
from scipy.optimize import linprog

log = logging.getLogger(__name__)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
             method='highs'):
    """Thin wrapper on scipy's HiGHS; returns the result, None if infeasible"""
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method=method)
    if res.status == 2:
        return None
    if res.status != 0:
        log.warning('linear program ended with status %d: %s',
                    res.status, res.message)
        if res.x is None:
            return None
    return res


def gauge_lp(points, recession, x):
    """Minkowski functional of co(points) + span(recession) at x:
       min sum(lam) s.t. points^T lam + recession^T mu = x, lam >= 0.
       Returns (value, dual) where dual is a supporting functional at x,
       or (inf, None) when x is not reachable.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    P = np.asarray(points, dtype=float).reshape(-1, n)
    R = np.asarray(recession, dtype=float).reshape(-1, n)
    k, r = P.shape[0], R.shape[0]
    if not np.any(x):
        return 0.0, np.zeros(n)
    c = np.concatenate([np.ones(k), np.zeros(r)])
    A_eq = np.concatenate([P.T, R.T], axis=1)
    bounds = [(0, None)]*k + [(None, None)]*r
    res = solve_lp(c, A_eq=A_eq, b_eq=x, bounds=bounds)
    if res is None:
        return np.inf, None
    return float(res.fun), np.asarray(res.eqlin.marginals, dtype=float)


def minimax_functional(D_all, d_all, D_hit, d_hit, a0=None):
    """Chebyshev fit of one linear functional a:
         min t  s.t.  |<a, D_all[j]>| <= d_all[j] + t   for all j,
                      <a, D_hit[i]>  >= d_hit[i] - t    for the assigned i,
       with D_hit rows already sign-oriented. Returns (a, t) or a0 when the
       program fails.
    """
    D_all = np.asarray(D_all, dtype=float)
    n = D_all.shape[1]
    ones = np.ones((D_all.shape[0], 1))
    blocks = [np.hstack([D_all, -ones]), np.hstack([-D_all, -ones])]
    rhs = [d_all, d_all]
    if len(D_hit):
        D_hit = np.asarray(D_hit, dtype=float)
        blocks.append(np.hstack([-D_hit, -np.ones((D_hit.shape[0], 1))]))
        rhs.append(-np.asarray(d_hit, dtype=float))
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = solve_lp(c, A_ub=np.vstack(blocks), b_ub=np.concatenate(rhs),
                   bounds=[(None, None)]*n + [(0, None)])
    if res is None:
        return a0, np.inf
    return res.x[:n], float(res.x[-1])


def ternary_minimize(func, lo, hi, tol=1e-6):
    """Minimizes a convex function on [lo, hi]; returns (argmin, value)"""
    while hi - lo > tol:
        m1 = lo + (hi - lo)/3.0
        m2 = hi - (hi - lo)/3.0
        if func(m1) <= func(m2):
            hi = m2
        else:
            lo = m1
    best = min((func(t), t) for t in (lo, 0.5*(lo + hi), hi))
    return best[1], best[0]
