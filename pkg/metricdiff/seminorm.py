"""Seminorms, homogeneity ratios and the metric-differentiability quantity md.

A seminorm is stored as a finite family of linear functionals a_k and
evaluated as max_k |<a_k, x>|. Two ways of producing one for a cube Q:

  construct_seminorm  radial profile r(u) = 1/sigma(u) around the center of
                      Q, closed symmetric convex hull of the profile points
                      (directions with sigma ~ 0 are recession directions),
                      supporting functionals of that hull.
  fit_seminorm        alternating minimax fit of K functionals to sampled
                      (displacement, distance) pairs.

md_estimate takes the best of these and the zero seminorm on a fixed pair
sample; md_exact_1d solves the one-dimensional problem c|.| exactly.
"""
import dataclasses
import logging
import warnings

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import qmc

from metricdiff.beta import chord
from metricdiff.dyadic import (Box, DyadicCube, as_box, clamped_ancestor,
                               cube_key, dilate)
from metricdiff.errors import (EmptyBodyWarning, InsufficientPairs,
                               PointsTooClose, ShortChord)
from metricdiff.params import AnalysisParams
from metricdiff.utils.lp import (gauge_lp, minimax_functional, solve_lp,
                                 ternary_minimize)
from metricdiff.utils.parallel import task_rng

log = logging.getLogger(__name__)


class PolyhedralSeminorm(object):
    """x -> max_k |<a_k, x>| for functionals a_k (rows of a (K, n) array)"""

    def __init__(self, functionals):
        functionals = np.atleast_2d(np.asarray(functionals, dtype=float))
        assert functionals.ndim == 2 and functionals.shape[0] >= 1
        self.functionals = functionals

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((1, n)))

    @classmethod
    def l1(cls, n):
        """The l1 norm: all sign vectors with a leading +1"""
        signs = np.array(np.meshgrid(*[[1.0, -1.0]]*(n - 1), indexing='ij'))
        signs = signs.reshape(n - 1, -1).T if n > 1 else np.zeros((1, 0))
        return cls(np.hstack([np.ones((signs.shape[0], 1)), signs]))

    @property
    def n(self):
        return self.functionals.shape[1]

    @property
    def K(self):
        return self.functionals.shape[0]

    @property
    def is_zero(self):
        return not np.any(self.functionals)

    def value(self, x):
        """Vectorized over the leading axes of x (..., n)"""
        x = np.asarray(x, dtype=float)
        return np.max(np.abs(x @ self.functionals.T), axis=-1)

    def residual(self, D, d):
        """sup_j | value(D_j) - d_j |"""
        if len(d) == 0:
            return 0.0
        return float(np.max(np.abs(self.value(D) - d)))

    def as_record(self):
        return {'K': self.K, 'functionals': self.functionals.tolist()}

    def __repr__(self):
        return 'PolyhedralSeminorm(K=%d, n=%d)' % (self.K, self.n)


@dataclasses.dataclass(frozen=True, eq=False)
class StarProfile:
    """Directions u_i (antipodally paired), sigma(u_i), radii 1/sigma(u_i)
       (inf on degenerate directions). Lengths are in units where the gauge
       of the hull approximates the sigma ratio.
    """
    directions: np.ndarray
    sigmas: np.ndarray
    radii: np.ndarray

    @property
    def n(self):
        return self.directions.shape[1]

    @property
    def finite(self):
        return np.isfinite(self.radii)

    def hull_points(self):
        """Profile points r_i u_i and their mirrors, finite radii only"""
        P = self.radii[self.finite, None]*self.directions[self.finite]
        return np.vstack([P, -P])

    def recession(self):
        return self.directions[~self.finite]

    def as_record(self):
        return {'directions': self.directions.tolist(),
                'radii': [None if not np.isfinite(r) else float(r)
                          for r in self.radii]}


def chord_box(Q, p):
    """Region 3Q^N holding the lines of sigma: the clamped dyadic ancestor for
       a cube, the box itself for a Box.
    """
    if isinstance(Q, DyadicCube):
        QN, _ = clamped_ancestor(Q, p.N)
        return dilate(QN, 3)
    return dilate(Q, 3)


def sigma(f, Q, x, y, p, chord_points=None):
    """Routine to compute sigma(x, y): the minimum of d(f(x'),f(y'))/|x'-y'|
       over pairs of chord_points equispaced points on the line through x and
       y inside 3Q^N, at separation >= alpha side(Q).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    side = as_box(Q).side
    gap = p.alpha*side*(1 - 1e-12)
    sep = float(np.linalg.norm(y - x))
    if sep < gap:
        raise PointsTooClose('|x-y|=%g below alpha side(Q)=%g'
                             % (sep, p.alpha*side))
    u = (y - x)/sep
    t0, t1 = chord(chord_box(Q, p), x, u)
    if t1 - t0 < gap:
        raise ShortChord('chord of length %g inside 3Q^N is shorter than '
                         'alpha side(Q)=%g' % (max(t1 - t0, 0.0), p.alpha*side))
    M = chord_points or p.chord_points
    t = np.linspace(t0, t1, M)
    values = f.evaluate(x + t[:, None]*u)
    dist = f.backend.distance(values[:, None, :], values[None, :, :])
    length = np.abs(t[:, None] - t[None, :])
    mask = length >= gap
    return float(np.min(dist[mask]/length[mask]))


def profile_directions(n, count, seed=0):
    """count unit vectors closed under u -> -u; the first half is a
       hemisphere, the second half its mirror. Axes are included.
    """
    half = count//2
    if n == 1:
        H = np.ones((1, 1))
    elif n == 2:
        angles = np.pi*np.arange(half)/half
        H = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        rng = task_rng(seed, (n, count))
        extra = rng.standard_normal((max(half - n, 0), n))
        extra /= np.linalg.norm(extra, axis=1)[:, None]
        H = np.vstack([np.eye(n), extra])
        H[H[:, 0] < 0] *= -1
    return np.vstack([H, -H])


def build_star_profile(f, Q, p):
    """Routine to compute the radial profile of Q: sigma along the rays from
       the center x_Q through x_Q + u side/2, radius 1/sigma, infinite below
       sigma_floor L_hat.
    """
    box = as_box(Q)
    center = np.asarray(box.center, dtype=float)
    U = profile_directions(box.n, p.directions, p.seed)
    half = U.shape[0]//2
    s = np.array([sigma(f, Q, center, center + 0.5*box.side*u, p) for u in U])
    # u and -u span the same line
    s = 0.5*(s[:half] + s[half:])
    s = np.concatenate([s, s])
    radii = np.full(s.shape, np.inf)
    finite = s > p.sigma_floor*f.L_hat
    radii[finite] = 1.0/s[finite]
    return StarProfile(U, s, radii)


def gauge_of_hull(S, x):
    """Routine to evaluate the Minkowski functional at x of the closed
       symmetric hull of the profile points plus the span of the recession
       directions. All radii infinite: warns EmptyBodyWarning, returns 0.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.any(S.finite):
        warnings.warn('every profile radius is infinite; gauge is zero',
                      EmptyBodyWarning)
        return 0.0
    value, _ = gauge_lp(S.hull_points(), S.recession(), x)
    return value


def caratheodory_membership(points, x, tol=1e-9):
    """Routine to write x as a convex combination of at most n+1 of points.
       Returns (chosen points, weights) or None if x is not in the hull.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, n = P.shape
    A_eq = np.vstack([P.T, np.ones((1, k))])
    b_eq = np.concatenate([x, [1.0]])
    res = solve_lp(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)]*k,
                   method='highs-ds')
    if res is None:
        return None
    lam = np.where(res.x > 1e-14, res.x, 0.0)
    support = np.flatnonzero(lam)
    # affine dependencies shrink the support to n+1 points
    while support.size > n + 1:
        M = np.vstack([P[support].T, np.ones((1, support.size))])
        _, _, vt = np.linalg.svd(M)
        mu = vt[-1]
        if not np.any(mu > 0):
            mu = -mu
        pos = mu > 0
        step = np.min(lam[support][pos]/mu[pos])
        lam[support] = lam[support] - step*mu
        lam[support[np.argmin(np.where(pos, lam[support], np.inf))]] = 0.0
        lam[lam < 1e-14] = 0.0
        support = np.flatnonzero(lam)
    weights = lam[support]/np.sum(lam[support])
    if np.linalg.norm(weights @ P[support] - x) > tol*max(1.0, np.abs(P).max()):
        return None
    return P[support], weights


def _unique_functionals(A, tol=1e-7):
    """Drops zero rows and duplicates up to sign"""
    kept = []
    for a in A:
        scale = np.max(np.abs(a))
        if scale <= tol:
            continue
        lead = a[np.argmax(np.abs(a) > tol*scale)]
        a = a*np.sign(lead)
        if not any(np.max(np.abs(a - b)) <= tol*max(scale, 1.0) for b in kept):
            kept.append(a)
    return kept


def hull_functionals(Y, tol=1e-9):
    """Facet functionals a with gauge(y) = max |<a, y>| for the symmetric
       hull of the rows of Y, which must span their space. Also returns, for
       each functional, the number of rows of Y it supports.
    """
    s = Y.shape[1]
    if s == 1:
        ymax = np.max(np.abs(Y))
        return np.array([[1.0/ymax]]), np.array([Y.shape[0]])
    pts = np.vstack([Y, -Y])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options='QJ')
    eq = hull.equations
    A = eq[:, :-1]/(-eq[:, -1])[:, None]
    A = np.array(_unique_functionals(A))
    support = np.sum(np.abs(Y @ A.T) >= 1 - 1e-6, axis=0)
    return A, support


def construct_seminorm(f, Q, p, profile=None):
    """Routine to build the seminorm of the profile hull. For n <= 3 the
       supporting functionals are the hull facets (exact); beyond that they
       are the LP duals at the profile directions.
    """
    S = profile if profile is not None else build_star_profile(f, Q, p)
    n = S.n
    if not np.any(S.finite):
        log.debug('empty profile body; zero seminorm')
        return PolyhedralSeminorm.zero(n)
    P = S.hull_points()
    R = S.recession()
    if n > 3:
        duals = [gauge_lp(P, R, u)[1] for u in S.directions[:S.directions.shape[0]//2]]
        kept = _unique_functionals(np.array([y for y in duals if y is not None]))
        return PolyhedralSeminorm(kept) if kept else PolyhedralSeminorm.zero(n)
    # complement of the recession span, then the span of the points
    W = np.eye(n)
    if R.shape[0]:
        _, sv, vt = np.linalg.svd(R)
        rank = int(np.sum(sv > 1e-9*sv[0]))
        W = vt[rank:].T
    if W.shape[1] == 0:
        return PolyhedralSeminorm.zero(n)
    C = P @ W
    _, sv, vt = np.linalg.svd(C, full_matrices=False)
    rank = int(np.sum(sv > 1e-9*max(sv[0], 1e-300)))
    if rank == 0:
        return PolyhedralSeminorm.zero(n)
    B = W @ vt[:rank].T
    A, _ = hull_functionals(P @ B)
    return PolyhedralSeminorm(A @ B.T)


def _hull_start(D, d, K):
    """Top K facet functionals of the hull of D_i/d_i, by supported points"""
    keep = d > 1e-12*np.max(d)
    Z = D[keep]/d[keep, None]
    n = D.shape[1]
    if n > 3 or Z.shape[0] < n + 1:
        return None
    _, sv, _ = np.linalg.svd(Z, full_matrices=False)
    if np.sum(sv > 1e-9*sv[0]) < n:
        return None
    A, support = hull_functionals(Z)
    order = np.argsort(-support, kind='stable')
    return A[order[:K]]


def _alternate(D, d, A, iterations):
    """Alternating minimax fit from A; returns (A, objective)"""
    def objective(A):
        return float(np.max(np.abs(np.max(np.abs(D @ A.T), axis=1) - d)))

    best = objective(A)
    for it in range(iterations):
        proj = D @ A.T
        owner = np.argmax(np.abs(proj), axis=1)
        sign = np.where(proj[np.arange(D.shape[0]), owner] < 0, -1.0, 1.0)
        new = A.copy()
        for k in range(A.shape[0]):
            hit = owner == k
            a, _ = minimax_functional(D, d, sign[hit, None]*D[hit], d[hit],
                                      a0=A[k])
            new[k] = a
        value = objective(new)
        if value > best:
            break
        improved = best - value
        A, best = new, value
        if improved <= 1e-12*max(1.0, best):
            break
    return A, best


def fit_seminorm(pairs, K, p, starts=(), full_output=False):
    """Routine to fit max_k |<a_k, .>| (K functionals) to pairs (D, d) of
       displacements and distances, minimizing the sup residual.
       Starts: facets of the hull of D/d, the given seminorms, random
       functionals, zero. n = 1 is solved exactly by ternary search.
    """
    D, d = pairs
    D = np.atleast_2d(np.asarray(D, dtype=float))
    d = np.asarray(d, dtype=float)
    n = D.shape[1]
    if D.shape[0] < K*(n + 1):
        raise InsufficientPairs('%d pairs cannot fit %d functionals in R^%d'
                                % (D.shape[0], K, n))
    if not np.any(d > 0):
        result = PolyhedralSeminorm.zero(n)
        return (result, 0.0) if full_output else result

    rng = task_rng(p.seed, (K, n, D.shape[0]))
    if D.shape[0] > p.fit_pairs:
        chosen = np.sort(rng.choice(D.shape[0], p.fit_pairs, replace=False))
        Dfit, dfit = D[chosen], d[chosen]
    else:
        Dfit, dfit = D, d

    if n == 1:
        lengths = np.abs(D[:, 0])
        top = float(np.max(d/np.where(lengths > 0, lengths, np.inf)))
        c, _ = ternary_minimize(
            lambda c: float(np.max(np.abs(c*lengths - d))),
            0.0, top*(1 + 1e-9) + 1e-12)
        result = PolyhedralSeminorm([[c]])
        return (result, result.residual(D, d)) if full_output else result

    candidates = []
    hull = _hull_start(Dfit, dfit, K)
    if hull is not None:
        candidates.append(hull)
    candidates.extend(s.functionals for s in starts)
    for _ in range(p.fit_restarts):
        A = rng.standard_normal((K, n))
        scale = np.median(np.max(np.abs(Dfit @ A.T), axis=1))
        candidates.append(A*np.median(dfit)/max(scale, 1e-300))
    candidates.append(np.zeros((K, n)))

    # residuals at rounding level end the search
    exact = 1e-12*max(1.0, float(np.max(d)))
    best, best_value = None, np.inf
    for tried, A in enumerate(candidates, 1):
        if PolyhedralSeminorm(A).residual(D, d) > exact:
            A, _ = _alternate(Dfit, dfit, A, p.fit_iterations)
        value = PolyhedralSeminorm(A).residual(D, d)
        if value < best_value:
            best, best_value = A, value
        if best_value <= exact:
            break
    log.debug('fit_seminorm: %d of %d starts, residual %.3e', tried,
              len(candidates), best_value)
    result = PolyhedralSeminorm(best)
    return (result, best_value) if full_output else result


def pair_sample(f, Q, p):
    """Displacements and distances for all pairs of a fixed point set of Q:
       the regular grid with p.grid_points per axis plus p.pairs scrambled
       Halton points. Returns (D, d).
    """
    box = as_box(Q)
    n = box.n
    axes = [np.linspace(box.lower[i], box.upper[i], p.grid_points)
            for i in range(n)]
    X = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, n)
    if p.pairs:
        halton = qmc.Halton(d=n, scramble=True, seed=p.seed).random(p.pairs)
        X = np.vstack([X, box.lower + box.side*halton])
    V = f.evaluate(X)
    i, j = np.triu_indices(X.shape[0], 1)
    return X[j] - X[i], f.backend.distance(V[i], V[j])


def md_estimate(f, Q, candidates=(), p=None, full_output=False):
    """Routine to estimate md(Q): min over candidate seminorms of the sup
       over the pair sample of |d(f(x),f(y)) - ||x-y|||, over side(Q).
       Candidates always include the constructed seminorm, the fitted one
       and zero. Returns (value, seminorm), plus the per-candidate residuals
       with full_output.
    """
    p = p or AnalysisParams(n=as_box(Q).n)
    box = as_box(Q)
    D, d = pair_sample(f, Q, p)
    tol = 1e-12*max(f.L_hat, 1.0)*box.side

    pool = [('given%d' % i, s) for i, s in enumerate(candidates)]
    built = construct_seminorm(f, Q, p)
    pool.append(('construct', built))
    if built.residual(D, d) > tol:
        pool.append(('fit', fit_seminorm((D, d), p.fit_terms, p,
                                         starts=[built])))
    else:
        log.debug('constructed seminorm is exact on %s; fit skipped', Q)
    pool.append(('zero', PolyhedralSeminorm.zero(box.n)))

    residuals = {name: s.residual(D, d)/box.side for name, s in pool}
    name = min(residuals, key=lambda k: (residuals[k], k))
    best = dict(pool)[name]
    if full_output:
        return residuals[name], best, residuals
    return residuals[name], best


def md_exact_1d(f, Q, grid=257, full_output=False):
    """Routine to compute md on an interval exactly (n = 1): minimizes the
       convex c -> max over grid pairs of |d(f(x),f(y)) - c|x-y|| by ternary
       search on [0, L_hat]. Q: cube, Box or (a, b).
    """
    if isinstance(Q, tuple):
        a, b = float(Q[0]), float(Q[1])
        Q = Box((0.5*(a + b),), 0.5*(b - a))
    box = as_box(Q)
    assert box.n == 1, 'md_exact_1d needs n = 1'
    x = np.linspace(box.lower[0], box.upper[0], grid)[:, None]
    V = f.evaluate(x)
    i, j = np.triu_indices(grid, 1)
    length = x[j, 0] - x[i, 0]
    d = f.backend.distance(V[i], V[j])
    c, value = ternary_minimize(lambda c: float(np.max(np.abs(d - c*length))),
                                0.0, f.L_hat*(1 + 1e-9) + 1e-12, tol=1e-6)
    value /= box.side
    return (value, c) if full_output else value


def hull_sandwich(f, Q, p, profile=None):
    """Per direction: sigma(u), the hull gauge at u and the bounds
       (1 - alpha') sigma(u) <= gauge(u) <= sigma(u).
    """
    S = profile if profile is not None else build_star_profile(f, Q, p)
    gauge = np.array([gauge_of_hull(S, u) for u in S.directions])
    return {'directions': S.directions, 'sigma': S.sigmas, 'gauge': gauge,
            'lower': (1.0 - p.alpha_prime)*S.sigmas, 'upper': S.sigmas}


def _admissible_pair(rng, box, gap):
    while True:
        x, y = box.lower + box.side*rng.random((2, box.n))
        if np.linalg.norm(x - y) >= gap:
            return x, y


def lemma_diagnostics(f, Q, p, samples=64):
    """Maxima over sampled admissible pairs in Q and shifts z in Q - x_Q of
         homogeneity gap   | d(f(x),f(y))/|x-y| - sigma(x,y) |
         sigma shift       sigma(x+z, y+z) - sigma(x,y)
         distance shift    | d(f(x+z),f(y+z)) - d(f(x),f(y)) | / side(Q)
         triangle excess   (|f(x+y)| - |f(x)| - |f(y)|) / side(Q)
       the last one in coordinates where x_Q = 0 and f(x_Q) = 0.
    """
    box = as_box(Q)
    center = np.asarray(box.center, dtype=float)
    key = cube_key(Q) if isinstance(Q, DyadicCube) else (box.n,)
    rng = task_rng(p.seed, key)
    gap = p.alpha*box.side
    half = Box(tuple(center), 0.5*box.half_side)
    out = {'homogeneity_gap': 0.0, 'sigma_shift': -np.inf,
           'distance_shift': 0.0, 'triangle_excess': -np.inf}
    for _ in range(samples):
        x, y = _admissible_pair(rng, box, gap)
        z = box.side*(rng.random(box.n) - 0.5)
        s = sigma(f, Q, x, y, p)
        d = float(f.distance(x, y))
        out['homogeneity_gap'] = max(out['homogeneity_gap'],
                                     abs(d/np.linalg.norm(x - y) - s))
        out['sigma_shift'] = max(out['sigma_shift'],
                                 sigma(f, Q, x + z, y + z, p) - s)
        out['distance_shift'] = max(out['distance_shift'],
                                    abs(float(f.distance(x + z, y + z)) - d)/box.side)
        u, v = half.lower + half.side*rng.random((2, box.n)) - center
        excess = float(f.distance(center + u + v, center)) - \
            float(f.distance(center + u, center)) - \
            float(f.distance(center + v, center))
        out['triangle_excess'] = max(out['triangle_excess'], excess/box.side)
    return out
