"""Dyadic cube bookkeeping.

A cube is stored exactly as (level, integer lattice coords) on a grid; all
sides, corners and centers are derived from those integers, so ancestry and
partition identities never depend on floating point. Dilations such as 3Q and
7Q are Box values and are never snapped back to the grid.

Grids may be translated by v in {0, +1/3, -1/3}^n (in units of the root side),
which is what the 1/3-trick needs: every 3Q with side(Q) <= side(root)/6 fits
in a cube of one of the 3^n translated grids with comparable side.
"""
import collections
import dataclasses
import itertools
from fractions import Fraction

import numpy as np

from metricdiff.errors import AboveRoot, TooLarge


@dataclasses.dataclass(frozen=True)
class GridShift:
    """Translation of a grid by steps/3 root sides, steps in {-1,0,1}^n"""
    steps: tuple

    def __post_init__(self):
        assert all(s in (-1, 0, 1) for s in self.steps)

    @property
    def offset(self):
        return np.asarray(self.steps, dtype=float)/3.0

    @property
    def is_zero(self):
        return not any(self.steps)

    def __str__(self):
        names = {-1: '-1/3', 0: '0', 1: '+1/3'}
        return '(' + ','.join(names[s] for s in self.steps) + ')'


@dataclasses.dataclass(frozen=True)
class Grid:
    """Root cube [origin, origin + side)^n of a dyadic grid, plus its shift"""
    origin: tuple
    side: float
    shift: GridShift

    @property
    def n(self):
        return len(self.origin)

    @property
    def lower(self):
        """Lower corner of the (shifted) root cube"""
        return np.asarray(self.origin, dtype=float) + self.side*self.shift.offset

    def shifted(self, shift):
        return Grid(self.origin, self.side, shift)


@dataclasses.dataclass(frozen=True)
class DyadicCube:
    level: int
    coords: tuple
    grid: Grid

    @property
    def n(self):
        return len(self.coords)

    @property
    def side(self):
        return self.grid.side*2.0**(-self.level)

    @property
    def lower(self):
        return self.grid.lower + self.side*np.asarray(self.coords, dtype=float)

    @property
    def upper(self):
        return self.lower + self.side

    @property
    def center(self):
        return self.lower + 0.5*self.side

    @property
    def volume(self):
        return self.side**self.n

    @property
    def relative_volume(self):
        """vol(Q)/vol(root) as an exact fraction"""
        return Fraction(1, 2**(self.n*self.level))

    def __str__(self):
        return 'L%d(%s)' % (self.level, ','.join(str(c) for c in self.coords))


@dataclasses.dataclass(frozen=True)
class Box:
    """Closed cube with given center and half side; holds dilations like 3Q"""
    center: tuple
    half_side: float

    def __post_init__(self):
        assert self.half_side > 0

    @property
    def n(self):
        return len(self.center)

    @property
    def side(self):
        return 2.0*self.half_side

    @property
    def lower(self):
        return np.asarray(self.center, dtype=float) - self.half_side

    @property
    def upper(self):
        return np.asarray(self.center, dtype=float) + self.half_side

    @property
    def volume(self):
        return self.side**self.n

    def contains(self, points, tol=0.0):
        """Vectorized membership of points (..., n)"""
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower - tol) & (points <= self.upper + tol),
                      axis=-1)

    def contains_box(self, other, tol=0.0):
        return bool(np.all(other.lower >= self.lower - tol) and
                    np.all(other.upper <= self.upper + tol))


Location = collections.namedtuple('Location', ['shift', 'cube', 'constant'])


def root_cube(origin, side=1.0, shift=None):
    """Level-0 cube [origin, origin+side)^n of a new grid"""
    origin = tuple(float(o) for o in np.atleast_1d(origin))
    if shift is None:
        shift = GridShift((0,)*len(origin))
    return DyadicCube(0, (0,)*len(origin), Grid(origin, float(side), shift))


def as_box(Q):
    """Box of a cube (identity on boxes)"""
    if isinstance(Q, Box):
        return Q
    return Box(tuple(Q.center), 0.5*Q.side)


def dilate(Q, factor):
    """Concentric dilation lambda*Q of a cube or box"""
    box = as_box(Q)
    return Box(box.center, factor*box.half_side)


def ancestor(Q, N):
    """Dyadic cube containing Q with side 2^N side(Q)"""
    if N < 0:
        raise ValueError('N must be nonnegative')
    if Q.level < N:
        raise AboveRoot('%s has no ancestor %d levels up' % (Q, N))
    return DyadicCube(Q.level - N, tuple(c >> N for c in Q.coords), Q.grid)


def clamped_ancestor(Q, N):
    """Returns (ancestor, clamped): the ancestor is clamped to level 0"""
    if Q.level < N:
        return ancestor(Q, Q.level), True
    return ancestor(Q, N), False


def children(Q):
    """The 2^n children of Q in lexicographic order"""
    return [DyadicCube(Q.level + 1, tuple(2*c + e for c, e in zip(Q.coords, bits)),
                       Q.grid)
            for bits in itertools.product((0, 1), repeat=Q.n)]


def contains(R, Q):
    """Exact test Q subset of R for cubes of the same grid"""
    if R.grid != Q.grid or Q.level < R.level:
        return False
    shift = Q.level - R.level
    return all((q >> shift) == r for q, r in zip(Q.coords, R.coords))


def enumerate_cubes(R, depth):
    """All dyadic subcubes of R down to `depth` levels below it, level-major
       then lexicographic in coords. Returns sum_j 2^(jn) cubes.
    """
    if depth < 0:
        raise ValueError('depth must be nonnegative')
    cubes = []
    for j in range(depth + 1):
        base = [c << j for c in R.coords]
        for offset in itertools.product(range(2**j), repeat=R.n):
            cubes.append(DyadicCube(R.level + j,
                                    tuple(b + o for b, o in zip(base, offset)),
                                    R.grid))
    return cubes


def locate_cube(grid, point, level):
    """Cube of the given level of `grid` containing point (half-open cubes)"""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    side = grid.side*2.0**(-level)
    coords = np.floor((point - grid.lower)/side).astype(int)
    return DyadicCube(level, tuple(int(c) for c in coords), grid)


def all_shifts(n):
    """The 3^n grid shifts, the zero shift first"""
    steps = [s for s in itertools.product((0, -1, 1), repeat=n)]
    return [GridShift(s) for s in steps]


def shifted_grid_locate(Q):
    """Finds a shift v and a cube R of the v-shifted grid, R inside the
       translated root, with 3Q contained in R. The finest such R is
       returned together with the achieved constant side(R)/side(Q).
    """
    grid = Q.grid.shifted(GridShift((0,)*Q.n))
    if 6*Q.side > grid.side*(1 + 1e-12):
        raise TooLarge('side(Q)=%g exceeds 1/6 of the root side %g'
                       % (Q.side, grid.side))
    box = dilate(Q, 3)
    tol = 1e-12*grid.side
    for j in range(Q.level - 2, -1, -1):
        for shift in all_shifts(Q.n):
            cube = locate_cube(grid.shifted(shift), box.lower + tol, j)
            if any(c < 0 or c >= 2**j for c in cube.coords):
                continue
            if np.all(cube.lower <= box.lower + tol) and \
               np.all(cube.upper >= box.upper - tol):
                return Location(shift, cube, cube.side/Q.side)
    raise TooLarge('no shifted grid covers 3Q for %s' % (Q,))


def _zigzag(c):
    return 2*c if c >= 0 else -2*c - 1


def cube_key(Q):
    """Nonnegative integer key of a cube, used to seed per-cube RNG streams"""
    return tuple(s + 1 for s in Q.grid.shift.steps) + \
        (Q.level,) + tuple(_zigzag(c) for c in Q.coords)
