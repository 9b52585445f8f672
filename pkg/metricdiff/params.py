"""Tunables of the multiscale analysis.

AnalysisParams carries the homogeneity separation alpha (and the derived
alpha' = 2(n+1)alpha), the ancestor depth N, the md threshold delta, the beta
threshold epsilon and the discretization sizes used by sigma, the star
profile, md estimation and seminorm fitting. QuadratureSpec carries the sizes
of the beta-number quadrature.
"""
import dataclasses
import logging

import numpy as np
from scipy.optimize import brentq

from metricdiff.errors import ConfigError

log = logging.getLogger(__name__)

# default grid points per axis for the md pair sample, by dimension
GRID_POINTS = {1: 33, 2: 9, 3: 5}


def md_bound(alpha, n):
    """Returns sqrt(n) a'/(1 - a') + (2 + sqrt(n)) a with a' = 2(n+1)a, the
       md bound reached once beta is small enough. Infinite for a' >= 1.
    """
    alpha_prime = 2*(n + 1)*alpha
    if alpha_prime >= 1.0:
        return np.inf
    return np.sqrt(n)*alpha_prime/(1.0 - alpha_prime) + (2.0 + np.sqrt(n))*alpha


def auto_alpha(delta, n):
    """Largest alpha with md_bound(alpha, n) < delta"""
    if delta <= 0:
        raise ConfigError('delta must be positive, got %r' % delta)
    upper = 1.0/(2*(n + 1))
    root = brentq(lambda a: md_bound(a, n) - delta, 0.0, upper*(1 - 1e-12),
                  xtol=1e-15)
    return root*(1 - 1e-9)


@dataclasses.dataclass(frozen=True)
class AnalysisParams:
    n: int = 1
    delta: float = 0.25
    alpha: float = None
    N: int = 2
    epsilon: float = 1e-3
    eps_prime: float = None
    rho: float = None
    sigma_floor: float = 1e-3
    directions: int = None
    chord_points: int = 128
    pairs: int = 32
    grid_points: int = None
    fit_terms: int = None
    fit_iterations: int = 8
    fit_restarts: int = 2
    fit_pairs: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError('dimension n must be >= 1, got %r' % self.n)
        if self.alpha is None:
            object.__setattr__(self, 'alpha', auto_alpha(self.delta, self.n))
            log.debug('alpha chosen from delta=%g: %.6g', self.delta, self.alpha)
        # the lemma tolerances are tied to alpha
        if self.eps_prime is None:
            object.__setattr__(self, 'eps_prime', self.alpha)
        if self.rho is None:
            object.__setattr__(self, 'rho', self.alpha)
        if self.directions is None:
            object.__setattr__(self, 'directions',
                               {1: 2, 2: 64}.get(self.n, 128))
        if self.grid_points is None:
            object.__setattr__(self, 'grid_points',
                               GRID_POINTS.get(self.n, 3))
        if self.fit_terms is None:
            object.__setattr__(self, 'fit_terms', 2*self.n)
        self.validate()

    @property
    def alpha_prime(self):
        return 2*(self.n + 1)*self.alpha

    def validate(self):
        """Checks every invariant; raises ConfigError on the first violation"""
        if not 0 < self.alpha < 1:
            raise ConfigError('alpha must lie in (0,1), got %r' % self.alpha)
        if not md_bound(self.alpha, self.n) < self.delta:
            raise ConfigError(
                'alpha=%g too large for delta=%g in dimension %d: bound %g'
                % (self.alpha, self.delta, self.n,
                   md_bound(self.alpha, self.n)))
        if self.N < 0:
            raise ConfigError('N must be >= 0, got %r' % self.N)
        if self.epsilon <= 0:
            raise ConfigError('epsilon must be positive')
        if self.directions < 2 or self.directions % 2:
            raise ConfigError('directions must be an even number >= 2')
        if self.n > 1 and self.directions < 2*(self.n + 1):
            raise ConfigError('need at least 2(n+1) directions')
        if self.chord_points < 8:
            raise ConfigError('chord_points must be >= 8')
        if self.grid_points < 2 or self.pairs < 0:
            raise ConfigError('grid_points must be >= 2 and pairs >= 0')
        if self.fit_terms < 1 or self.fit_iterations < 0:
            raise ConfigError('fit_terms must be >= 1, fit_iterations >= 0')
        if not 0 < self.sigma_floor < 1:
            raise ConfigError('sigma_floor is relative to L and must be in (0,1)')

    def replace(self, **changes):
        """Copy with changes; a new delta without alpha re-derives alpha"""
        if 'delta' in changes and 'alpha' not in changes:
            changes['alpha'] = None
            changes.setdefault('eps_prime', None)
            changes.setdefault('rho', None)
        return dataclasses.replace(self, **changes)

    def as_record(self):
        record = dataclasses.asdict(self)
        record['alpha_prime'] = self.alpha_prime
        return record


@dataclasses.dataclass(frozen=True)
class QuadratureSpec:
    """m: nodes per axis of the ordered triple rule; mc_lines: sampled lines
       per cube for n >= 2; seed: base seed of the line sampler.
    """
    m: int = 32
    mc_lines: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.m < 8:
            raise ConfigError('quadrature needs m >= 8, got %r' % self.m)
        if self.mc_lines < 64:
            raise ConfigError('need mc_lines >= 64, got %r' % self.mc_lines)

    def as_record(self):
        return dataclasses.asdict(self)
