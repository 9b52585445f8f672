import dataclasses
import functools
import logging

import numpy as np

from metricdiff.beta import carleson_beta_sum
from metricdiff.corpus import lift_map
from metricdiff.dyadic import (DyadicCube, all_shifts, clamped_ancestor, dilate,
                               enumerate_cubes, locate_cube)
from metricdiff.params import AnalysisParams, QuadratureSpec
from metricdiff.seminorm import md_estimate
from metricdiff.utils.parallel import pmap

log = logging.getLogger(__name__)


@dataclasses.dataclass
class PackingReport:
    """Bad cubes Q of Delta(R) to a depth, bad meaning md(3Q) > delta L_hat"""
    delta: float
    total_bad_volume: float
    ratio: float
    per_level: list
    L_hat: float
    L_spec: float
    depth: int
    shift: str
    params: dict

    def as_record(self):
        return dataclasses.asdict(self)

    def csv_rows(self):
        return [('level', 'bad_count', 'bad_volume')] + \
            [(row['level'], row['bad_count'], row['bad_volume'])
             for row in self.per_level]


def _md_task(f, p, dilation, cube):
    region = cube if dilation == 1 else dilate(cube, dilation)
    return md_estimate(f, region, p=p)[0]


class Carleson(object):
    """Class for the multiscale packing analyses of a sampled map f.
       md values are cached per cube, so sums at several thresholds or depths
       reuse them and are exactly consistent.
    """
    def __init__(self, f, params=None, quadrature=None, workers=1):
        self.f = f
        self.params = params or AnalysisParams(n=f.n)
        self.quadrature = quadrature or QuadratureSpec(seed=self.params.seed)
        self.workers = workers
        self._md = {}
        self._lifted = None
        assert self.params.n == f.n, 'params and map disagree on n'

    @property
    def lifted(self):
        if self._lifted is None:
            self._lifted = lift_map(self.f)
        return self._lifted

    def md_values(self, cubes, dilation=3):
        """md(dilation Q) for each cube, computed once per cube"""
        todo = [Q for Q in dict.fromkeys(cubes) if (dilation, Q) not in self._md]
        if todo:
            log.info('md estimates for %d cubes (dilation %d)', len(todo),
                     dilation)
            task = functools.partial(_md_task, self.f, self.params, dilation)
            for Q, value in zip(todo, pmap(task, todo, self.workers)):
                self._md[dilation, Q] = value
        return [self._md[dilation, Q] for Q in cubes]

    def md_packing_sum(self, depth, delta=None, R=None):
        """Routine to sum vol(Q) over Q in Delta(R) with md(3Q) > delta L_hat"""
        R = R if R is not None else self.f.root
        delta = self.params.delta if delta is None else delta
        cubes = enumerate_cubes(R, depth)
        values = self.md_values(cubes)
        threshold = delta*self.f.L_hat
        per_level = {j: {'level': j, 'bad_count': 0, 'bad_volume': 0.0}
                     for j in range(R.level, R.level + depth + 1)}
        for Q, md in zip(cubes, values):
            if md > threshold:
                row = per_level[Q.level]
                row['bad_count'] += 1
                row['bad_volume'] += Q.volume
        rows = [per_level[j] for j in sorted(per_level)]
        total = float(sum(row['bad_volume'] for row in rows))
        report = PackingReport(delta, total, total/R.volume, rows, self.f.L_hat,
                               self.f.L_spec, depth, str(R.grid.shift),
                               self.params.as_record())
        log.info('packing sum delta=%g depth=%d shift=%s: ratio %.6g', delta,
                 depth, report.shift, report.ratio)
        return report

    def shifted_packing_sums(self, depth, delta=None):
        """md packing sums over the roots of all 3^n shifted grids"""
        root = self.f.root
        reports = []
        for shift in all_shifts(root.n):
            R = DyadicCube(root.level, root.coords, root.grid.shifted(shift))
            reports.append(self.md_packing_sum(depth, delta, R))
        return reports

    def kirchheim_scan(self, z, max_level):
        """Routine to list (level, side, md(3Q)) for the cubes containing z"""
        grid = self.f.root.grid
        cubes = [locate_cube(grid, z, j) for j in range(max_level + 1)]
        values = self.md_values(cubes)
        return [(Q.level, Q.side, md) for Q, md in zip(cubes, values)]

    def beta_packing_sum(self, depth, epsilon=None, R=None):
        """Carleson beta sum of the lifted map, with the volume of the cubes
           whose beta(3Q^N) exceeds epsilon and its bound sum/epsilon^2.
        """
        R = R if R is not None else self.f.root
        epsilon = self.params.epsilon if epsilon is None else epsilon
        betas = {}
        report = carleson_beta_sum(self.lifted, R, depth, self.params.N,
                                   self.quadrature, self.workers, betas)
        bad = 0.0
        for Q in enumerate_cubes(R, depth):
            QN, _ = clamped_ancestor(Q, self.params.N)
            if betas[QN] > epsilon:
                bad += Q.volume
        record = report.as_record()
        record.update({'epsilon': epsilon, 'bad_volume': bad,
                       'chebyshev_bound': report.total/epsilon**2})
        return record

    def beta_vs_md_table(self, depth, R=None):
        """Routine to tabulate (cube, level, beta of the lifted map on 3Q^N,
           md(Q)) for Q in Delta(R), sorted by beta.
        """
        R = R if R is not None else self.f.root
        betas = {}
        carleson_beta_sum(self.lifted, R, depth, self.params.N, self.quadrature,
                          self.workers, betas)
        cubes = enumerate_cubes(R, depth)
        mds = self.md_values(cubes, dilation=1)
        rows = []
        for Q, md in zip(cubes, mds):
            QN, _ = clamped_ancestor(Q, self.params.N)
            rows.append((str(Q), Q.level, betas[QN], md))
        rows.sort(key=lambda row: row[2])
        return rows


def monotone_association(rows, fraction=0.1, quantile=95):
    """quantile of md in the lowest and in the highest beta fraction"""
    rows = sorted(rows, key=lambda row: row[2])
    k = max(1, int(len(rows)*fraction))
    low = np.percentile([row[3] for row in rows[:k]], quantile)
    high = np.percentile([row[3] for row in rows[-k:]], quantile)
    return float(low), float(high)
