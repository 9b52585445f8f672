import numpy as np
from numpy.testing import assert_allclose

from metricdiff.beta import carleson_beta_sum
from metricdiff.corpus import (Affine, Corner, NormPullback, Sawtooth, lift_map,
                               sample_map)
from metricdiff.dyadic import enumerate_cubes, root_cube
from metricdiff.params import QuadratureSpec
from metricdiff.seminorm import PolyhedralSeminorm
from metricdiff.utils.parallel import default_workers

line = root_cube(-1.0, 2.0)


def test_affine_sum_vanishes():
    f = sample_map(Affine([[2.0]]), line, h=2.0**-6)
    report = carleson_beta_sum(f, line, 8)
    assert report.total <= 1e-9
    assert report.ratio <= 1e-9
    assert [row['level'] for row in report.per_level] == list(range(9))
    assert [row['cubes'] for row in report.per_level] == [2**j for j in range(9)]
    # the root and both level-1 cubes have no ancestor two levels up
    assert report.clamped_count == 3
    assert report.as_record()['ratio'] == report.ratio


def test_zero_map_ratio():
    f = sample_map(Affine(np.zeros((1, 1))), line, h=0.25)
    report = carleson_beta_sum(f, line, 3)
    assert report.total == 0.0
    assert report.ratio == 0.0


def test_per_level_sums():
    f = lift_map(sample_map(Corner(0.0), line, h=2.0**-6))
    betas = {}
    report = carleson_beta_sum(f, line, 5, betas=betas)
    assert_allclose(sum(row['sum'] for row in report.per_level), report.total)
    # ancestors at levels 0..3 only
    assert sorted(set(Q.level for Q in betas)) == [0, 1, 2, 3]
    assert len(betas) == 1 + 2 + 4 + 8
    cubes = enumerate_cubes(line, 5)
    assert sum(row['cubes'] for row in report.per_level) == len(cubes)


def test_lifted_corner_bounded_in_depth():
    f = lift_map(sample_map(Corner(0.0), line, h=2.0**-10))
    shallow = carleson_beta_sum(f, line, 8).total
    deep = carleson_beta_sum(f, line, 12).total
    assert shallow > 0
    assert deep >= shallow
    assert deep <= 1.1*shallow + 1e-6


def test_sawtooth_grows_with_levels():
    few = lift_map(sample_map(Sawtooth(1), line, h=2.0**-8))
    many = lift_map(sample_map(Sawtooth(4), line, h=2.0**-8))
    assert carleson_beta_sum(many, line, 6).total > \
        carleson_beta_sum(few, line, 6).total


def test_sawtooth_geometric_tail():
    # kinks 1/2 apart; from level 9 on no window 7*3Q^N holds two of them
    coarse = lift_map(sample_map(Sawtooth(2, periods=[2.0, 1.0]), line,
                                 h=2.0**-8))
    report = carleson_beta_sum(coarse, line, 14)
    sums = [row['sum'] for row in report.per_level]
    for j in range(9, 14):
        assert_allclose(sums[j + 1], 0.5*sums[j], rtol=1e-6)
    shallow = sum(sums[:11])
    assert_allclose(report.total - shallow, sums[10]*(1 - 2.0**-4), rtol=1e-6)
    assert report.total <= 1.1*shallow + 1e-6


def test_two_dimensional_sum():
    square = root_cube((-1.0, -1.0), 2.0)
    f = lift_map(sample_map(NormPullback(PolyhedralSeminorm.l1(2)), square,
                            h=0.5))
    totals = [carleson_beta_sum(f, square, 2, q=QuadratureSpec(m=16, seed=s)).total
              for s in (0, 1)]
    assert max(totals) <= 1e-6

    g = lift_map(sample_map(Corner([0.0, 0.0]), square, h=0.5))
    q = QuadratureSpec(m=16, mc_lines=64)
    first = carleson_beta_sum(g, square, 2, q=q)
    again = carleson_beta_sum(g, square, 2, q=q)
    assert first.total == again.total > 0


def test_zero_families_to_depth_six():
    square = root_cube((-1.0, -1.0), 2.0)
    q = QuadratureSpec(m=16, mc_lines=64)
    specs = [Affine([[2.0]]), NormPullback(PolyhedralSeminorm([[0.5]])),
             Affine(2*np.eye(2)), Affine([[1.0, 1.0], [1.0, -1.0]]),
             NormPullback(PolyhedralSeminorm.l1(2))]
    for spec in specs:
        root = line if spec.n == 1 else square
        f = sample_map(spec, root, h=2.0**-6 if spec.n == 1 else 0.5)
        report = carleson_beta_sum(f, root, 6, q=q, workers=default_workers())
        assert report.total <= 1e-9
        assert sum(row['cubes'] for row in report.per_level) == \
            (127 if spec.n == 1 else 5461)
