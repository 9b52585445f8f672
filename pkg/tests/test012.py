import numpy as np
from numpy.testing import assert_allclose

from metricdiff import reference
from metricdiff.corpus import (Affine, BrokenCurve, Corner, DistanceCoords,
                               NormPullback, Sawtooth, sample_map)
from metricdiff.dyadic import DyadicCube, dilate, root_cube
from metricdiff.params import AnalysisParams
from metricdiff.seminorm import PolyhedralSeminorm, md_estimate, md_exact_1d

line = root_cube(-1.0, 2.0)
square = root_cube((-1.0, -1.0), 2.0)
p1 = AnalysisParams(n=1)
p2 = AnalysisParams(n=2)
corner = sample_map(Corner(0.0), line, h=2.0**-6)


def test_corner_md():
    value, s = md_estimate(corner, line)
    assert_allclose(value, 1.0/3, atol=1e-5)
    assert_allclose(s.functionals[0, 0], 1.0/3, atol=1e-5)
    value, c = md_exact_1d(corner, line, full_output=True)
    assert_allclose(value, 1.0/3, atol=1e-5)
    assert_allclose(c, 1.0/3, atol=1e-5)


def test_corner_md_reference():
    value, c = reference.md_scan_1d(corner, -1.0, 1.0, 17,
                                    np.linspace(0.0, 1.0, 301))
    assert_allclose(value, 1.0/3, atol=1e-9)
    assert_allclose(c, 1.0/3, atol=1e-9)


def test_md_exact_1d():
    f = sample_map(Affine([[2.0]]), line, h=2.0**-6)
    value, c = md_exact_1d(f, line, full_output=True)
    assert value <= 1e-5
    assert_allclose(c, 2.0, atol=1e-5)
    value, c = md_exact_1d(corner, (0.2, 0.4), full_output=True)
    assert value <= 1e-5
    assert_allclose(c, 1.0, atol=1e-5)
    # 3Q = [-s, 2s] around the corner
    assert_allclose(md_exact_1d(corner, (-0.25, 0.5), grid=256), 1.0/3, atol=1e-5)


def test_zero_map():
    f = sample_map(Affine(np.zeros((1, 1))), line, h=0.25)
    value, s, residuals = md_estimate(f, line, full_output=True)
    assert value == 0.0
    assert s.is_zero
    assert 'fit' not in residuals


def test_affine_md_vanishes():
    for A in (2*np.eye(2), [[1.0, 1.0], [1.0, -1.0]]):
        f = sample_map(Affine(A), square, h=0.5)
        for Q in [square, DyadicCube(1, (1, 0), square.grid),
                  DyadicCube(3, (2, 5), square.grid)]:
            value, s = md_estimate(f, Q, p=p2)
            assert value <= 0.01*f.L_hat


def test_norm_md_vanishes():
    f = sample_map(NormPullback(PolyhedralSeminorm.l1(2)), square, h=0.5)
    value, s = md_estimate(f, dilate(square, 3), p=p2)
    assert value <= 1e-9


def test_candidates():
    '''a supplied seminorm competes with the built ones'''
    value, s, residuals = md_estimate(corner, line, p=p1,
                                      candidates=[PolyhedralSeminorm([[0.9]])],
                                      full_output=True)
    assert 'given0' in residuals
    assert value <= residuals['given0']
    assert value == min(residuals.values())


def test_md_upper_bound():
    maps = [corner, sample_map(Sawtooth(3), line, h=2.0**-6),
            sample_map(DistanceCoords([[0.0, 0.0], [1.0, 0.5]]), square, h=0.5),
            sample_map(Corner([0.2, -0.1]), square, h=0.5)]
    for f in maps:
        value, _ = md_estimate(f, f.root)
        assert 0.0 <= value <= np.sqrt(f.n)*f.L_hat + 0.01


def test_one_dimensional_agreement():
    '''md_estimate and md_exact_1d agree on the grid they share'''
    saw = sample_map(Sawtooth(2), line, h=2.0**-6)
    curve = sample_map(BrokenCurve([[0, 0], [1, 1], [2, 0]]), root_cube(0.0, 1.0),
                       h=2.0**-6)
    cases = [(corner, line), (corner, DyadicCube(3, (3,), line.grid)),
             (corner, DyadicCube(2, (2,), line.grid)), (saw, line),
             (curve, curve.root)]
    for f, Q in cases:
        estimate = md_estimate(f, Q, p=p1)[0]
        exact = md_exact_1d(f, Q, grid=p1.grid_points)
        assert estimate >= exact - 1e-5
        assert estimate <= exact + 0.02
