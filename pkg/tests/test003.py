import numpy as np
import pytest
from numpy.testing import assert_allclose

from metricdiff.corpus import (FAMILIES, Affine, BrokenCurve, Corner,
                               DistanceCoords, Lifted, NormPullback, Sawtooth,
                               default_margin, lift_map, lipschitz_estimate,
                               make_spec, read_map_csv, sample_map,
                               write_map_csv)
from metricdiff.dyadic import root_cube
from metricdiff.errors import (ConfigError, OutOfDomain, ResolutionTooCoarse)
from metricdiff.metricspace import DistanceMatrix
from metricdiff.seminorm import PolyhedralSeminorm

line = root_cube(-1.0, 2.0)


def test_evaluate_examples():
    assert_allclose(Corner(0.0).evaluate([[-0.5]]), [[0.5]])
    assert_allclose(Affine([[2.0]]).evaluate([[0.3]]), [[0.6]])
    assert_allclose(DistanceCoords([[0.0, 0.0], [3.0, 4.0]]).evaluate([0.0, 0.0]),
                    [0.0, 5.0])
    assert_allclose(BrokenCurve([[0, 0], [1, 1], [2, 0]]).evaluate([[0.25]]),
                    [[0.5, 0.5]])
    assert_allclose(Sawtooth(1).evaluate([[0.25], [0.5]]), [[0.25], [0.0]])
    assert_allclose(Lifted(Corner(0.0)).evaluate([[-2.0]]), [[-2.0, 2.0]])


def test_families():
    assert sorted(FAMILIES) == ['affine', 'brokencurve', 'corner',
                                'distancecoords', 'normpullback', 'sawtooth']
    spec = make_spec('Affine', {'A': '2'}, 2)
    assert_allclose(spec.A, 2*np.eye(2))
    assert spec.lipschitz == 2.0
    assert make_spec('corner', {'c': '0.5'}, 2).c.tolist() == [0.5, 0.5]
    assert make_spec('normpullback', {'gauge': 'linf'}, 3).lipschitz == 1.0
    with pytest.raises(ConfigError):
        make_spec('spiral', {}, 1)
    with pytest.raises(ConfigError):
        make_spec('brokencurve', {}, 2)
    with pytest.raises(ConfigError):
        make_spec('affine', {'A': '1,0;0,1'}, 3)
    with pytest.raises(ConfigError):
        make_spec('sawtooth', {'K': '2', 'periods': '0.5'}, 1)


def test_lipschitz_bounds():
    '''closed-form bounds dominate the distance ratio on random pairs'''
    rng = np.random.default_rng(0)
    specs = [Corner(0.1), Sawtooth(4), BrokenCurve([[0, 0], [1, 1], [2, 0]]),
             Affine([[1.0, -2.0], [0.5, 0.5]]),
             NormPullback(PolyhedralSeminorm.l1(2)),
             DistanceCoords([[0.0, 0.0], [1.0, -1.0], [0.3, 0.2]]),
             Lifted(Corner([0.0, 0.0]))]
    for spec in specs:
        x, y = rng.uniform(-2, 2, (2, 5000, spec.n))
        d = spec.backend.distance(spec.evaluate(x), spec.evaluate(y))
        bound = spec.lipschitz*np.linalg.norm(x - y, axis=1)
        assert np.all(d <= bound*(1 + 1e-9) + 1e-15), spec.family


def test_sample_map():
    f = sample_map(Corner(0.0), line, h=2.0**-8, margin=8)
    assert f.nodes_per_axis == 4097
    assert f.margin == 8.0
    assert_allclose(f.L_hat, 1.0, rtol=1e-9)
    assert f.L_spec == 1.0
    assert_allclose(f.evaluate([[0.75]]), [[0.75]])

    f = sample_map(Affine([[2.0]]), line, h=2.0**-6)
    assert f.margin == default_margin(2)
    assert_allclose(f.L_hat, 2.0, rtol=1e-12)

    f = sample_map(Affine(np.zeros((1, 1))), line, h=2.0**-4)
    assert f.L_hat == 0.0
    assert np.all(f.values == 0.0)

    f = sample_map(Sawtooth(3), line, h=2.0**-8)
    assert f.L_hat <= f.L_spec*(1 + 1e-9)
    assert_allclose(f.L_hat, 3.0, rtol=1e-9)


def test_sample_map_2d():
    square = root_cube((-1.0, -1.0), 2.0)
    f = sample_map(NormPullback(PolyhedralSeminorm.l1(2)), square, h=0.5)
    assert f.values.shape == (85, 85, 2)
    assert f.L_hat <= f.L_spec*(1 + 1e-9)
    assert f.L_hat >= 1.0
    assert_allclose(f.distance([0.0, 0.0], [1.0, -1.0]), 2.0)


def test_sample_map_errors():
    with pytest.raises(ConfigError):
        sample_map(Corner(0.0), line, h=0.37)
    with pytest.raises(ResolutionTooCoarse):
        sample_map(Corner(0.0), line, h=2.0**-4, margin=8, depth=3)
    sample_map(Corner(0.0), line, h=2.0**-4, margin=8, depth=2)
    with pytest.raises(ConfigError):
        sample_map(Corner([0.0, 0.0]), line, h=0.5)
    f = sample_map(Corner(0.0), line, h=0.5)
    with pytest.raises(OutOfDomain):
        f.evaluate([[100.0]])


def test_lift():
    f = lift_map(sample_map(Affine(np.zeros((1, 1))), line, h=0.25))
    assert_allclose(f.distance([0.2], [0.7]), 0.5)
    assert_allclose(f.L_hat, 1.0, rtol=1e-12)

    f = lift_map(sample_map(Corner(0.0), line, h=0.25))
    assert_allclose(f.distance([-0.5], [0.5]), 1.0)
    assert_allclose(f.distance([0.0], [0.5]), np.sqrt(0.5))
    assert_allclose(f.L_hat, np.sqrt(2.0), rtol=1e-12)

    # d_lift^2 = |x-y|^2 + d(f(x), f(y))^2
    g = sample_map(Sawtooth(2), line, h=2.0**-6)
    G = lift_map(g)
    rng = np.random.default_rng(1)
    x, y = rng.uniform(-1, 1, (2, 2000, 1))
    lhs = G.distance(x, y)**2 - (x - y)[:, 0]**2
    assert_allclose(lhs, g.distance(x, y)**2, atol=1e-12)


def test_lipschitz_estimate():
    f = sample_map(Affine([[2.0]]), line, h=2.0**-5)
    assert_allclose(lipschitz_estimate(f, pairs=100, seed=3), 2.0, rtol=1e-12)
    assert lipschitz_estimate(f, seed=1) == lipschitz_estimate(f, seed=1)


def test_csv_round_trip(tmp_path):
    f = sample_map(Corner(0.25), line, h=0.125, margin=7)
    path = str(tmp_path/'corner.csv')
    write_map_csv(f, path)
    g = read_map_csv(path, line)
    assert g.spec is None
    assert g.values.shape == f.values.shape
    assert_allclose(g.values, f.values, atol=0)
    assert g.L_hat == f.L_hat
    assert_allclose(g.evaluate([[0.25], [1.0]]), [[0.0], [0.75]])


def test_csv_matrix(tmp_path):
    path = str(tmp_path/'walk.csv')
    with open(path, 'w') as handle:
        handle.write('x,index\n')
        for i, x in enumerate([-1.0, -0.5, 0.0, 0.5, 1.0]):
            handle.write('%r,%d\n' % (x, i))
    idx = np.arange(5)
    matrix = DistanceMatrix(0.5*np.abs(idx[:, None] - idx[None, :]))
    f = read_map_csv(path, root_cube(-0.5, 1.0), matrix=matrix)
    assert f.backend is matrix
    assert_allclose(f.L_hat, 1.0)
    assert f.distance([-1.0], [1.0]) == 2.0

    with pytest.raises(ConfigError):
        read_map_csv(path, root_cube(-2.0, 4.0), matrix=matrix)
    with open(path, 'a') as handle:
        handle.write('0.25,4\n')
    with pytest.raises(ConfigError):
        read_map_csv(path, root_cube(-0.5, 1.0), matrix=matrix)


def test_csv_malformed(tmp_path):
    root = root_cube(-0.5, 1.0)
    for name, text in [('word.csv', 'x,v\n-1.0,1.0\n0.0,oops\n1.0,1.0\n'),
                       ('ragged.csv', 'x,v\n-1.0,1.0\n0.0\n1.0,1.0\n'),
                       ('empty.csv', 'x,v\n'),
                       ('narrow.csv', '-1.0\n0.0\n1.0\n')]:
        path = tmp_path/name
        path.write_text(text)
        with pytest.raises(ConfigError):
            read_map_csv(str(path), root)
