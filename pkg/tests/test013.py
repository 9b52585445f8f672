import numpy as np
import pytest
from numpy.testing import assert_allclose

from metricdiff.carleson import Carleson, PackingReport
from metricdiff.corpus import Affine, Corner, NormPullback, Sawtooth, sample_map
from metricdiff.dyadic import enumerate_cubes, root_cube
from metricdiff.params import AnalysisParams
from metricdiff.seminorm import PolyhedralSeminorm
from metricdiff.utils.parallel import default_workers

line = root_cube(-1.0, 2.0)
square = root_cube((-1.0, -1.0), 2.0)


def test_affine_packing_vanishes():
    f = sample_map(Affine([[2.0]]), line, h=2.0**-8)
    report = Carleson(f, AnalysisParams(n=1, delta=0.1)).md_packing_sum(8)
    assert isinstance(report, PackingReport)
    assert report.ratio == 0.0
    assert report.total_bad_volume == 0.0
    assert [row['level'] for row in report.per_level] == list(range(9))


def test_corner_packing():
    f = sample_map(Corner(0.0), line, h=2.0**-12)
    analysis = Carleson(f, AnalysisParams(n=1, delta=0.25))
    shallow = analysis.md_packing_sum(6)
    deep = analysis.md_packing_sum(10)
    assert deep.ratio <= 4.0
    assert abs(deep.ratio - shallow.ratio) <= 0.1*shallow.ratio
    # the root, then the two cubes touching the corner at every level
    assert [row['bad_count'] for row in deep.per_level] == [1] + [2]*10
    assert_allclose(deep.ratio, 3.0 - 2.0**-9)
    rows = deep.csv_rows()
    assert rows[0] == ('level', 'bad_count', 'bad_volume')
    assert len(rows) == 12
    record = deep.as_record()
    assert record['params']['delta'] == 0.25
    assert record['shift'] == '(0)'


def test_monotone_in_delta():
    f = sample_map(Sawtooth(3), line, h=2.0**-8)
    analysis = Carleson(f, AnalysisParams(n=1, delta=0.1))
    ratios = [analysis.md_packing_sum(6, delta).ratio
              for delta in (0.1, 0.25, 0.5)]
    assert ratios[0] >= ratios[1] >= ratios[2]


def test_sawtooth_fine_levels():
    '''below the finest tooth the bad cubes repeat level by level, so the
       sum has a geometric tail and settles once that tail is small
    '''
    f = sample_map(Sawtooth(4), line, h=2.0**-12)
    analysis = Carleson(f, AnalysisParams(n=1, delta=0.1))
    for delta in (0.1, 0.25, 0.5):
        shallow = analysis.md_packing_sum(6, delta)
        deep = analysis.md_packing_sum(10, delta)
        counts = [row['bad_count'] for row in deep.per_level]
        assert counts[7] == counts[8] == counts[9] == counts[10]
        tail = sum(row['bad_volume'] for row in deep.per_level[7:])
        assert_allclose(deep.ratio - shallow.ratio, tail/2.0, atol=1e-12)
        assert counts[10] <= 2*65

        volumes = np.cumsum([row['bad_volume'] for row in deep.per_level])/2.0

        def ratio(d):
            if d <= 10:
                return volumes[d]
            return deep.ratio + counts[10]*(2.0**-10 - 2.0**-d)

        settled = [d for d in range(6, 30)
                   if ratio(d + 4) <= 1.1*ratio(d) + 0.01]
        assert settled and settled[0] <= 14
        assert all(d in settled for d in range(settled[0], 30))


def test_sawtooth_coarse_teeth_stable():
    # kinks at 0 (slopes -2, 2) and +-1/2 (slopes 2, 0): from level 3 on each
    # 3Q holds at most one kink, at a third of its length
    f = sample_map(Sawtooth(2, periods=[2.0, 1.0]), line, h=2.0**-10)
    analysis = Carleson(f, AnalysisParams(n=1, delta=0.1))
    assert_allclose(f.L_hat, 2.0)
    for delta, per_level in ((0.1, 6), (0.25, 2), (0.5, 0)):
        shallow = analysis.md_packing_sum(6, delta)
        deep = analysis.md_packing_sum(10, delta)
        counts = [row['bad_count'] for row in deep.per_level]
        assert counts[3:] == [per_level]*8
        assert deep.ratio <= 1.1*shallow.ratio + 0.01


def test_shifted_grids():
    f = sample_map(Corner(0.0), line, h=2.0**-10)
    reports = Carleson(f).shifted_packing_sums(6)
    assert [r.shift for r in reports] == ['(0)', '(-1/3)', '(+1/3)']
    ratios = [r.ratio for r in reports]
    assert min(ratios) > 0
    assert max(ratios) <= 4*min(ratios)


def test_two_dimensional_packing():
    for spec in (Affine(2*np.eye(2)), NormPullback(PolyhedralSeminorm.l1(2))):
        f = sample_map(spec, square, h=0.5)
        report = Carleson(f).md_packing_sum(2)
        assert report.ratio == 0.0
        assert sum(row['bad_count'] for row in report.per_level) == 0


def test_zero_md_families_to_depth_six():
    fast = dict(directions=16, chord_points=32, grid_points=5, pairs=8)
    specs = [Affine([[2.0]]), NormPullback(PolyhedralSeminorm([[0.5]])),
             Affine(2*np.eye(2)), Affine([[1.0, 1.0], [1.0, -1.0]]),
             NormPullback(PolyhedralSeminorm.l1(2))]
    for spec in specs:
        root = line if spec.n == 1 else square
        f = sample_map(spec, root, h=2.0**-8 if spec.n == 1 else 0.5)
        p = AnalysisParams(n=spec.n, **fast)
        analysis = Carleson(f, p, workers=default_workers())
        cubes = enumerate_cubes(root, 6)
        assert len(cubes) == (127 if spec.n == 1 else 5461)
        assert max(analysis.md_values(cubes, dilation=1)) <= 0.01*f.L_hat


def test_md_cache():
    f = sample_map(Corner(0.0), line, h=2.0**-8)
    analysis = Carleson(f)
    first = analysis.md_packing_sum(4)
    assert len(analysis._md) == 31
    again = analysis.md_packing_sum(4)
    assert first.as_record() == again.as_record()
    assert len(analysis._md) == 31


def test_params_must_match_map():
    f = sample_map(Corner(0.0), line, h=0.25)
    with pytest.raises(AssertionError):
        Carleson(f, AnalysisParams(n=2))
