from metricdiff.corpus import Corner, sample_map
from metricdiff.dyadic import root_cube
from metricdiff.params import AnalysisParams
from metricdiff.seminorm import md_estimate, md_exact_1d
from metricdiff.carleson import Carleson

# f(t) = |t| on the root [-1,1), sampled on the enlarged root
root = root_cube(-1.0, 2.0)
f = sample_map(Corner(0.0), root, h=2.0**-10)

params = AnalysisParams(n=1, delta=0.25)

# md of the root itself: the best seminorm is |t|/3
value, seminorm = md_estimate(f, root, p=params)
print('md(root)        = %.6f  (seminorm %s)' % (value, seminorm.functionals.ravel()))
print('md(root) exact  = %.6f' % md_exact_1d(f, root))

# packing of the cubes with md(3Q) > delta L
report = Carleson(f, params).md_packing_sum(depth=8)
print('packing ratio   = %.6f' % report.ratio)
for row in report.per_level:
    print('  level %2d: %d bad cubes' % (row['level'], row['bad_count']))
