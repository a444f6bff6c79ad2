"""
Distances, not just tangents
============================

Ratios of sphere distance to face distance over random point pairs on
one face stay within the pointwise range, and close pairs near a corner
or a face center approach its ends. Across faces the intrinsic cube
distance is bracketed by a chord (below) and a graph path (above).
"""

import numpy as np

from so3atlas import ChartId, ChartPoint, pl_distance_approx, sweep_distance_distortion
from so3atlas.oracle import directed_pairs, same_face_ratios

for model in ("s3", "so3"):
    rep = sweep_distance_distortion(model, 10**5, seed=42)
    print(model, "same-face ratios within", [rep.observed_min, rep.observed_max])

rng = np.random.default_rng(0)
zero = np.zeros(200, dtype=int)
print("near corner:", same_face_ratios("s3", zero, *directed_pairs("s3", "corner", 200, 1e-3, rng)).min())
print("near center:", same_face_ratios("s3", zero, *directed_pairs("s3", "center", 200, 1e-3, rng)).max())

# Two opposite corners of the 4-cube: the surface distance is 2 sqrt(6)
p = ChartPoint(ChartId.parse("s3", "+w"), (1, 1, 1))
q = ChartPoint(ChartId.parse("s3", "-w"), (-1, -1, -1))
for depth in (2, 3, 4):
    print(depth, pl_distance_approx(p, q, depth))

# Cross-face ratio intervals narrow as the graph is refined
for depth in (2, 3):
    rep = sweep_distance_distortion("s3", 10, seed=1, mode="cross_face", depth=depth)
    widths = [it["ratio_hi"] - it["ratio_lo"] for it in rep.extra["intervals"]]
    print(f"depth {depth}: mean interval width {np.mean(widths):.4f}")
