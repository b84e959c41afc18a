# Weighted vanishing point: closed form, RANSAC, and the parallel fallback.
import math

import numpy as np

from plateloc import synth
from plateloc.vp import RansacParams, prefer_parallel, ransac_vp, solve_weighted_vp

# Three lines through (1, 2): the weighted least-squares point is the intersection.
lines = np.array([[1, 0, -1, 1.0], [0, 1, -2, 2.0], [1, 1, -3, 5.0]])
print("exact intersection:", solve_weighted_vp(lines).point)

# Parallel lines have no finite solution; the VP is returned as a direction.
print("parallel set:", solve_weighted_vp([[0, 1, -1, 1], [0, 1, 2, 1]]).to_dict())

# Segments through a known VP plus random outliers.
sc = synth.SyntheticScene()
true_vp = np.array([2.0, 0.0])
segs = synth.generate_segments(sc, 14, 6, noise=0.0005, vp=true_vp, seed=1)
for metric, thr in (("distance", 0.01), ("angle", 0.02)):
    vp = ransac_vp(segs, RansacParams(inlier_metric=metric, inlier_threshold=thr, seed=1))
    print(f"{metric:8s} VP {vp.point.round(4)}  error {np.linalg.norm(vp.point - true_vp):.4f}  "
          f"inliers {len(vp.support)}")

# Nearly parallel noisy segments pull a finite LS point into the image;
# the model test falls back to a common direction when that explains them as well.
par = synth.generate_segments(sc, 12, 0, noise=0.001, vp=None, seed=2)
raw = ransac_vp(par, RansacParams(inlier_metric="angle", inlier_threshold=0.02))
print("raw:", raw.to_dict()["kind"], "->", prefer_parallel(raw, par, 0.05).to_dict()["kind"])
