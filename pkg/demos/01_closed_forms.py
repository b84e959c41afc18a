# Closed-form plate geometry against a projected-corner oracle.
#
# A plate W wide sits at the origin of its wall; the camera is d away at pan
# angle theta.  Project the four corners, measure the box width and the
# horizontal vanishing point, and compare with the closed forms.
import math

import numpy as np

from plateloc import pose, synth

d, W = 2.0, 0.1
print(" theta   w(closed)    w(proj)     x_hor(closed)  x_hor(proj)   -1/x_hor")
for th_deg in (-40, -20, -5, 5, 20, 40):
    th = math.radians(th_deg)
    sc = synth.SyntheticScene(d=d, theta=th, W=W)
    box = synth.project_box(sc)
    x_proj = synth.numeric_xhor(box, sc.K)
    print(f"{th_deg:6d}  {pose.exact_w(d, th, W):.8f}  {synth.numeric_w(box, sc.K):.8f}  "
          f"{pose.exact_xhor(d, th, W):12.6f}  {x_proj:12.6f}  {math.degrees(-1 / x_proj):8.3f}")

# The width matches exactly.  The printed x_hor closed form carries an offset
# of order W/d; it vanishes as the plate shrinks relative to the distance.
th = math.radians(20)
for W in (0.4, 0.1, 0.01, 0.001):
    sc = synth.SyntheticScene(d=d, theta=th, W=W)
    x_proj = synth.numeric_xhor(synth.project_box(sc), sc.K)
    print(f"W={W:6.3f}  rel diff {abs(pose.exact_xhor(d, th, W) - x_proj) / abs(x_proj):.2e}")

# Depth from width inverts exactly once theta is known.
w = pose.exact_w(d, th, 0.1)
print("depth round trip:", pose.estimate_depth(th, 0.1, w))

# With theta from the VP (theta ~ -1/x_hor) the AOV error is tan(theta) - theta.
for th_deg in (10, 20, 30, 45):
    th = math.radians(th_deg)
    est, _ = pose.estimate_aov(-1 / math.tan(th))
    print(f"theta {th_deg:2d} deg -> estimate {math.degrees(est):7.3f} deg")
