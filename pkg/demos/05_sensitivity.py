# How pixel errors propagate to the AOV and to depth.
from plateloc import synth

rep = synth.sensitivity_report()
print("d theta / d x_hor (deg per px, f = 1000 px)")
for r in rep["theta_vs_xhor"][::5]:
    print(f"  x_hor {r['x_var']:6.0f} px: {r['analytic']:.5f}  (finite diff {r['finite_diff']:.5f})")

print(f"d depth / d w (m per px, d = 7 m, W = 0.1 m, f = {rep['focal_px_depth_vs_w']:.0f} px)")
for r in rep["depth_vs_w"][::3]:
    print(f"  w {r['x_var']:5.0f} px: {r['analytic']:.4f}  (finite diff {r['finite_diff']:.4f})")
# At 50 px a one-pixel width error moves the depth by about 14 cm.
