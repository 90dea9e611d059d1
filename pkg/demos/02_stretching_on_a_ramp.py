"""Spatiotemporal stretching on a synthetic brightness ramp.

Every pixel of a uniform ramp fires at the same instants, so after stretching
each row's train should move by exactly -tau * tan(theta) * (y - y_c).
"""
import math

import numpy as np

from eventaug import SensorGeometry, ThresholdConfig, UniformRamp, apply_sts, generate, predict_sts_shift

geom = SensorGeometry(width=3, height=9)
scene = UniformRamp(rate=2.0, geometry=geom, duration_us=1_000_000)  # 2 log-units per second
ramp = generate(scene, ThresholdConfig(C=0.5))
print(ramp)
print("row 0 times:", ramp.t[(ramp.y == 0) & (ramp.x == 0)])

theta, tau, yc = math.radians(30), 1000.0, 4.0
out = apply_sts(ramp, "yt", theta, tau, yc)
shift = predict_sts_shift(scene, "yt", theta, tau, yc)[:, 0]

print("\n y   predicted shift   first event after")
for y in range(geom.height):
    first = out.t[(out.y == y) & (out.x == 0)][0]
    print(f"{y:2d}   {shift[y]:15.1f}   {first:8d}")

# nothing is lost and no pixel moves
print("\nsame count:", len(out) == len(ramp))
print("same pixels:", np.array_equal(np.sort(out.y), np.sort(ramp.y)))
