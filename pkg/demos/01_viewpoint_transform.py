"""Rotate a small event stream in the (y, t) plane and look at what survives."""
import math

import numpy as np

from eventaug import SensorGeometry, VptParams, apply_vpt, canonicalize, default_tau, vpt_matrix

rng = np.random.default_rng(0)
geom = SensorGeometry(width=34, height=26)

# a random stream: 2000 events over 50 ms
n = 2000
events = zip(rng.integers(0, 26, n), rng.integers(0, 34, n), rng.integers(0, 50_000, n), rng.choice([-1, 1], n))
stream = canonicalize(list(events), geom)
print(stream)

# tau turns microseconds into pixels so that y and t can be mixed
tau = default_tau(stream)
print("tau (us/px):", tau)

params = VptParams("yt", theta=math.radians(20), tau=tau, center_spatial=12.5, center_time=25_000)
m = vpt_matrix(params)
print("4x4 matrix (row vectors [y, x, t, 1]):")
print(np.array2string(m, precision=3, suppress_small=True))

out, stats = apply_vpt(stream, params)
print(stats)
print("discarded off-sensor: %.1f%%" % (100 * stats.spatial_discard_fraction))

# one event by hand: the matrix and the transform agree
y, x, t, p = stream[0]
print("first event", (y, x, t), "->", np.array([y, x, t, 1.0]) @ m)

# zero angle is an exact identity
same, _ = apply_vpt(stream, VptParams("yt", 0.0, tau, 12.5, 25_000))
print("theta = 0 identity:", same == stream)
