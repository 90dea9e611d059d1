"""How far does each perturbation move a moving edge in raster space?"""
import numpy as np

from eventaug import MovingEdge, SensorGeometry, ThresholdConfig, generate
from eventaug.cli import cmd_perturb, cmd_sweep, perturb_text_grid

edge = generate(MovingEdge(velocity=40.0, geometry=SensorGeometry(32, 32), duration_us=1_000_000),
                ThresholdConfig(C=0.25))
print(edge)

thetas = [-0.4, -0.2, -0.1, 0.0, 0.1, 0.2, 0.4]
for kind in ("count", "voxel"):
    report = cmd_perturb(edge, ["yt", "xt"], thetas, repr_kind=kind)
    print(f"\n{kind} raster distance")
    print(perturb_text_grid(report), end="")
    print("retained:", np.round(report["retained_fraction"], 3).tolist())

# stretching keeps every event; viewpoint rotation pushes some off the sensor
for strategy in ("vpt", "sts"):
    rows = cmd_sweep([edge], [0.0, 0.3, 0.6, 0.9], strategy=strategy)["angles"]
    print(f"\n{strategy}:", [(r["theta"], round(r["mean_spatial_discard"], 3)) for r in rows])
