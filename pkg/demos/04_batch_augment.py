"""Seeded batch augmentation over files in three formats."""
import json
import tempfile
from pathlib import Path

import numpy as np

from eventaug import AugmentConfig, SensorGeometry, canonicalize, write_events
from eventaug.cli import cmd_augment

rng = np.random.default_rng(7)
geom = SensorGeometry(64, 48)
work = Path(tempfile.mkdtemp())

inputs = []
for i, ext in enumerate(["evt", "csv", "bin"]):
    n = 500
    events = zip(rng.integers(0, 48, n), rng.integers(0, 64, n), rng.integers(0, 100_000, n), rng.choice([-1, 1], n))
    path = work / f"rec{i}.{ext}"
    write_events(path, canonicalize(list(events), geom))
    inputs.append(path)

# a corrupt file only spoils its own entry
(work / "broken.evt").write_bytes(b"EVT1 not really")
inputs.append(work / "broken.evt")

config = AugmentConfig(strategy="vpt-sts", theta_max=0.4, seed=11)
report = cmd_augment(inputs, work / "out", config, geometry=geom, workers=4)

for f in report["files"]:
    print(f["index"], Path(f["input"]).name, f["status"], f.get("params", {}).get("transform"),
          f.get("stats", {}).get("retained_count"), f.get("error", ""))
print("failed:", report["failed"])

# the same seed reproduces the same parameters whatever the pool width
again = cmd_augment(inputs, work / "out2", config, geometry=geom, workers=1)
print("same params:", [f.get("params") for f in report["files"]] == [f.get("params") for f in again["files"]])
print(json.dumps(report["files"][0]["params"], indent=1))
