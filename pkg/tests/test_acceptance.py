"""Acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line to ``conftest.ACCEPTANCE_LINES`` (echoed in
the terminal summary) before asserting, so a red criterion still reports what
was measured.
"""
import json
import math
import time
from collections import Counter

import numpy as np

import conftest
from conftest import random_stream
from oracles import vpt_product

from eventaug import (
    AugmentConfig,
    EventStream,
    MovingEdge,
    SensorGeometry,
    ThresholdConfig,
    UniformRamp,
    VptParams,
    apply_spatial_rotation,
    apply_sts,
    apply_vpt,
    balanced_rotation,
    canonicalize,
    decode,
    encode,
    event_count,
    event_frame,
    generate,
    predict_sts_shift,
    voxel_grid,
    vpt_matrix,
)
from eventaug.cli import cmd_augment, cmd_perturb
from eventaug.fileio import write_events
from eventaug.representations import rasterize
from eventaug.transforms import sts_time


def record(n: int, title: str, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] C{n} {title}: {detail}")
    assert ok, detail


def random_vpt(rng) -> VptParams:
    plane = ("yt", "xt")[int(rng.integers(2))]
    return VptParams(plane, rng.uniform(-1.4, 1.4), 10 ** rng.uniform(-3, 6),
                     rng.uniform(-100, 1000), rng.uniform(0, 1e7))


def test_c1_matrix_algebra():
    rng = np.random.default_rng(101)
    n = 10_000
    start = time.perf_counter()
    closed = group = inverse = det = 0.0
    scaled = {"group": 0.0, "inverse": 0.0}  # error / max(tau, 1/tau); reported, not graded
    for _ in range(n):
        p = random_vpt(rng)
        closed = max(closed, np.abs(vpt_matrix(p) - vpt_product(p.plane, p.theta, p.tau,
                                                                p.center_spatial, p.center_time)).max())
        r = balanced_rotation(p.plane, p.theta, p.tau)
        while True:
            t2 = rng.uniform(-1.4, 1.4)
            if abs(p.theta + t2) < 1.4:
                break
        prod = r @ balanced_rotation(p.plane, t2, p.tau)
        g_err = np.abs(prod - balanced_rotation(p.plane, p.theta + t2, p.tau)).max()
        i_err = np.abs(r @ balanced_rotation(p.plane, -p.theta, p.tau) - np.eye(4)).max()
        group, inverse = max(group, g_err), max(inverse, i_err)
        size = max(p.tau, 1 / p.tau)
        scaled["group"] = max(scaled["group"], g_err / size)
        scaled["inverse"] = max(scaled["inverse"], i_err / size)
        det = max(det, abs(np.linalg.det(r) - 1))
    elapsed = time.perf_counter() - start
    checks = {"closed-form": closed, "group": group, "inverse": inverse, "det": det}
    ok = all(v <= 1e-12 for v in checks.values()) and elapsed < 10
    detail = ", ".join(f"{k} max err {v:.2e}" for k, v in checks.items())
    detail += "; scaled by max(tau, 1/tau): " + ", ".join(f"{k} {v:.1e}" for k, v in scaled.items())
    record(1, "matrix algebra (1e-12 per entry)", ok, f"{detail}; {n} draws in {elapsed:.1f}s")


def test_c2_identity():
    rng = np.random.default_rng(102)
    sizes = rng.integers(0, 100_001, 100)
    sizes[0] = 100_000
    streams = [random_stream(rng, n=int(k), width=int(rng.integers(1, 641)), height=int(rng.integers(1, 481)))
               for k in sizes]
    bad = []
    start = time.perf_counter()
    for i, s in enumerate(streams):
        g = s.geometry
        tau = 10 ** rng.uniform(-3, 4)
        vpt, _ = apply_vpt(s, VptParams(("yt", "xt")[i % 2], 0.0, tau, rng.uniform(0, g.height), rng.uniform(0, 1e6)))
        sts = apply_sts(s, ("yt", "xt")[i % 2], 0.0, tau, rng.uniform(0, g.width))
        rot, _ = apply_spatial_rotation(s, 0.0, (rng.uniform(0, g.height), rng.uniform(0, g.width)))
        for name, out in (("vpt", vpt), ("sts", sts), ("rotation", rot)):
            same = all(np.array_equal(getattr(out, f), getattr(s, f)) and getattr(out, f).dtype == getattr(s, f).dtype
                       for f in ("y", "x", "t", "p")) and out.geometry == g
            if not same:
                bad.append((i, name))
    elapsed = time.perf_counter() - start
    record(2, "theta=0 identity (bit-exact)", not bad and elapsed < 5,
           f"{len(bad)} mismatches over 100 streams ({int(sizes.sum())} events) x 3 transforms in {elapsed:.2f}s")


def test_c3_sts_vpt_consistency():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(1000):
        s = random_stream(rng, n=int(rng.integers(1, 300)), t_max=10**6)
        plane = ("yt", "xt")[int(rng.integers(2))]
        theta, tau = rng.uniform(-1.4, 1.4), 10 ** rng.uniform(-3, 4)
        c = rng.uniform(-10, max(s.geometry.width, s.geometry.height) + 10)
        coord = s.y if plane == "yt" else s.x
        sts = sts_time(s.t.astype(np.float64), coord, tau, theta, c)
        row = (s.matrix() @ vpt_matrix(VptParams(plane, -theta, tau, c, 0.0)))[:, 2] / math.cos(theta)
        worst = max(worst, float(np.abs(sts - row).max()))
    record(3, "STS equals stretched VPT time row", worst <= 1e-9, f"max |diff| {worst:.2e} over 1000 configs")


def sts_oracle(s, plane, theta, tau, c) -> Counter:
    coord = (s.y if plane == "yt" else s.x).astype(np.float64)
    t = s.t - np.tan(theta) * tau * (coord - c)
    t = np.copysign(np.floor(np.abs(t) + 0.5), t).astype(np.int64)
    t += s.t.min() - t.min()
    return Counter(zip(s.y.tolist(), s.x.tolist(), t.tolist(), s.p.tolist()))


def test_c4_conservation():
    rng = np.random.default_rng(104)
    runs = broken = sts_bad = 0
    for _ in range(300):
        s = random_stream(rng)
        g = s.geometry
        plane = ("yt", "xt")[int(rng.integers(2))]
        theta, tau = rng.uniform(-1.5, 1.5), 10 ** rng.uniform(-2, 4)
        results = [
            apply_vpt(s, VptParams(plane, theta, tau, rng.uniform(0, 64), rng.uniform(0, 1e6)))[1],
            apply_spatial_rotation(s, rng.uniform(-math.pi, math.pi), (rng.uniform(0, g.height), rng.uniform(0, g.width)))[1],
        ]
        for st in results:
            runs += 1
            broken += st.input_count != st.retained_count + st.discarded_spatial + st.discarded_temporal
        c = rng.uniform(0, 64)
        out = apply_sts(s, plane, theta, tau, c)
        runs += 1
        if len(out) != len(s) or (len(s) and Counter(map(tuple, out)) != sts_oracle(s, plane, theta, tau, c)):
            sts_bad += 1
    record(4, "conservation and STS field preservation", broken == 0 and sts_bad == 0,
           f"{runs} transform runs, {broken} conservation failures, {sts_bad} STS mismatches")


def test_c5_synthetic_oracle():
    start = time.perf_counter()
    g = SensorGeometry(5, 9)
    scene = UniformRamp(2.0, g, 1_000_000)
    ramp = generate(scene, ThresholdConfig(0.5))
    trains: dict = {}
    for y, x, t, _ in ramp:
        trains.setdefault((y, x), []).append(t)
    ramp_ok = len(trains) == g.width * g.height and all(v == [250000, 500000, 750000, 1000000] for v in trains.values())

    worst, cells = 0.0, 0
    yc = (g.height - 1) / 2
    for tau in (0.5, 2.0, 10.0, 100.0, 1000.0):
        for theta in (-1.2, -0.5, 0.0, 0.4, 1.0):
            pred = predict_sts_shift(scene, "yt", theta, tau, yc)
            out = apply_sts(ramp, "yt", theta, tau, yc)
            shifted = ramp.t + pred[ramp.y, ramp.x]
            offset = ramp.t.min() - shifted.min()
            got: dict = {}
            for y, x, t, _ in out:
                got.setdefault((y, x), []).append(t)
            for (y, x), ts in trains.items():
                expect = np.array(ts) + pred[y, x] + offset
                worst = max(worst, float(np.abs(np.array(got[(y, x)]) - expect).max()))
            cells += 1
    elapsed = time.perf_counter() - start
    record(5, "ramp trains and rigid STS shift", ramp_ok and worst <= 1 and elapsed < 30,
           f"4 events/pixel at 0.25 s: {ramp_ok}; max deviation {worst:.3f} us over {cells} (tau, theta) cells "
           f"in {elapsed:.2f}s")


def test_c6_io_round_trip():
    rng = np.random.default_rng(106)
    failures = 0
    for _ in range(1000):
        s = random_stream(rng, width=int(rng.integers(1, 257)), height=int(rng.integers(1, 257)), t_max=(1 << 23) - 1)
        for fmt in ("bin", "csv", "evt"):
            data = encode(s, fmt)
            back = decode(data, fmt, s.geometry)
            failures += back != s or encode(back, fmt) != data
    atis = list(decode(bytes([0x05, 0x0A, 0x80, 0x00, 0x64]), "bin", SensorGeometry(20, 20)))
    ok = failures == 0 and atis == [(10, 5, 100, 1)]
    record(6, "I/O round trip", ok, f"{failures} failures over 1000 streams x 3 formats; ATIS example -> {atis}")


def test_c7_rasterizers():
    rng = np.random.default_rng(107)
    g = SensorGeometry(6, 5)
    worst_mass = 0.0
    for _ in range(1000):
        bins = int(rng.integers(2, 10))
        t = int(rng.integers(1, 10**6))
        p = int(rng.choice([-1, 1]))
        s = canonicalize([(0, 0, 0, 1), (4, 5, 10**6, 1), (2, 3, t, p)], g)
        for signed in (True, False):
            v = voxel_grid(s, bins, signed=signed).values
            mass = v[:, 2, 3].sum() * (p if signed else 1)
            worst_mass = max(worst_mass, abs(mass - 1))
    dom_bad = perm_bad = 0
    for _ in range(1000):
        s = random_stream(rng)
        c, f = event_count(s).values, event_frame(s).values
        dom_bad += not (np.all(f <= c) and np.array_equal(f > 0, c > 0) and c.sum() == len(s))
        perm = rng.permutation(len(s))
        shuffled = EventStream(s.y[perm], s.x[perm], s.t[perm], s.p[perm], s.geometry)
        for kind in ("frame", "count", "voxel"):
            perm_bad += not np.array_equal(rasterize(s, kind).values, rasterize(shuffled, kind).values)
    ok = worst_mass <= 1e-9 and dom_bad == 0 and perm_bad == 0
    record(7, "rasterizer suite", ok, f"max |mass - 1| {worst_mass:.1e}; {dom_bad} domination and "
           f"{perm_bad} permutation failures over 1000 streams")


def test_c8_perturbation_grid():
    edge = generate(MovingEdge(40.0, SensorGeometry(32, 32), 1_000_000, contrast=1.0), ThresholdConfig(0.25))
    thetas = [-0.4, -0.1, 0.0, 0.1, 0.4]
    parts, ok = [], True
    for kind in ("frame", "count", "voxel"):
        d = np.array(cmd_perturb(edge, ["yt", "xt"], thetas, repr_kind=kind)["distance"])
        zero = d[:, 2]
        small, large = d[:, [1, 3]].mean(axis=1), d[:, [0, 4]].mean(axis=1)
        ok &= bool(np.all(zero == 0) and np.all(large > small))
        parts.append(f"{kind}: yt {small[0]:.3f}->{large[0]:.3f}, xt {small[1]:.3f}->{large[1]:.3f}")
    record(8, "perturbation grid on moving edge", ok, "; ".join(parts))


def test_c9_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("EVT_THREADS", raising=False)
    rng = np.random.default_rng(109)
    inputs = []
    for i in range(12):
        s = random_stream(rng, n=int(rng.integers(100, 3000)), width=64, height=48, t_max=200_000)
        p = tmp_path / "in" / f"rec{i}.{('evt', 'csv', 'bin')[i % 3]}"
        p.parent.mkdir(exist_ok=True)
        write_events(p, s)
        inputs.append(p)
    cfg = AugmentConfig(strategy="vpt-sts", seed=2024)
    runs = []
    for workers in (1, 8, 8):
        report = cmd_augment(inputs, tmp_path / "out", cfg, geometry=SensorGeometry(64, 48), workers=workers)
        report.pop("wall_time_s")
        for f in report["files"]:
            f.pop("wall_time_s")
        outputs = [(tmp_path / "out" / p.name).read_bytes() for p in inputs]
        runs.append((json.dumps(report, sort_keys=True), outputs))
    ok = all(r == runs[0] for r in runs[1:]) and '"failed": 0' in runs[0][0]
    record(9, "cmd_augment determinism", ok, "workers 1 vs 8 vs 8: reports and output bytes "
           + ("identical" if ok else "differ"))


def test_c10_throughput():
    rng = np.random.default_rng(110)
    s = random_stream(rng, n=1_000_000, width=640, height=480, t_max=10_000_000)
    p = VptParams("yt", 0.3, 10_000_000 / 640, 239.5, 5_000_000)
    apply_vpt(s, p)
    start = time.perf_counter()
    out, stats = apply_vpt(s, p)
    elapsed = time.perf_counter() - start
    record(10, "apply_vpt throughput", elapsed < 1.0,
           f"1e6 events in {elapsed:.3f}s ({stats.retained_count} retained)")
