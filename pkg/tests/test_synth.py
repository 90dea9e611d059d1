import math

import numpy as np
import pytest

from eventaug import MovingEdge, RotatingBar, SensorGeometry, ThresholdConfig, UniformRamp, generate, predict_sts_shift
from eventaug.core import InputDomainError, validate
from eventaug.synth import UnsupportedSceneError, parse_scene_config

G2 = SensorGeometry(2, 2)
SECOND = 1_000_000


def per_pixel(stream):
    out = {}
    for y, x, t, p in stream:
        out.setdefault((y, x), []).append((t, p))
    return out


def test_ramp_closed_form():
    s = generate(UniformRamp(2.0, G2, SECOND), ThresholdConfig(0.5))
    trains = per_pixel(s)
    assert len(trains) == 4
    for train in trains.values():
        assert train == [(250000, 1), (500000, 1), (750000, 1), (1000000, 1)]


def test_ramp_zero_rate():
    assert len(generate(UniformRamp(0.0, G2, SECOND), ThresholdConfig(0.5))) == 0


def test_ramp_negative_rate():
    s = generate(UniformRamp(-3.0, G2, SECOND), ThresholdConfig(0.5))
    assert len(s) == 4 * 6 and set(s.p.tolist()) == {-1}


@pytest.mark.parametrize("rate, C, dur", [(2.0, 0.5, SECOND), (1.7, 0.3, 900_000), (5.0, 0.2, 333_333)])
def test_ramp_count_and_spacing(rate, C, dur):
    s = generate(UniformRamp(rate, SensorGeometry(3, 2), dur), ThresholdConfig(C))
    n = math.floor(rate * dur / SECOND / C)
    for train in per_pixel(s).values():
        t = np.array([e[0] for e in train])
        assert len(t) == n
        assert np.all(np.abs(np.diff(t) - C / rate * SECOND) <= 1)


def test_ramp_refractory_thins_train():
    s = generate(UniformRamp(2.0, G2, SECOND), ThresholdConfig(0.5, refractory_us=300_000))
    for train in per_pixel(s).values():
        assert [t for t, _ in train] == [250000, 750000]


def test_ramp_jitter_changes_counts_deterministically():
    cfg = ThresholdConfig(0.5, jitter=0.1, seed=3)
    a = generate(UniformRamp(20.0, SensorGeometry(4, 4), SECOND), cfg)
    b = generate(UniformRamp(20.0, SensorGeometry(4, 4), SECOND), cfg)
    assert a == b
    assert len({len(v) for v in per_pixel(a).values()}) > 1


def test_moving_edge_one_burst_per_pixel():
    g = SensorGeometry(8, 3)
    s = generate(MovingEdge(8.0, g, SECOND, axis="x", contrast=1.1), ThresholdConfig(0.5))
    trains = per_pixel(s)
    assert len(trains) == 24
    for (y, x), train in trains.items():
        # floor(1.1 / 0.5) = 2 simultaneous events when the edge reaches x
        assert train == [(round((x + 0.5) / 8.0 * SECOND), 1)] * 2
    assert validate(s) == []


def test_moving_edge_negative_velocity_along_y():
    g = SensorGeometry(2, 4)
    s = generate(MovingEdge(-4.0, g, SECOND, axis="y", contrast=-0.5), ThresholdConfig(0.5))
    trains = per_pixel(s)
    # edge starts at y = 3.5 and reaches row y at (3.5 - y) / 4 s
    for (y, x), train in trains.items():
        assert train == [(round((3.5 - y) / 4 * SECOND), -1)]


def test_moving_edge_outside_duration_emits_nothing():
    s = generate(MovingEdge(1.0, SensorGeometry(8, 1), SECOND), ThresholdConfig(0.5))
    assert sorted({e.x for e in s}) == [0]


def test_rotating_bar_alternating_polarity():
    g = SensorGeometry(9, 9)
    s = generate(RotatingBar(2 * math.pi, g, SECOND, contrast=1.0, bar_width=1.0), ThresholdConfig(0.5))
    assert len(s) > 0 and validate(s) == []
    for train in per_pixel(s).values():
        pols = [p for _, p in train]
        # each enter (+2) is followed by an exit (-2)
        assert sum(pols) in (0, 2, -2)
    # the bar sweeps every ring outside its half width: the corner pixel is hit
    assert (0, 0) in per_pixel(s)


def test_rotating_bar_transitions_match_geometry():
    g = SensorGeometry(9, 9)
    omega = math.pi  # half turn per second
    s = generate(RotatingBar(omega, g, SECOND, contrast=0.5, bar_width=1.0), ThresholdConfig(0.5))
    # pixel at (y=4, x=8): distance 4 on the +x axis, inside the bar at t=0; exits at asin(0.5/4)/pi s
    train = per_pixel(s)[(4, 8)]
    assert train[0] == (round(math.asin(0.125) / math.pi * SECOND), -1)
    # and re-enters after a half turn, at (pi - asin(0.125)) / pi s
    assert train[1] == (round((math.pi - math.asin(0.125)) / math.pi * SECOND), 1)


def test_predict_shift():
    scene = UniformRamp(2.0, SensorGeometry(1, 20), SECOND)
    shift = predict_sts_shift(scene, "yt", math.pi / 4, 2.0, 4.0)
    assert shift[4, 0] == 0
    assert shift[10, 0] == pytest.approx(-12.0)
    assert shift[9, 0] == pytest.approx(-10.0)
    assert shift[0, 0] == pytest.approx(8.0)


def test_predict_shift_odd_symmetry():
    scene = UniformRamp(2.0, SensorGeometry(21, 1), SECOND)
    shift = predict_sts_shift(scene, "xt", 0.3, 5.0, 10.0)[0]
    for d in range(1, 11):
        assert shift[10 + d] == pytest.approx(-shift[10 - d])


def test_predict_shift_rejects_non_ramp():
    with pytest.raises(UnsupportedSceneError):
        predict_sts_shift(MovingEdge(1.0, G2, SECOND), "yt", 0.1, 1.0, 0.0)


def test_threshold_must_be_positive():
    with pytest.raises(InputDomainError):
        ThresholdConfig(0.0)


def test_scene_config_parsing():
    text = """
    # ramp for the docs
    kind = uniform_ramp
    rate = 2
    width = 2
    height = 2
    duration_us = 1000000
    threshold = 0.5
    """
    scene, cfg = parse_scene_config(text)
    assert scene == UniformRamp(2.0, G2, SECOND) and cfg == ThresholdConfig(0.5)
    assert len(generate(scene, cfg)) == 16


@pytest.mark.parametrize("text", ["kind = cube\n", "kind = uniform_ramp\nrate = x\n", "rate 2\n",
                                  "kind=uniform_ramp\nrate=1\nwidth=1\nheight=1\nduration_us=5\nthreshold=1\nbogus=1\n"])
def test_scene_config_errors(text):
    with pytest.raises(InputDomainError):
        parse_scene_config(text)
