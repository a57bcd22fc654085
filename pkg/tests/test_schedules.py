import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toporacle import schedules as sc

unit = st.floats(0.0, 1.0)


def test_ramp_quarter_point():
    for c in (0.5, 3.0, 10.0):
        a, b = sc.eval_tanh_ramp(0.25, c)
        assert a == pytest.approx(0.5) and b == pytest.approx(0.5)


def test_ramp_start_value():
    a, _ = sc.eval_tanh_ramp(0.0, 10.0)
    assert a == pytest.approx(0.5 * (1 - math.tanh(10.0)), rel=1e-9)
    assert a == pytest.approx(2.06e-9, rel=1e-2)


@settings(max_examples=200, deadline=None)
@given(unit, st.floats(0.1, 40.0))
def test_ramp_sums_to_one(s, c):
    a, b = sc.eval_tanh_ramp(s, c)
    assert a + b == pytest.approx(1.0, abs=1e-15)


def test_ramp_monotone():
    s = np.linspace(0, 1, 2001)
    a, _ = sc.eval_tanh_ramp(s, 10.0)
    assert np.all(np.diff(a) >= 0)


@pytest.mark.parametrize("c", [5.0, 7.5, 10.0, 20.0])
def test_ramp_boundary_bound(c):
    assert sc.TanhRamp(c).boundary_deviation() <= sc.exp_boundary_bound(c)


def test_pulse_examples():
    a, b = sc.eval_tanh_pulse(0.25, 4.0)
    assert (a, b) == (pytest.approx(0.5), pytest.approx(0.5))
    a, b = sc.eval_tanh_pulse(0.75, 4.0)
    assert (a, b) == (pytest.approx(0.5), pytest.approx(-0.5))
    a, b = sc.eval_tanh_pulse(1.0, 10.0)
    assert a == pytest.approx(2.06e-9, rel=1e-2)
    assert b == pytest.approx(-(1 - a), abs=1e-15)
    a, b = sc.eval_tanh_pulse(0.0, 10.0)
    assert a == pytest.approx(2.06e-9, rel=1e-2) and b == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("c", [1.0, 5.0, 10.0])
def test_pulse_junction_at_half(c):
    eps = 1e-13
    a_lo, b_lo = sc.eval_tanh_pulse(0.5 - eps, c)
    a_hi, b_hi = sc.eval_tanh_pulse(0.5 + eps, c)
    assert a_lo == pytest.approx(a_hi, abs=1e-10)
    assert abs(b_lo - b_hi) <= (1 - math.tanh(c)) + 1e-10
    assert b_lo >= 0 >= b_hi


def test_pulse_second_half_decreasing():
    s = np.linspace(0.5001, 1, 500)
    a, b = sc.eval_tanh_pulse(s, 10.0)
    assert np.all(np.diff(b) <= 0) and np.all(np.diff(a) <= 0)


def test_pulse_boundary_bound():
    for c in (5.0, 10.0):
        assert sc.TanhPulse(c).boundary_deviation() <= sc.exp_boundary_bound(c)


def test_exp_sweep_values():
    assert sc.eval_exp_sweep(0.0, 3.0) == 1.0
    assert sc.eval_exp_sweep(2.0, 2.0) == pytest.approx(math.exp(-1))
    sweep = sc.ExpSweep.for_size(1.5, 10, 1.0)
    assert sweep.g(sweep.t_min) == pytest.approx(math.exp(10))
    assert sweep.g(sweep.t_min) == pytest.approx(2.2e4, rel=0.01)
    assert sweep.duration == pytest.approx(2 * 10 * 1.5)
    assert sweep.time(0.0) == sweep.t_min and sweep.time(1.0) == sweep.t_max


@pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan")])
def test_out_of_range_progress(bad):
    with pytest.raises(ValueError):
        sc.eval_tanh_ramp(bad)
    with pytest.raises(ValueError):
        sc.eval_tanh_pulse(bad)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        sc.TanhRamp(0.0)
    with pytest.raises(ValueError):
        sc.TanhPulse(-1.0)
    with pytest.raises(ValueError):
        sc.ExpSweep(0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        sc.ExpSweep(1.0, 1.0, -1.0)


def test_make_schedule():
    assert sc.make_schedule("tanh-ramp", c=4.0) == sc.TanhRamp(4.0)
    assert sc.make_schedule("tanh-pulse") == sc.TanhPulse(10.0)
    sw = sc.make_schedule("exp-sweep", t_char=2.0, n=3)
    assert (sw.t_min, sw.t_max) == (-6.0, 6.0)
    assert sc.make_schedule("exp-sweep", t_char=2.0, t_min=-1.0, t_max=5.0).t_max == 5.0
    with pytest.raises(ValueError):
        sc.make_schedule("linear")


def test_schedules_hashable_and_described():
    assert hash(sc.TanhRamp(10.0)) == hash(sc.TanhRamp(10.0))
    assert sc.TanhPulse(3.0).describe()["c"] == 3.0
