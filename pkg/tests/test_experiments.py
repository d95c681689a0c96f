import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfi_twoqubit.experiments import (
    TimeSeries,
    coupling_from_frequency,
    default_t_max,
    find_peak,
    gamma_tm_scan,
    local_maxima,
    max_qfi_vs_a,
    normalize_quantity,
    oscillation_frequency,
    scan_summary,
    sweep_time,
)
from qfi_twoqubit.qfi import qfi_gamma_closed


def series(f, t0, t1, n):
    t = np.linspace(t0, t1, n)
    return TimeSeries(t, f(t))


def test_timeseries_validation():
    with pytest.raises(ValueError, match="increasing"):
        TimeSeries([0, 1, 1], [0, 0, 0])
    with pytest.raises(ValueError, match="equal length"):
        TimeSeries([0, 1], [0])
    with pytest.raises(ValueError, match="finite"):
        TimeSeries([0, 1], [0, np.nan])


def test_normalize_quantity():
    assert normalize_quantity("F-gamma") == "f_gamma"
    assert normalize_quantity("concurrence_of_state") == "concurrence"
    with pytest.raises(ValueError):
        normalize_quantity("entropy")


def test_default_t_max():
    assert default_t_max("f_gamma", 0.1) == pytest.approx(80.0)
    assert default_t_max("f_v", 0.1, 0.2) == pytest.approx(80.0)
    assert default_t_max("f_v", 1.0, 0.2) == pytest.approx(15 * math.pi)


def test_sweep_f_gamma_single_maximum_then_decay():
    s = sweep_time("f_gamma", 0.5, gamma=0.1, t_max=50.0)
    assert s.times[0] == 0 and s.times[-1] == 50.0 and len(s) == 2000
    assert len(local_maxima(s)) == 1
    long = sweep_time("f_gamma", 0.5, gamma=0.1, t_max=300.0)
    assert long.values[-1] < 1e-3 * long.values.max()


def test_sweep_f_v_zero_without_phase():
    s = sweep_time("f_v", 0.8, chi=0.0, gamma=0.1, v=0.2)
    assert np.all(s.values == 0)


@pytest.mark.parametrize("v", [0.2, 0.5])
def test_sweep_f_v_oscillates(v):
    s = sweep_time("f_v", 0.8, chi=0.5, gamma=0.1, v=v, t_max=6 * math.pi / (2 * v))
    assert len(local_maxima(s)) >= 3


def test_sweep_deterministic():
    a = sweep_time("concurrence", 0.3, chi=1.0, gamma=0.2, v=0.5, t_max=10.0, n_points=50)
    b = sweep_time("concurrence", 0.3, chi=1.0, gamma=0.2, v=0.5, t_max=10.0, n_points=50)
    assert np.array_equal(a.values, b.values)
    assert a.meta == b.meta


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError, match="n_points"):
        sweep_time("f_gamma", 0.5, n_points=1)
    with pytest.raises(ValueError, match="t_max"):
        sweep_time("f_gamma", 0.5, t_max=-1.0)


def test_find_peak_t2_exp():
    s = series(lambda t: t ** 2 * np.exp(-t), 0, 10, 201)
    p = find_peak(s)
    assert abs(p.t_peak - 2.0) <= p.refinement_width
    assert p.value_peak == pytest.approx(4 * math.exp(-2), rel=1e-4)


def test_find_peak_monotone_is_boundary_error():
    with pytest.raises(ValueError, match="boundary"):
        find_peak(series(lambda t: t, 0, 1, 50))


def test_find_peak_constant_error():
    with pytest.raises(ValueError, match="constant"):
        find_peak(series(lambda t: 0 * t + 1, 0, 1, 50))


def test_find_peak_matches_dense_grid():
    s = sweep_time("f_gamma", 0.5, gamma=0.1)
    p = find_peak(s)
    dense = np.linspace(0, 80, 400001)
    vals = qfi_gamma_closed(0.5, 0.1, dense)
    k = np.argmax(vals)
    assert p.t_peak == pytest.approx(dense[k], rel=1e-3)
    assert p.value_peak == pytest.approx(vals[k], rel=1e-3)
    i = int(np.argmax(s.values))
    assert p.value_peak >= s.values[i - 1] and p.value_peak >= s.values[i + 1]


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.5, 9.5), w=st.floats(0.3, 3.0), n=st.integers(20, 400))
def test_find_peak_within_one_spacing(c, w, n):
    s = series(lambda t: np.exp(-((t - c) / w) ** 2), 0, 10, n)
    try:
        p = find_peak(s)
    except ValueError:
        return  # peak fell on the boundary sample
    assert abs(p.t_peak - c) <= p.refinement_width


def test_scan_summary_exact_law():
    g = np.array([0.05, 0.1, 0.2, 0.4])
    s = scan_summary(0.5, g, 1.7 / g)
    assert s.r2 == pytest.approx(1.0, abs=1e-12)
    assert s.cv == pytest.approx(0.0, abs=1e-12)
    assert s.slope == pytest.approx(1 / 1.7)


def test_gamma_tm_scan_constant_product():
    s = gamma_tm_scan(0.5, [0.05, 0.1, 0.2, 0.3, 0.5])
    assert s.cv <= 0.02
    assert abs(s.intercept) <= 0.02 * s.slope * 0.05
    assert s.r2 > 0.999


@pytest.mark.parametrize("gammas", [[0.0, 0.1, 0.2, 0.3], [-0.1, 0.1, 0.2, 0.3], [0.1, 0.1, 0.2, 0.3]])
def test_gamma_tm_scan_rejects(gammas):
    with pytest.raises(ValueError):
        gamma_tm_scan(0.5, gammas)


def test_max_f_gamma_increases_with_a():
    r = max_qfi_vs_a("f_gamma", np.linspace(0, 1, 11), gamma=0.1)
    assert np.all(np.diff(r.max_values) > 0)
    assert np.argmin(r.max_values) == 0
    assert r.concurrence[0] == pytest.approx(2 / 3)
    assert r.concurrence[5] == pytest.approx(1 / 3)
    assert r.display_scale == 50


def test_max_f_v_decreases_with_a():
    r = max_qfi_vs_a("f_v", np.linspace(0, 1, 11), chi=0.5, gamma=0.1, v=0.2)
    assert np.all(np.diff(r.max_values) < 0)
    assert np.argmin(r.max_values) == 10
    assert r.display_scale == 15


def test_oscillation_frequency_pure_cos2():
    s = series(lambda t: np.cos(0.4 * t) ** 2, 0, 200, 4000)
    assert oscillation_frequency(s) == pytest.approx(0.4 / math.pi, rel=1e-4)


def test_oscillation_frequency_constant_errors():
    with pytest.raises(ValueError, match="no oscillation"):
        oscillation_frequency(series(lambda t: 0 * t + 2, 0, 10, 100))


def test_oscillation_frequency_too_short():
    with pytest.raises(ValueError, match="64"):
        oscillation_frequency(series(np.cos, 0, 10, 32))


def test_oscillation_frequency_too_few_periods():
    with pytest.raises(ValueError, match="periods"):
        oscillation_frequency(series(lambda t: np.cos(0.5 * t), 0, 10, 200))


@pytest.mark.parametrize("v", [0.2, 0.5, 1.0])
def test_coupling_recovered(v):
    s = sweep_time("f_v", 0.8, chi=0.5, gamma=0.1, v=v, t_max=80.0)
    assert coupling_from_frequency(oscillation_frequency(s)) == pytest.approx(v, rel=0.02)


@settings(max_examples=20, deadline=None)
@given(k=st.floats(1e-3, 1e3))
def test_oscillation_frequency_scale_invariant(k):
    s = sweep_time("f_v", 0.8, chi=0.5, gamma=0.1, v=0.2, t_max=80.0)
    scaled = TimeSeries(s.times, k * s.values)
    assert oscillation_frequency(scaled) == pytest.approx(oscillation_frequency(s), rel=1e-8)
