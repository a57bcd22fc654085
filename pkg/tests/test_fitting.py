import numpy as np
import pytest

from toporacle import fitting


def test_loglog_recovers_synthetic_exponent():
    t = np.geomspace(4, 24, 12)
    v = np.exp(-0.7 * t**1.3)
    fit = fitting.fit_stretched_exponential(t, v, method="loglog")
    assert fit.b == pytest.approx(1.3, rel=1e-9)
    assert fit.a == pytest.approx(-0.7, rel=1e-9)
    assert fit.residual < 1e-9


def test_profile_recovers_constant():
    t = np.geomspace(4, 24, 12)
    v = np.exp(-1.5 - 0.3 * t**1.1)
    fit = fitting.fit_stretched_exponential(t, v, method="profile")
    assert fit.b == pytest.approx(1.1, rel=1e-5)
    assert fit.const == pytest.approx(-1.5, rel=1e-4)
    assert np.allclose(fit.predict(t), v, rtol=1e-5)


def test_floor_points_are_excluded_and_reported():
    t = np.array([4.0, 6, 8, 10, 20])
    v = np.exp(-t)
    v[-1] = 1e-16
    fit = fitting.fit_stretched_exponential(t, v, window=(4, 24), method="loglog")
    assert fit.excluded == [20.0]
    assert fit.points == 4


def test_window_and_errors():
    t = np.geomspace(1, 100, 20)
    v = np.exp(-0.1 * t)
    fit = fitting.fit_stretched_exponential(t, v, window=(10, 50), method="loglog")
    assert fit.window == (10, 50)
    assert fit.as_dict()["window"] == [10, 50]
    with pytest.raises(ValueError):
        fitting.fit_stretched_exponential(t, v, window=(200, 300))
    with pytest.raises(ValueError):
        fitting.fit_stretched_exponential(t, v, method="spline")
    with pytest.raises(ValueError):
        fitting.fit_stretched_exponential([1, 2, 3], [1.0, 0.5, 0.2], window=(0, 5), method="loglog")


def test_local_maxima_and_monotone():
    assert fitting.local_maxima([1, 3, 2, 4, 1]) == [1, 3]
    assert fitting.local_maxima([3, 2, 1]) == []
    assert fitting.is_monotone_decreasing([3, 2, 2, 1])
    assert not fitting.is_monotone_decreasing([3, 4])
    assert fitting.decades([1e-2, 1.0, 1e-8]) == pytest.approx(8.0)


def test_sweeps():
    s = fitting.geometric_sweep(2, 30)
    assert len(s) == 16 and s[0] == pytest.approx(2) and s[-1] == pytest.approx(30)
    assert np.allclose(fitting.parse_sweep("2:30:16"), s)
    assert list(fitting.parse_sweep("1,2.5,4")) == [1.0, 2.5, 4.0]
    for bad in ["1:2", "0:3:4", "-1,2", ""]:
        with pytest.raises(ValueError):
            fitting.parse_sweep(bad)
