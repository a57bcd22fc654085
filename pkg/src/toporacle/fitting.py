"""Stretched-exponential fits and oscillation detection for infidelity sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

FLOOR = 1e-14


@dataclass
class StretchedFit:
    """``ln(infidelity) = const + a T^b`` fitted over ``window``."""

    a: float
    b: float
    const: float
    window: tuple[float, float]
    residual: float
    points: int
    excluded: list[float] = field(default_factory=list)
    method: str = "profile"

    def predict(self, t) -> np.ndarray:
        return np.exp(self.const + self.a * np.asarray(t, dtype=float) ** self.b)

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "const": self.const,
            "window": list(self.window),
            "residual": self.residual,
            "points": self.points,
            "excluded_below_floor": self.excluded,
            "method": self.method,
        }


def _select(times, values, window):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    inside = (t >= lo) & (t <= hi)
    floor = inside & (v < FLOOR)
    keep = inside & ~floor
    return t[keep], v[keep], t[floor].tolist()


def _linear_given_b(t, y, b):
    x = t**b
    design = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((design @ coef - y) ** 2))
    return coef, rss


def fit_stretched_exponential(
    times, values, window=(4.0, 24.0), b_bounds=(0.2, 4.0), method: str = "profile"
) -> StretchedFit:
    """Least-squares fit of ``ln(values)`` against ``const + a T^b``.

    ``method="profile"`` solves the linear problem in ``(const, a)`` exactly
    for each trial ``b`` and minimizes the residual over ``b``.
    ``method="loglog"`` drops the constant and regresses
    ``ln(-ln v)`` on ``ln T``, which is only meaningful while ``v < 1``.
    Points below the numerical floor are excluded and reported.
    """
    t, v, excluded = _select(times, values, window)
    if len(t) < 3:
        raise ValueError(f"need at least 3 points above {FLOOR:g} inside window {window}")
    y = np.log(v)
    if method == "loglog":
        if np.any(y >= 0):
            raise ValueError("log-log linearization needs all values below 1")
        slope, icept = np.polyfit(np.log(t), np.log(-y), 1)
        a = -math.exp(icept)
        pred = a * t**slope
        resid = float(np.sqrt(np.mean((pred - y) ** 2)))
        return StretchedFit(a, float(slope), 0.0, tuple(window), resid, len(t), excluded, method)
    if method != "profile":
        raise ValueError(f"unknown fit method {method!r}")

    res = minimize_scalar(lambda b: _linear_given_b(t, y, b)[1], bounds=b_bounds, method="bounded",
                          options={"xatol": 1e-10})
    b = float(res.x)
    (const, a), rss = _linear_given_b(t, y, b)
    return StretchedFit(float(a), b, float(const), tuple(window), math.sqrt(rss / len(t)), len(t), excluded)


def local_maxima(values) -> list[int]:
    """Indices of strict interior local maxima."""
    v = np.asarray(values, dtype=float)
    return [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] > v[i + 1]]


def is_monotone_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= 0))


def decades(values) -> float:
    """Orders of magnitude between the largest and smallest positive value."""
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    return float(math.log10(v.max() / v.min()))


def geometric_sweep(lo: float, hi: float, k: int = 16) -> np.ndarray:
    if not 0 < lo < hi or k < 2:
        raise ValueError("geometric sweep needs 0 < lo < hi and k >= 2")
    return np.geomspace(lo, hi, k)


def parse_sweep(text: str) -> np.ndarray:
    """Parse ``a:b:k`` (geometric, k points) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("sweep must look like a:b:k")
        return geometric_sweep(float(parts[0]), float(parts[1]), int(parts[2]))
    values = np.array([float(x) for x in text.split(",") if x.strip()])
    if len(values) == 0 or np.any(values <= 0):
        raise ValueError("T values must be positive")
    return values
