"""Annealing control schedules.

Two dimensionless schedules give the pair ``(A(s), B(s))`` on ``s in [0, 1]``:
the tanh ramp used by the threshold oracle and the tanh pulse used by the
single-step zero-energy oracle. The exponential sweep works in physical time
and only provides the transverse field ``g(t)``; its couplings stay fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

DEFAULT_C = 10.0


def _check_unit_interval(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0) or np.any(np.isnan(s)):
        raise ValueError("schedule parameter s must lie in [0, 1]")
    return s


def _check_c(c: float) -> None:
    if not c > 0:
        raise ValueError(f"smoothness constant c must be positive, got {c}")


def eval_tanh_ramp(s, c: float = DEFAULT_C):
    """Return ``(A, B)`` with ``A = (1 + tanh c(4s-1))/2`` and ``B = 1 - A``."""
    _check_c(c)
    s = _check_unit_interval(s)
    t = np.tanh(c * (4.0 * s - 1.0))
    a = 0.5 * (1.0 + t)
    b = 0.5 * (1.0 - t)
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def eval_tanh_pulse(s, c: float = DEFAULT_C):
    """Return ``(A, B)`` for the pulse schedule.

    The first half is the tanh ramp. In the second half ``A`` switches back
    off and ``B`` continues down to ``-1``, so that ``A(0) ~ A(1) ~ 0``,
    ``B(0) ~ 1`` and ``B(1) ~ -1``. ``A`` is continuous at ``s = 1/2``; ``B``
    crosses zero there with a jump of ``1 - tanh c``, the same exponentially
    small size as the boundary deviations.
    """
    _check_c(c)
    s = _check_unit_interval(s)
    first = np.tanh(c * (4.0 * s - 1.0))
    second = np.tanh(c * (4.0 * s - 3.0))
    late = s > 0.5
    a = np.where(late, 0.5 * (1.0 - second), 0.5 * (1.0 + first))
    b = np.where(late, -0.5 * (1.0 + second), 0.5 * (1.0 - first))
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def eval_exp_sweep(t, t_char: float):
    """Transverse field ``g(t) = exp(-t / t_char)``."""
    if not t_char > 0:
        raise ValueError(f"t_char must be positive, got {t_char}")
    g = np.exp(-np.asarray(t, dtype=float) / t_char)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class TanhRamp:
    c: float = DEFAULT_C

    name = "tanh-ramp"

    def __post_init__(self):
        _check_c(self.c)

    def __call__(self, s):
        return eval_tanh_ramp(s, self.c)

    def boundary_deviation(self) -> float:
        """Largest deviation of the endpoint values from A(0)=B(1)=0, A(1)=B(0)=1."""
        a0, b0 = self(0.0)
        a1, b1 = self(1.0)
        return max(abs(a0), abs(1.0 - b0), abs(1.0 - a1), abs(b1))

    def describe(self) -> dict:
        return {"schedule": self.name, "c": self.c}


@dataclass(frozen=True)
class TanhPulse:
    c: float = DEFAULT_C

    name = "tanh-pulse"

    def __post_init__(self):
        _check_c(self.c)

    def __call__(self, s):
        return eval_tanh_pulse(s, self.c)

    def boundary_deviation(self) -> float:
        a0, b0 = self(0.0)
        a1, b1 = self(1.0)
        return max(abs(a0), abs(1.0 - b0), abs(a1), abs(1.0 + b1))

    def describe(self) -> dict:
        return {"schedule": self.name, "c": self.c}


@dataclass(frozen=True)
class ExpSweep:
    """Exponential field sweep over the physical window ``[t_min, t_max]``."""

    t_char: float = 1.0
    t_min: float = -10.0
    t_max: float = 10.0

    name = "exp-sweep"

    def __post_init__(self):
        if not self.t_char > 0:
            raise ValueError(f"t_char must be positive, got {self.t_char}")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be smaller than t_max")

    @classmethod
    def for_size(cls, t_char: float, n: int, eta: float = 1.0) -> "ExpSweep":
        """Window ``[-eta n t_char, eta n t_char]``, i.e. ``g`` spans ``e^{+-eta n}``."""
        half = eta * n * t_char
        return cls(t_char=t_char, t_min=-half, t_max=half)

    @property
    def duration(self) -> float:
        return self.t_max - self.t_min

    def g(self, t):
        return eval_exp_sweep(t, self.t_char)

    def time(self, s):
        """Map progress ``s in [0, 1]`` onto physical time."""
        s = _check_unit_interval(s)
        return self.t_min + s * self.duration

    def describe(self) -> dict:
        return {
            "schedule": self.name,
            "t_char": self.t_char,
            "t_min": self.t_min,
            "t_max": self.t_max,
        }


Schedule = Union[TanhRamp, TanhPulse, ExpSweep]


def make_schedule(
    name: str,
    c: float = DEFAULT_C,
    t_char: float = 1.0,
    t_min: float | None = None,
    t_max: float | None = None,
    n: int = 1,
    eta: float = 1.0,
) -> Schedule:
    """Build a schedule from CLI-style arguments."""
    if name == "tanh-ramp":
        return TanhRamp(c)
    if name == "tanh-pulse":
        return TanhPulse(c)
    if name == "exp-sweep":
        default = ExpSweep.for_size(t_char, n, eta)
        return ExpSweep(
            t_char=t_char,
            t_min=default.t_min if t_min is None else t_min,
            t_max=default.t_max if t_max is None else t_max,
        )
    raise ValueError(f"unknown schedule {name!r}")


def exp_boundary_bound(c: float) -> float:
    """Bound ``10 e^{-2c}`` on tanh-schedule endpoint deviations."""
    return 10.0 * math.exp(-2.0 * c)
