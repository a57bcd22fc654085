"""Adiabatic Grover oracles built sector by sector.

The annealing Hamiltonians commute with the Ising energy, so the joint
evolution splits into one 3x3 spin-1 problem per distinct energy ``E_k``.
Every sector starts in ``|0_x>``. Adiabatically the ancilla follows the
zero-projection state of the sector field and picks up a topological
``pi`` phase exactly in the sectors whose field ends reversed.

A realization stores, per sector, the *working-basis* unitary: the raw
propagator followed by the fixed ancilla rotation that maps the ideal final
axis back onto ``x``. Realizations therefore compose directly and act on a
joint state whose ancilla is kept in ``|0_x>`` between calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from . import npp
from .schedules import ExpSweep, Schedule, TanhPulse, TanhRamp
from .spin import (
    ZERO_X,
    ZERO_Z,
    SectorPropagator,
    propagate,
    rotation_step,
    zero_projection_state,
)

# R_y(pi/2) takes |0_z> to |0_x> in the zero-state phase convention.
Z_TO_X = rotation_step((0.0, 1.0, 0.0), math.pi / 2)


class OracleError(RuntimeError):
    """The sector field vanishes inside a sector that must stay gapped."""


def check_half_integer(level: float) -> float:
    level = float(level)
    if abs(level - math.floor(level) - 0.5) > 1e-12:
        raise ValueError(f"threshold {level} must be a half-integer (k + 1/2)")
    return level


def nearest_half_integer(level: float) -> float:
    return math.floor(level) + 0.5


@dataclass(frozen=True)
class Threshold:
    """Mark energies below ``level``."""

    level: float

    def __post_init__(self):
        check_half_integer(self.level)


@dataclass(frozen=True)
class Npp2SingleStep:
    """Mark every nonzero energy in one anneal."""


@dataclass(frozen=True)
class ExpSweepThreshold:
    """Threshold oracle with fixed couplings and an exponentially decaying transverse field."""

    level: float
    eta: float = 1.0

    def __post_init__(self):
        check_half_integer(self.level)


Variant = Union[Threshold, Npp2SingleStep, ExpSweepThreshold]


@dataclass(frozen=True)
class OracleConfig:
    variant: Variant
    schedule: Schedule
    total_time: float | None = None
    steps: int | None = None
    tol: float | None = None

    def __post_init__(self):
        if isinstance(self.variant, ExpSweepThreshold):
            if not isinstance(self.schedule, ExpSweep):
                raise ValueError("ExpSweepThreshold needs an ExpSweep schedule")
            if self.total_time is None:
                object.__setattr__(self, "total_time", self.schedule.duration)
            elif abs(self.total_time - self.schedule.duration) > 1e-9 * self.schedule.duration:
                raise ValueError("total_time must equal the sweep window t_max - t_min")
        else:
            if isinstance(self.schedule, ExpSweep):
                raise ValueError("ExpSweep schedules only drive ExpSweepThreshold")
            if self.total_time is None or not self.total_time > 0:
                raise ValueError("total_time must be positive")
        if self.steps is not None and self.steps < 1:
            raise ValueError("steps must be at least 1")

    @classmethod
    def threshold(cls, level: float, total_time: float, c: float = 10.0, **kw) -> "OracleConfig":
        return cls(Threshold(level), TanhRamp(c), total_time, **kw)

    @classmethod
    def npp2(cls, total_time: float, c: float = 10.0, **kw) -> "OracleConfig":
        return cls(Npp2SingleStep(), TanhPulse(c), total_time, **kw)

    @classmethod
    def exp_sweep(cls, level: float, t_char: float, n: int, eta: float = 1.0, **kw) -> "OracleConfig":
        return cls(ExpSweepThreshold(level, eta), ExpSweep.for_size(t_char, n, eta), **kw)

    def describe(self) -> dict:
        out = dict(self.schedule.describe())
        out["variant"] = type(self.variant).__name__
        if hasattr(self.variant, "level"):
            out["level"] = self.variant.level
        out["total_time"] = self.total_time
        return out


def sector_field(e_k, config: OracleConfig, s) -> np.ndarray:
    """Effective ancilla field in the sector(s) ``e_k``, shape ``e_k.shape + s.shape + (3,)``.

    Threshold: ``(B, 0, A (E_k - E))``. Single-step zero-energy oracle:
    ``(B, 0, A E_k)``; the coupling enters along ``z`` so that nonzero sectors
    sweep the field through a pole while the zero sector keeps ``B I_x``.
    Exponential sweep: ``(g(t), 0, E_k - E)``.
    """
    e_k = np.asarray(e_k, dtype=float)[..., None]
    s = np.asarray(s, dtype=float)
    v = config.variant
    if isinstance(v, ExpSweepThreshold):
        sched: ExpSweep = config.schedule
        g = sched.g(sched.time(s))
        bx = np.broadcast_to(g, e_k.shape[:-1] + s.shape)
        bz = np.broadcast_to(e_k - v.level, bx.shape)
    else:
        a, b = config.schedule(s)
        a, b = np.asarray(a), np.asarray(b)
        shift = v.level if isinstance(v, Threshold) else 0.0
        bz = a * (e_k - shift)
        bx = np.broadcast_to(b, bz.shape)
    return np.stack([bx, np.zeros_like(bx), bz], axis=-1)


def ideal_sign(e_k: float, variant: Variant) -> int:
    if isinstance(variant, Npp2SingleStep):
        return 1 if e_k == 0 else -1
    return -1 if e_k < variant.level else 1


def _final_axis(variant: Variant) -> np.ndarray:
    return ZERO_X if isinstance(variant, Npp2SingleStep) else ZERO_Z


def ideal_sector_unitary(sign: int) -> np.ndarray:
    """``1 + (sign - 1)|0_x><0_x|``: the sign on ``|0_x>``, identity elsewhere."""
    return np.eye(3, dtype=complex) + (sign - 1) * np.outer(ZERO_X, ZERO_X.conj())


def _overlaps(unitaries: np.ndarray) -> np.ndarray:
    return np.einsum("i,kij,j->k", ZERO_X.conj(), unitaries, ZERO_X)


@dataclass
class OracleRealization:
    """Per-sector unitaries of one oracle call plus their diagnostics."""

    energies: np.ndarray
    unitaries: np.ndarray
    signs: np.ndarray
    phases: np.ndarray
    leakages: np.ndarray
    anneals: int = 1
    label: str = ""
    propagators: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=np.int64)
        if np.any(np.diff(self.energies) <= 0):
            raise ValueError("sector energies must be strictly increasing")

    @property
    def ideal(self) -> bool:
        return not self.propagators

    def position(self, e_k) -> np.ndarray:
        """Sector slot of each energy; every energy must have a sector."""
        e_k = np.asarray(e_k, dtype=np.int64)
        pos = np.clip(np.searchsorted(self.energies, e_k), 0, len(self.energies) - 1)
        if np.any(self.energies[pos] != e_k):
            missing = sorted(set(np.asarray(e_k[self.energies[pos] != e_k]).ravel().tolist()))
            raise ValueError(f"oracle has no sector for energies {missing}")
        return pos

    def unitary(self, e_k: int) -> np.ndarray:
        return self.unitaries[int(self.position(e_k))]

    def sign(self, e_k: int) -> int:
        return int(self.signs[int(self.position(e_k))])

    def phase_errors(self) -> np.ndarray:
        return np.abs(np.exp(1j * self.phases) - self.signs)

    def marked(self) -> list[int]:
        return [int(e) for e, sg in zip(self.energies, self.signs) if sg < 0]

    def then(self, other: "OracleRealization") -> "OracleRealization":
        """Apply ``self`` first and ``other`` second."""
        if not np.array_equal(self.energies, other.energies):
            raise ValueError("realizations cover different sector energies")
        u = other.unitaries @ self.unitaries
        amp = _overlaps(u)
        return OracleRealization(
            energies=self.energies,
            unitaries=u,
            signs=self.signs * other.signs,
            phases=np.angle(amp),
            leakages=np.clip(1.0 - np.abs(amp) ** 2, 0.0, 1.0),
            anneals=self.anneals + other.anneals,
            label=f"{self.label}+{other.label}",
            propagators={**{("first", k): v for k, v in self.propagators.items()},
                         **{("second", k): v for k, v in other.propagators.items()}},
        )


def ideal_realization(energies, signs, anneals: int = 1, label: str = "ideal") -> OracleRealization:
    energies = np.asarray(energies, dtype=np.int64)
    signs = np.asarray(signs, dtype=int)
    return OracleRealization(
        energies=energies,
        unitaries=np.eye(3, dtype=complex) + (signs - 1)[:, None, None] * np.outer(ZERO_X, ZERO_X.conj()),
        signs=signs,
        phases=np.where(signs < 0, math.pi, 0.0),
        leakages=np.zeros(len(energies)),
        anneals=anneals,
        label=label,
    )


def ideal_oracle(instance: npp.PartitionInstance, variant: Variant) -> OracleRealization:
    energies = np.array(npp.spectrum(instance).energies(), dtype=np.int64)
    if isinstance(variant, Npp2SingleStep):
        signs = np.where(energies == 0, 1, -1)
    else:
        signs = np.where(energies < variant.level, -1, 1)
    return ideal_realization(energies, signs, label=f"ideal-{type(variant).__name__}")


def _sector_path(energies: np.ndarray, config: OracleConfig):
    return lambda s: sector_field(energies, config, s)


def _check_gapped(energies: np.ndarray, config: OracleConfig, steps: int) -> None:
    v = config.variant
    gapped = energies != 0 if isinstance(v, Npp2SingleStep) else np.ones(len(energies), bool)
    if not np.any(gapped):
        return
    s = np.arange(2 * steps + 1) / (2 * steps)  # grid points and midpoints
    mag = np.linalg.norm(sector_field(energies[gapped], config, s), axis=-1)
    if mag.min() < 1e-6 * mag.max():
        bad = energies[gapped][np.argmin(mag.min(axis=-1))]
        raise OracleError(f"sector field vanishes during the anneal (sector E_k={int(bad)})")


def propagate_sectors(energies, config: OracleConfig) -> tuple[np.ndarray, int]:
    """Raw propagators for the given sector energies, stacked along axis 0."""
    energies = np.asarray(energies, dtype=np.int64)
    u, steps = propagate(_sector_path(energies, config), config.total_time, config.steps, tol=config.tol)
    return u, steps


def build_oracle(instance: npp.PartitionInstance, config: OracleConfig) -> OracleRealization:
    """Realize one annealed oracle call, propagating each distinct energy once."""
    energies = np.array(npp.spectrum(instance).energies(), dtype=np.int64)
    return _build_for_energies(tuple(energies.tolist()), config)


@lru_cache(maxsize=256)
def _build_for_energies(energies: tuple[int, ...], config: OracleConfig) -> OracleRealization:
    e = np.array(energies, dtype=np.int64)
    raw, steps = propagate_sectors(e, config)
    _check_gapped(e, config, min(steps, 4096))
    final = _final_axis(config.variant)
    amp = np.einsum("i,kij,j->k", final.conj(), raw, ZERO_X)
    working = raw if isinstance(config.variant, Npp2SingleStep) else Z_TO_X @ raw
    desc = config.describe()
    return OracleRealization(
        energies=e,
        unitaries=working,
        signs=np.array([ideal_sign(int(x), config.variant) for x in e]),
        phases=np.angle(amp),
        leakages=np.clip(1.0 - np.abs(amp) ** 2, 0.0, 1.0),
        anneals=1,
        label=desc["variant"],
        propagators={int(x): SectorPropagator(raw[i], int(x), steps, desc) for i, x in enumerate(e)},
    )


def range_oracle(
    instance: npp.PartitionInstance,
    level: float,
    schedule: Schedule | None = None,
    total_time: float = 30.0,
    steps: int | None = None,
    mode: str = "annealed",
    tol: float | None = None,
) -> OracleRealization:
    """Mark energies in ``(-1/2, level)`` by thresholding at ``level`` and then at ``-1/2``."""
    level = check_half_integer(level)
    if level <= -0.5:
        raise ValueError("range oracle needs level > -1/2")
    if mode == "ideal":
        upper = ideal_oracle(instance, Threshold(level))
        lower = ideal_oracle(instance, Threshold(-0.5))
    elif mode == "annealed":
        schedule = TanhRamp() if schedule is None else schedule
        upper = build_oracle(instance, OracleConfig(Threshold(level), schedule, total_time, steps, tol))
        lower = build_oracle(instance, OracleConfig(Threshold(-0.5), schedule, total_time, steps, tol))
    else:
        raise ValueError(f"unknown oracle mode {mode!r}")
    out = upper.then(lower)
    out.label = f"range({-0.5},{level})"
    return out


def npp2_oracle(
    instance: npp.PartitionInstance,
    schedule: Schedule | None = None,
    total_time: float = 30.0,
    steps: int | None = None,
    mode: str = "annealed",
    single_step: bool = True,
    tol: float | None = None,
) -> OracleRealization:
    """Zero-energy oracle: one pulse anneal, or the range oracle at ``+-1/2``."""
    if not single_step:
        return range_oracle(instance, 0.5, schedule, total_time, steps, mode, tol)
    if mode == "ideal":
        return ideal_oracle(instance, Npp2SingleStep())
    if mode != "annealed":
        raise ValueError(f"unknown oracle mode {mode!r}")
    schedule = TanhPulse() if schedule is None else schedule
    return build_oracle(instance, OracleConfig(Npp2SingleStep(), schedule, total_time, steps, tol))


@dataclass
class FidelityReport:
    total_time: float
    infidelity: float
    phase_errors: dict[int, float]
    leakages: dict[int, float]
    schedule: dict

    @property
    def max_phase_error(self) -> float:
        return max(self.phase_errors.values())

    @property
    def max_leakage(self) -> float:
        return max(self.leakages.values())


def infidelity(instance: npp.PartitionInstance, config: OracleConfig) -> FidelityReport:
    """One minus the overlap probability with the ideal signed output.

    The input is the uniform superposition times ``|0_x>``; the ideal output
    carries the ideal signs with the ancilla in the zero-projection state of
    the final field axis.
    """
    spec = npp.spectrum(instance)
    real = build_oracle(instance, config)
    weights = np.array([spec.multiplicity(int(e)) for e in real.energies], dtype=float) / spec.total
    raw = np.stack([real.propagators[int(e)].u for e in real.energies])
    final = _final_axis(config.variant)
    amp = np.einsum("i,kij,j->k", final.conj(), raw, ZERO_X)
    overlap = np.sum(weights * real.signs * amp)
    # Residual norm of the component orthogonal to the ideal output; unlike
    # 1 - |overlap|^2 it keeps relative precision for tiny infidelities.
    ideal = np.sqrt(weights)[:, None] * real.signs[:, None] * final[None, :]
    actual = np.sqrt(weights)[:, None] * (raw @ ZERO_X)
    inf = float(min(1.0, np.sum(np.abs(actual - overlap * ideal) ** 2)))
    return FidelityReport(
        total_time=float(config.total_time),
        infidelity=inf,
        phase_errors={int(e): float(p) for e, p in zip(real.energies, real.phase_errors())},
        leakages={int(e): float(x) for e, x in zip(real.energies, real.leakages)},
        schedule=config.describe(),
    )


@dataclass
class DiffusionOperator:
    """Reflection about the uniform superposition, exact or built from an anneal.

    The annealed form conjugates the oracle thresholded at ``E_max - 1/2``
    (which flips every state except all-up) by the global qubit rotation
    ``exp(-i pi/4 sum_k sigma^y_k)``.
    """

    n: int
    mode: str
    realization: OracleRealization | None = None

    @property
    def anneals(self) -> int:
        return 0 if self.realization is None else self.realization.anneals


def diffusion_operator(
    instance: npp.PartitionInstance,
    mode: str = "exact",
    schedule: Schedule | None = None,
    total_time: float = 30.0,
    steps: int | None = None,
    tol: float | None = None,
) -> DiffusionOperator:
    if mode == "exact":
        return DiffusionOperator(instance.n, "exact")
    level = instance.e_max - 0.5
    if mode == "ideal":
        return DiffusionOperator(instance.n, "ideal", ideal_oracle(instance, Threshold(level)))
    if mode == "annealed":
        schedule = TanhRamp() if schedule is None else schedule
        real = build_oracle(instance, OracleConfig(Threshold(level), schedule, total_time, steps, tol))
        return DiffusionOperator(instance.n, "annealed", real)
    raise ValueError(f"unknown diffusion mode {mode!r}")


@dataclass
class Misalignment:
    errors: dict[int, float]
    total_time: float


def boundary_misalignment(instance: npp.PartitionInstance, config: OracleConfig) -> Misalignment:
    """Preparation error ``1 - |<0_b(t_min)|0_x>|^2`` per sector of the exponential sweep."""
    if not isinstance(config.variant, ExpSweepThreshold):
        raise ValueError("boundary misalignment applies to the exponential sweep only")
    energies = np.array(npp.spectrum(instance).energies(), dtype=np.int64)
    b0 = sector_field(energies, config, np.array([0.0]))[:, 0, :]
    states = zero_projection_state(b0)
    ov = states.conj() @ ZERO_X
    # residual norm, exact down to tiny angles where 1 - |ov|^2 cancels
    errs = np.sum(np.abs(ZERO_X[None, :] - ov[:, None] * states) ** 2, axis=-1)
    sched: ExpSweep = config.schedule
    return Misalignment(
        errors={int(e): float(max(0.0, x)) for e, x in zip(energies, errs)},
        total_time=sched.duration,
    )
