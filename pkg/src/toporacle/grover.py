"""Grover search and amplitude amplification on register x spin-1 ancilla.

The joint state is an ``(N, 3)`` array: row ``k`` is the ancilla 3-vector
(``I_z`` basis) attached to assignment index ``k``. Oracles act row-wise
with their sector unitary; the diffusion acts on the register index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import npp
from .oracle import (
    DiffusionOperator,
    OracleRealization,
    diffusion_operator,
    npp2_oracle,
    range_oracle,
)
from .schedules import Schedule
from .spin import ZERO_X

REGISTER_MAX_N = 16

# exp(-i pi/4 sigma_y) in the (sigma=-1, sigma=+1) order of index bits.
_ROT = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2.0)


@dataclass
class JointState:
    amplitudes: np.ndarray
    n: int

    @property
    def size(self) -> int:
        return 1 << self.n

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        """Register marginal, ancilla traced out."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def register_vector(self) -> np.ndarray:
        """Register amplitudes on the ``|0_x>`` ancilla component."""
        return self.amplitudes @ ZERO_X.conj()

    def copy(self) -> "JointState":
        return JointState(self.amplitudes.copy(), self.n)


def _check_register(n: int, max_n: int) -> None:
    if n < 1:
        raise ValueError("n >= 1 required")
    if n > max_n:
        raise npp.GuardError(f"n={n} exceeds the simulation limit max_n={max_n}; raise --max-n to override")


def init_uniform(n: int, max_n: int = REGISTER_MAX_N) -> JointState:
    _check_register(n, max_n)
    size = 1 << n
    amps = np.tile(ZERO_X / math.sqrt(size), (size, 1))
    return JointState(amps, n)


def product_state(register: np.ndarray) -> JointState:
    """``register (x) |0_x>`` for an arbitrary normalized register vector."""
    register = np.asarray(register, dtype=complex)
    n = int(round(math.log2(len(register))))
    if 1 << n != len(register):
        raise ValueError("register length must be a power of two")
    return JointState(np.outer(register, ZERO_X), n)


def register_unitaries(realization: OracleRealization, energies: np.ndarray) -> np.ndarray:
    """Per-index ancilla unitaries, shape ``(N, 3, 3)``."""
    return realization.unitaries[realization.position(energies)]


def apply_oracle(state: JointState, realization: OracleRealization, energies=None, per_index=None) -> JointState:
    """Multiply each row by the unitary of its energy sector.

    Pass ``per_index`` (from :func:`register_unitaries`) to skip the sector
    lookup in tight loops.
    """
    if per_index is None:
        if energies is None:
            raise ValueError("need the per-index energy table or precomputed unitaries")
        if len(energies) != state.size:
            raise ValueError("energy table does not match the register size")
        per_index = register_unitaries(realization, energies)
    state.amplitudes = np.einsum("kij,kj->ki", per_index, state.amplitudes)
    return state


def rotate_register(state: JointState, inverse: bool = False) -> JointState:
    """Apply ``exp(-i pi/4 sum_k sigma^y_k)`` (or its inverse) to every qubit."""
    rot = _ROT.T if inverse else _ROT
    t = state.amplitudes.reshape((2,) * state.n + (3,))
    for axis in range(state.n):
        t = np.moveaxis(np.tensordot(rot, t, axes=([1], [axis])), 0, axis)
    state.amplitudes = t.reshape(state.size, 3)
    return state


def apply_diffusion(state: JointState, diffusion: DiffusionOperator | str = "exact", energies=None,
                    per_index=None) -> JointState:
    """Reflection ``2|u><u| - 1`` about the uniform register state, ancilla untouched.

    Non-exact modes rotate the register, apply the all-up-preserving
    threshold oracle, and rotate back.
    """
    mode = diffusion if isinstance(diffusion, str) else diffusion.mode
    if mode == "exact":
        mean = state.amplitudes.mean(axis=0, keepdims=True)
        state.amplitudes = 2.0 * mean - state.amplitudes
        return state
    rotate_register(state, inverse=True)
    apply_oracle(state, diffusion.realization, energies, per_index)
    rotate_register(state)
    return state


def grover_iterations_optimal(size: int, marked: int) -> int:
    if not 1 <= marked <= size:
        raise ValueError("need 1 <= marked <= N")
    return math.floor(math.pi / 4 * math.sqrt(size / marked))


def measure(state: JointState, rng: np.random.Generator) -> int:
    p = state.probabilities()
    p = p / p.sum()
    return int(rng.choice(state.size, p=p))


@dataclass
class SearchOutcome:
    index: int | None
    energy: int | None
    oracle_calls: int = 0
    diffusion_calls: int = 0
    anneal_steps: int = 0
    measurements: int = 0
    thresholds: list[float] = field(default_factory=list)
    found: bool = False
    n: int = 0

    @property
    def assignment(self) -> npp.Assignment | None:
        return None if self.index is None else npp.Assignment.from_index(self.index, self.n)

    def as_dict(self) -> dict:
        a = self.assignment
        return {
            "best_assignment": None if a is None else list(a.sigma),
            "energy": self.energy,
            "found": self.found,
            "oracle_calls": self.oracle_calls,
            "diffusion_calls": self.diffusion_calls,
            "anneal_steps": self.anneal_steps,
            "measurements": self.measurements,
            "thresholds": list(self.thresholds),
        }


def default_budget(size: int) -> int:
    return math.ceil(3.0 * math.sqrt(size))


def qsearch(
    energies: np.ndarray,
    oracle: OracleRealization,
    predicate: Callable[[int], bool],
    rng: np.random.Generator,
    c: float = 1.5,
    diffusion: DiffusionOperator | None = None,
    max_calls: int | None = None,
) -> SearchOutcome:
    """Amplitude amplification with an unknown number of marked states.

    After a free trial measurement of the uniform state, round ``l`` runs a
    uniformly random number ``j in [1, ceil(c^l)]`` of Grover iterations from
    a fresh uniform state and measures the register. The search stops at the
    first state satisfying ``predicate`` or when the total oracle-call budget
    (default ``ceil(3 sqrt N)``) is spent.
    """
    if not 1 < c < 2:
        raise ValueError("QSearch constant must satisfy 1 < c < 2")
    energies = np.asarray(energies, dtype=np.int64)
    size = len(energies)
    n = int(round(math.log2(size)))
    budget = default_budget(size) if max_calls is None else max_calls
    diffusion = DiffusionOperator(n, "exact") if diffusion is None else diffusion
    out = SearchOutcome(None, None, n=n)

    k = int(rng.integers(size))
    out.measurements += 1
    if predicate(k):
        out.index, out.energy, out.found = k, int(energies[k]), True
        return out

    oracle_u = register_unitaries(oracle, energies)
    diff_u = None if diffusion.realization is None else register_unitaries(diffusion.realization, energies)
    level = 0
    while out.oracle_calls < budget:
        upper = math.ceil(c**level)
        j = min(int(rng.integers(1, upper + 1)), budget - out.oracle_calls)
        state = init_uniform(n, max_n=n)
        for _ in range(j):
            apply_oracle(state, oracle, per_index=oracle_u)
            apply_diffusion(state, diffusion, per_index=diff_u)
        out.oracle_calls += j
        out.diffusion_calls += j
        k = measure(state, rng)
        out.measurements += 1
        if predicate(k):
            out.index, out.energy, out.found = k, int(energies[k]), True
            break
        level += 1
    out.anneal_steps = out.oracle_calls * oracle.anneals + out.diffusion_calls * diffusion.anneals
    return out


def _diffusion_for(instance, mode, diffusion_mode, schedule, total_time, steps):
    if diffusion_mode is None:
        diffusion_mode = "exact" if mode == "ideal" else "annealed"
    return diffusion_operator(instance, diffusion_mode, schedule, total_time, steps)


def solve_npp2(
    instance: npp.PartitionInstance,
    mode: str = "ideal",
    schedule: Schedule | None = None,
    total_time: float = 30.0,
    rng: np.random.Generator | None = None,
    steps: int | None = None,
    single_step: bool = True,
    diffusion_mode: str | None = None,
    blind: bool = False,
    c: float = 1.5,
    max_calls: int | None = None,
    max_n: int = REGISTER_MAX_N,
) -> SearchOutcome:
    """Find a zero-energy assignment with the zero-energy oracle.

    Unless ``blind``, the existence of a zero-energy assignment is checked
    classically first. ``single_step=False`` uses the range oracle at ``+-1/2``
    (with a tanh-ramp schedule) instead of the single pulse anneal.
    """
    _check_register(instance.n, max_n)
    rng = np.random.default_rng() if rng is None else rng
    energies = npp.energies(instance)
    if not blind and not np.any(energies == 0):
        raise ValueError("instance has no zero-energy partition")
    oracle = npp2_oracle(instance, schedule, total_time, steps, mode, single_step)
    diffusion = _diffusion_for(instance, mode, diffusion_mode, None, total_time, steps)
    out = qsearch(energies, oracle, lambda k: energies[k] == 0, rng, c, diffusion, max_calls)
    out.thresholds = [0.5, -0.5] if not single_step else []
    return out


def _flip_index(index: int, n: int) -> int:
    return index ^ ((1 << n) - 1)


def solve_npp1(
    instance: npp.PartitionInstance,
    mode: str = "ideal",
    schedule: Schedule | None = None,
    total_time: float = 30.0,
    rng: np.random.Generator | None = None,
    steps: int | None = None,
    diffusion_mode: str | None = None,
    c: float = 1.5,
    max_calls: int | None = None,
    max_n: int = REGISTER_MAX_N,
) -> SearchOutcome:
    """Minimize ``|E|`` by repeatedly searching below the best energy found.

    A random assignment seeds the best energy ``E_b`` (flipped to be
    nonnegative). Each cycle searches the range ``(-1/2, E_b - 1/2)``, i.e.
    every nonnegative level strictly below ``E_b``; a find lowers ``E_b``.
    The loop ends at ``E_b = 0`` or when a search spends its budget without
    a find, which is taken as evidence that ``E_b`` is optimal.
    """
    _check_register(instance.n, max_n)
    rng = np.random.default_rng() if rng is None else rng
    n = instance.n
    energies = npp.energies(instance)
    diffusion = _diffusion_for(instance, mode, diffusion_mode, schedule, total_time, steps)

    best = int(rng.integers(1 << n))
    if energies[best] < 0:
        best = _flip_index(best, n)
    best_e = int(energies[best])
    out = SearchOutcome(best, best_e, measurements=1, found=True, n=n)

    while best_e > 0:
        level = best_e - 0.5
        out.thresholds.append(level)
        oracle = range_oracle(instance, level, schedule, total_time, steps, mode)
        res = qsearch(energies, oracle, lambda k, lv=level: abs(int(energies[k])) < lv, rng, c,
                      diffusion, max_calls)
        out.oracle_calls += res.oracle_calls
        out.diffusion_calls += res.diffusion_calls
        out.anneal_steps += res.anneal_steps
        out.measurements += res.measurements
        if not res.found:
            break
        best = res.index if energies[res.index] >= 0 else _flip_index(res.index, n)
        best_e = int(energies[best])
    out.index, out.energy = best, best_e
    return out
