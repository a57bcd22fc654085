"""Number Partitioning instances, Ising energies and exact classical solvers.

An assignment puts item ``k`` in the first subset when ``sigma_k = +1``. Its
energy is the signed difference of the two subset sums,
``E = sum_k s_k sigma_k``. Assignments are interchangeable with integer
indices in ``[0, 2**n)``: bit ``k`` is set exactly when ``sigma_k = +1``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

INT64_MAX = (1 << 63) - 1
SPECTRUM_MAX_N = 24
MITM_MAX_N = 40


class GuardError(ValueError):
    """An instance is too large for the requested exhaustive computation."""


@dataclass(frozen=True)
class PartitionInstance:
    s: tuple[int, ...]

    def __post_init__(self):
        values = tuple(self.s)
        if len(values) < 1:
            raise ValueError("n >= 1 required")
        for v in values:
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"items must be integers, got {v!r}")
            if v < 1:
                raise ValueError(f"items must be positive, got {v}")
        values = tuple(int(v) for v in values)
        if sum(values) > INT64_MAX:
            raise ValueError("sum of items overflows 64-bit signed arithmetic")
        object.__setattr__(self, "s", values)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def e_max(self) -> int:
        return sum(self.s)

    @property
    def size(self) -> int:
        return 1 << self.n

    @classmethod
    def from_json(cls, text: str) -> "PartitionInstance":
        data = json.loads(text)
        if not isinstance(data, dict) or "s" not in data:
            raise ValueError('instance JSON must be an object with key "s"')
        if not isinstance(data["s"], list):
            raise ValueError('"s" must be a list of positive integers')
        return cls(tuple(data["s"]))

    @classmethod
    def load(cls, path) -> "PartitionInstance":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps({"s": list(self.s)})


@dataclass(frozen=True)
class Assignment:
    sigma: tuple[int, ...]

    def __post_init__(self):
        sigma = tuple(int(v) for v in self.sigma)
        if any(v not in (1, -1) for v in sigma):
            raise ValueError("assignment entries must be +1 or -1")
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return len(self.sigma)

    @property
    def index(self) -> int:
        return sum(1 << k for k, v in enumerate(self.sigma) if v == 1)

    @classmethod
    def from_index(cls, index: int, n: int) -> "Assignment":
        if not 0 <= index < (1 << n):
            raise ValueError(f"index {index} out of range for n={n}")
        return cls(tuple(1 if (index >> k) & 1 else -1 for k in range(n)))

    def subsets(self, instance: PartitionInstance) -> tuple[list[int], list[int]]:
        first = [v for v, sg in zip(instance.s, self.sigma) if sg == 1]
        second = [v for v, sg in zip(instance.s, self.sigma) if sg == -1]
        return first, second


def energy(instance: PartitionInstance, a: Assignment) -> int:
    if a.n != instance.n:
        raise ValueError(f"assignment has {a.n} entries, instance has {instance.n}")
    return sum(v * sg for v, sg in zip(instance.s, a.sigma))


def flip(a: Assignment) -> Assignment:
    return Assignment(tuple(-v for v in a.sigma))


def _guard(instance: PartitionInstance, max_n: int) -> None:
    if instance.n > max_n:
        raise GuardError(
            f"n={instance.n} exceeds the enumeration limit max_n={max_n}; raise --max-n to override"
        )


def _signed_sums(values) -> np.ndarray:
    """Energies of all assignments of ``values``, ordered by index."""
    sums = np.zeros(1, dtype=np.int64)
    for v in values:
        # Appending item k doubles the table: the new high half has bit k set.
        sums = np.concatenate([sums - v, sums + v])
    return sums


def energies(instance: PartitionInstance, max_n: int = SPECTRUM_MAX_N) -> np.ndarray:
    """Energy of every assignment, indexed by assignment index."""
    _guard(instance, max_n)
    return _signed_sums(instance.s)


@dataclass(frozen=True)
class EnergySpectrum:
    entries: dict[int, int]
    e_max: int
    total: int

    def energies(self) -> list[int]:
        return sorted(self.entries)

    def multiplicity(self, e: int) -> int:
        return self.entries.get(e, 0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["energy", "multiplicity"])
        for e in self.energies():
            writer.writerow([e, self.entries[e]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> dict[int, int]:
        rows = list(csv.DictReader(io.StringIO(text)))
        return {int(r["energy"]): int(r["multiplicity"]) for r in rows}


def spectrum(instance: PartitionInstance, max_n: int = SPECTRUM_MAX_N) -> EnergySpectrum:
    values, counts = np.unique(energies(instance, max_n), return_counts=True)
    entries = {int(e): int(c) for e, c in zip(values, counts)}
    return EnergySpectrum(entries=entries, e_max=instance.e_max, total=instance.size)


def min_abs_energy(
    instance: PartitionInstance, max_n: int = SPECTRUM_MAX_N
) -> tuple[int, list[Assignment]]:
    """Brute-force optimum ``min |E|`` and every assignment reaching it."""
    table = np.abs(energies(instance, max_n))
    best = int(table.min())
    witnesses = [Assignment.from_index(int(i), instance.n) for i in np.flatnonzero(table == best)]
    return best, witnesses


def meet_in_middle_solve(
    instance: PartitionInstance, max_n: int = MITM_MAX_N
) -> tuple[int, Assignment]:
    """Exact ``min |E|`` in ``O(2^{n/2} n)`` time by matching half-sums.

    The first ``h = n // 2`` items form the low index bits. Right-half sums
    are sorted once; for each left sum the nearest cancelling right sums are
    located by binary search. Among optimal assignments the lowest index is
    returned.
    """
    _guard(instance, max_n)
    h = instance.n // 2
    left = _signed_sums(instance.s[:h])
    right = _signed_sums(instance.s[h:])

    # np.unique keeps the first, i.e. lowest, right index for each distinct sum.
    r_vals, r_idx = np.unique(right, return_index=True)
    pos = np.searchsorted(r_vals, -left)
    lo = np.clip(pos - 1, 0, len(r_vals) - 1)
    hi = np.clip(pos, 0, len(r_vals) - 1)
    best = int(min(np.abs(left + r_vals[lo]).min(), np.abs(left + r_vals[hi]).min()))

    best_index = None
    for target in {best, -best}:
        need = target - left
        at = np.clip(np.searchsorted(r_vals, need), 0, len(r_vals) - 1)
        ok = r_vals[at] == need
        if not np.any(ok):
            continue
        cand = np.arange(len(left), dtype=np.int64)[ok] + (r_idx[at[ok]].astype(np.int64) << h)
        c = int(cand.min())
        best_index = c if best_index is None else min(best_index, c)
    return best, Assignment.from_index(best_index, instance.n)

