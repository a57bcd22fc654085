"""Sweeps, calibration helpers and the self-verification suite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import grover, npp, oracle, spin
from .fitting import StretchedFit, fit_stretched_exponential, local_maxima
from .oracle import OracleConfig, OracleRealization


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators for ``count`` runs, all derived from one 64-bit seed."""
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def random_instance(rng: np.random.Generator, n_range=(2, 10), s_max: int = 20) -> npp.PartitionInstance:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    return npp.PartitionInstance(tuple(int(x) for x in rng.integers(1, s_max + 1, size=n)))


# -- fidelity sweeps -------------------------------------------------------------


@dataclass
class SweepResult:
    times: np.ndarray
    reports: list[oracle.FidelityReport]

    @property
    def infidelities(self) -> np.ndarray:
        return np.array([r.infidelity for r in self.reports])

    def rows(self) -> list[dict]:
        return [
            {
                "T": r.total_time,
                "infidelity": r.infidelity,
                "max_phase_error": r.max_phase_error,
                "max_leakage": r.max_leakage,
            }
            for r in self.reports
        ]


def infidelity_sweep(
    instance: npp.PartitionInstance, config_for: Callable[[float], OracleConfig], times: Iterable[float]
) -> SweepResult:
    times = np.asarray(list(times), dtype=float)
    return SweepResult(times, [oracle.infidelity(instance, config_for(float(t))) for t in times])


def fit_sweep(sweep: SweepResult, window=(4.0, 24.0), method: str = "loglog") -> StretchedFit:
    return fit_stretched_exponential(sweep.times, sweep.infidelities, window, method=method)


def realization_infidelity(instance: npp.PartitionInstance, realization: OracleRealization) -> float:
    """Per-call infidelity of a working-basis realization on the uniform input."""
    spec = npp.spectrum(instance)
    w = np.array([spec.multiplicity(int(e)) for e in realization.energies], dtype=float) / spec.total
    out = realization.unitaries @ spin.ZERO_X
    ideal = realization.signs[:, None] * spin.ZERO_X[None, :]
    overlap = np.sum(w * np.einsum("ki,ki->k", ideal.conj(), out))
    resid = np.sqrt(w)[:, None] * (out - overlap * ideal)
    return float(min(1.0, np.sum(np.abs(resid) ** 2)))


def npp1_realizations(instance, total_time, schedule=None, steps=None) -> list[OracleRealization]:
    """Every oracle and the diffusion anneal an NPP1 run on ``instance`` can call."""
    levels = sorted({e - 0.5 for e in npp.spectrum(instance).energies() if e > 0})
    reals = [oracle.range_oracle(instance, lv, schedule, total_time, steps) for lv in levels]
    reals.append(oracle.diffusion_operator(instance, "annealed", schedule, total_time, steps).realization)
    return reals


def npp2_realizations(instance, total_time, schedule=None, steps=None) -> list[OracleRealization]:
    return [
        oracle.npp2_oracle(instance, schedule, total_time, steps),
        oracle.diffusion_operator(instance, "annealed", None, total_time, steps).realization,
    ]


def choose_annealing_time(
    instance: npp.PartitionInstance,
    target: float | None = None,
    start: float = 50.0,
    factor: float = 1.25,
    t_max: float = 5000.0,
    schedule=None,
    problem: str = "npp1",
) -> tuple[float, float]:
    """Smallest ``T`` on a geometric ladder with every call of ``problem`` below ``target``.

    The default target is ``0.1 / sqrt(N)``. Returns ``(T, worst per-call infidelity)``.
    """
    target = 0.1 / math.sqrt(instance.size) if target is None else target
    build = {"npp1": npp1_realizations, "npp2": npp2_realizations}[problem]
    t = start
    while t <= t_max:
        worst = max(realization_infidelity(instance, r) for r in build(instance, t, schedule))
        if worst < target:
            return t, worst
        t *= factor
    raise RuntimeError(f"no annealing time up to {t_max} reaches per-call infidelity {target:g}")


def time_to_infidelity(
    instance: npp.PartitionInstance,
    level: float,
    target: float = 1e-4,
    start: float = 50.0,
    factor: float = 1.5,
    t_max: float = 6000.0,
    rel_tol: float = 0.05,
    c: float = 10.0,
) -> float:
    """Annealing time at which the threshold oracle first reaches ``target``.

    Climbs a geometric ladder until the target is met, then bisects in
    ``log T`` between the last two rungs. Oscillations can make the answer a
    local crossing rather than the true first one.
    """

    def inf(t):
        return oracle.infidelity(instance, OracleConfig.threshold(level, t, c)).infidelity

    lo, hi = None, start
    while inf(hi) >= target:
        lo, hi = hi, hi * factor
        if hi > t_max:
            raise RuntimeError(f"target {target:g} not reached by T={t_max}")
    if lo is None:
        return hi
    while hi / lo > 1 + rel_tol:
        mid = math.sqrt(lo * hi)
        if inf(mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


# -- verification suite ------------------------------------------------------------


def _record(check: str, parameters: dict, value: float, tolerance: float, passed: bool) -> dict:
    return {"check": check, "parameters": parameters, "value": float(value), "tolerance": tolerance,
            "pass": bool(passed)}


def check_berry(total_time: float = 50.0, steps: int | None = 10_000) -> list[dict]:
    records = []
    for i, path in enumerate(spin.reversing_paths()):
        phase, leak = spin.berry_phase_check(path, total_time, steps)
        err = abs(abs(phase) - math.pi)
        params = {"path": f"reversing-{i}", "T": total_time, "steps": steps}
        records.append(_record("berry-phase-reversal", params, err, 1e-3, err < 1e-3))
        records.append(_record("berry-leakage-reversal", params, leak, 1e-4, leak < 1e-4))
    for i, path in enumerate(spin.closed_paths()):
        phase, _ = spin.berry_phase_check(path, total_time, steps)
        params = {"path": f"closed-{i}", "T": total_time, "steps": steps}
        records.append(_record("berry-phase-closed", params, abs(phase), 1e-3, abs(phase) < 1e-3))
    return records


def random_smooth_path(rng: np.random.Generator, modes: int = 3) -> spin.FieldPath:
    coef = rng.normal(size=(3, 2 * modes + 1))

    def path(s):
        s = np.asarray(s, dtype=float)
        basis = [np.ones_like(s)]
        for m in range(1, modes + 1):
            basis += [np.cos(2 * math.pi * m * s), np.sin(2 * math.pi * m * s)]
        return np.stack(basis, axis=-1) @ coef.T

    return path


def majorana_deviation(path: spin.FieldPath, total_time: float, steps: int) -> float:
    u1 = spin.evolve(path, total_time, steps, spin=1)
    u_half = spin.evolve(path, total_time, steps, spin=2)
    return float(np.max(np.abs(u1 - spin.majorana_lift(u_half))))


def check_majorana(seed: int = 0, paths: int = 20, total_time: float = 10.0, steps: int = 4000) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(paths):
        dev = majorana_deviation(random_smooth_path(rng), total_time, steps)
        out.append(_record("majorana-lift", {"path": i, "seed": seed, "T": total_time, "steps": steps},
                           dev, 1e-6, dev < 1e-6))
    return out


@dataclass
class DykhneFit:
    t_chars: list[float]
    pex: list[float]
    slope: float
    prefactor: float
    expected_slope: float

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.expected_slope) / abs(self.expected_slope)


def dykhne_slope(gap: float = 0.5, t_chars=(4.0, 6.0, 8.0, 10.0, 12.0), span: float = 12.0,
                 step_factor: int = 2) -> DykhneFit:
    """Fit ``ln P_ex`` against ``T_char``; the prefactor is ``exp(intercept)``."""
    pex = []
    for t in t_chars:
        steps = step_factor * spin.default_steps(2 * span * t)
        pex.append(spin.exp_sweep_excitation(gap, t, span=span, steps=steps))
    slope, icept = np.polyfit(np.array(t_chars), np.log(pex), 1)
    return DykhneFit(list(t_chars), pex, float(slope), float(math.exp(icept)), -math.pi * gap)


def check_dykhne() -> list[dict]:
    fit = dykhne_slope()
    return [
        _record("dykhne-slope", {"gap": 0.5, "t_chars": fit.t_chars, "prefactor": fit.prefactor,
                                 "expected": fit.expected_slope}, fit.slope, 0.1, fit.relative_error < 0.1)
    ]


def diffusion_deviation(instance, total_time: float, rng: np.random.Generator, states: int = 20) -> float:
    """Worst distance, up to global phase, between annealed and exact diffusion."""
    energies = npp.energies(instance)
    annealed = oracle.diffusion_operator(instance, "annealed", total_time=total_time)
    worst = 0.0
    for _ in range(states):
        v = rng.normal(size=instance.size) + 1j * rng.normal(size=instance.size)
        v /= np.linalg.norm(v)
        a = grover.apply_diffusion(grover.product_state(v), "exact").amplitudes
        b = grover.apply_diffusion(grover.product_state(v), annealed, energies).amplitudes
        phase = np.vdot(a.ravel(), b.ravel())
        phase = phase / abs(phase) if abs(phase) > 0 else 1.0
        worst = max(worst, float(np.linalg.norm(a - b / phase)))
    return worst


def check_diffusion(seed: int = 0, total_time: float = 1200.0) -> list[dict]:
    inst = npp.PartitionInstance((1, 2, 3))
    dev = diffusion_deviation(inst, total_time, np.random.default_rng(seed))
    return [_record("diffusion-annealed-vs-exact", {"instance": list(inst.s), "T": total_time, "seed": seed},
                    dev, 1e-3, dev < 1e-3)]


def naive_oracle_unitaries(instance, config: OracleConfig) -> np.ndarray:
    """Working-basis unitaries propagated separately for every assignment."""
    table = npp.energies(instance)
    out = []
    for e in table:
        raw, _ = oracle.propagate_sectors(np.array([e]), config)
        w = raw[0] if isinstance(config.variant, oracle.Npp2SingleStep) else oracle.Z_TO_X @ raw[0]
        out.append(w)
    return np.stack(out)


def check_sector_cache(total_time: float = 20.0) -> list[dict]:
    records = []
    for s in [(1, 2, 3), (2, 3, 5, 7, 1, 1)]:
        inst = npp.PartitionInstance(s)
        cfg = OracleConfig.threshold(2.5, total_time)
        real = oracle.build_oracle(inst, cfg)
        cached = grover.register_unitaries(real, npp.energies(inst))
        naive = naive_oracle_unitaries(inst, cfg)
        diff = float(np.max(np.abs(cached - naive)))
        records.append(_record("sector-cache-equivalence", {"instance": list(s), "T": total_time},
                               diff, 0.0, diff == 0.0))
    return records


def check_range_composition(total_time: float = 40.0) -> list[dict]:
    inst = npp.PartitionInstance((1, 2, 3))
    upper = oracle.build_oracle(inst, OracleConfig.threshold(2.5, total_time))
    lower = oracle.build_oracle(inst, OracleConfig.threshold(-0.5, total_time))
    rng_oracle = oracle.range_oracle(inst, 2.5, total_time=total_time)
    diff = float(np.max(np.abs(rng_oracle.unitaries - lower.unitaries @ upper.unitaries)))
    return [_record("range-composition", {"instance": [1, 2, 3], "level": 2.5, "T": total_time},
                    diff, 1e-12, diff < 1e-12)]


def check_mitm(seed: int = 0, trials: int = 100) -> list[dict]:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        inst = random_instance(rng, (1, 12), 50)
        e, w = npp.meet_in_middle_solve(inst)
        ref, _ = npp.min_abs_energy(inst)
        bad += int(e != ref or abs(npp.energy(inst, w)) != ref)
    return [_record("meet-in-middle-vs-brute-force", {"trials": trials, "seed": seed}, bad, 0, bad == 0)]


def check_npp1_ideal(seed: int = 0, instances: int = 20) -> list[dict]:
    rngs = spawn_rngs(seed, 2 * instances)
    bad = 0
    for i in range(instances):
        inst = random_instance(rngs[2 * i], (2, 10), 20)
        out = grover.solve_npp1(inst, "ideal", rng=rngs[2 * i + 1])
        bad += int(out.energy != npp.min_abs_energy(inst)[0])
    return [_record("npp1-ideal-vs-brute-force", {"instances": instances, "seed": seed}, bad, 0, bad == 0)]


def run_verification(seed: int = 0, steps: int | None = None) -> list[dict]:
    """All self-checks at fixed seeds. ``steps`` overrides the Berry-check integrator."""
    records = []
    records += check_berry(steps=10_000 if steps is None else steps)
    records += check_majorana(seed)
    records += check_dykhne()
    records += check_diffusion(seed)
    records += check_sector_cache()
    records += check_range_composition()
    records += check_mitm(seed)
    records += check_npp1_ideal(seed)
    return records


def oscillation_maxima(times, values) -> list[float]:
    return [float(times[i]) for i in local_maxima(values)]
