"""Spin-1 algebra and exact piecewise-constant propagation in a time-dependent field.

Units are hbar = r = 1. Spin-1 operators act in the ``I_z`` eigenbasis
ordered ``(+1, 0, -1)``; spin-1/2 operators in ``(up, down)``. A field path is
any callable mapping an array of progress values ``s in [0, 1]`` to fields
of shape ``(..., len(s), 3)``, so many sectors can be propagated at once by
stacking leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FieldPath = Callable[[np.ndarray], np.ndarray]

_R2 = 1.0 / math.sqrt(2.0)

IX = np.array([[0, _R2, 0], [_R2, 0, _R2], [0, _R2, 0]], dtype=complex)
IY = np.array([[0, -1j * _R2, 0], [1j * _R2, 0, -1j * _R2], [0, 1j * _R2, 0]], dtype=complex)
IZ = np.diag([1.0, 0.0, -1.0]).astype(complex)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

ZERO_Z = np.array([0.0, 1.0, 0.0], dtype=complex)

# Step products are reduced in blocks to bound memory for many stacked sectors.
_BLOCK = 2048


class ConvergenceError(RuntimeError):
    """Raised when step doubling fails to settle below the requested tolerance."""


def spin1_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return IX.copy(), IY.copy(), IZ.copy()


def default_steps(total_time: float) -> int:
    return max(2000, math.ceil(200.0 * total_time))


def _dot_spin(n: np.ndarray, ops) -> np.ndarray:
    return n[..., 0, None, None] * ops[0] + n[..., 1, None, None] * ops[1] + n[..., 2, None, None] * ops[2]


def _axis_and_angle(b: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    mag = np.linalg.norm(b, axis=-1)
    safe = np.where(mag > 0, mag, 1.0)
    return b / safe[..., None], mag * dt


def rotation_step(b, dt: float) -> np.ndarray:
    """Exact ``exp(-i dt b.I)`` for spin 1, broadcasting over leading axes of ``b``.

    Uses ``exp(-i theta K) = 1 - i sin(theta) K + (cos(theta) - 1) K^2`` with
    ``K = n.I``, valid because ``K^3 = K`` for a unit axis.
    """
    b = np.asarray(b, dtype=float)
    n, theta = _axis_and_angle(b, dt)
    k = _dot_spin(n, (IX, IY, IZ))
    s = np.sin(theta)[..., None, None]
    c = (np.cos(theta) - 1.0)[..., None, None]
    return np.eye(3) - 1j * s * k + c * (k @ k)


def half_rotation_step(b, dt: float) -> np.ndarray:
    """Exact ``exp(-i dt b.sigma / 2)`` for spin 1/2."""
    b = np.asarray(b, dtype=float)
    n, theta = _axis_and_angle(b, dt)
    k = _dot_spin(n, (SX, SY, SZ))
    return np.cos(theta / 2)[..., None, None] * np.eye(2) - 1j * np.sin(theta / 2)[..., None, None] * k


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Time-ordered product ``U_M ... U_2 U_1`` over axis ``-3``."""
    while mats.shape[-3] > 1:
        if mats.shape[-3] % 2:
            eye = np.broadcast_to(np.eye(mats.shape[-1], dtype=mats.dtype), mats.shape[:-3] + (1,) + mats.shape[-2:])
            mats = np.concatenate([mats, eye], axis=-3)
        mats = mats[..., 1::2, :, :] @ mats[..., 0::2, :, :]
    return mats[..., 0, :, :]


def evolve(path: FieldPath, total_time: float, steps: int, spin: int = 1) -> np.ndarray:
    """Compose exact step exponentials evaluated at interval midpoints.

    ``spin=1`` uses ``H = b.I``; ``spin=2`` is shorthand for the spin-1/2
    Hamiltonian ``b.sigma/2`` (the value is the Hilbert-space dimension).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if not total_time > 0:
        raise ValueError("total_time must be positive")
    step_fn = rotation_step if spin == 1 else half_rotation_step
    dt = total_time / steps
    u = None
    for start in range(0, steps, _BLOCK):
        stop = min(start + _BLOCK, steps)
        s_mid = (np.arange(start, stop) + 0.5) / steps
        block = ordered_product(step_fn(path(s_mid), dt))
        u = block if u is None else block @ u
    return u


def propagate(
    path: FieldPath,
    total_time: float,
    steps: int | None = None,
    tol: float | None = None,
    max_steps: int = 1 << 21,
    spin: int = 1,
) -> tuple[np.ndarray, int]:
    """Propagate and, if ``tol`` is given, double the step count until converged.

    Convergence means every transition probability ``|U_ij|^2`` moves by less
    than ``tol`` under doubling. Returns the finest propagator and its step count.
    """
    steps = default_steps(total_time) if steps is None else steps
    u = evolve(path, total_time, steps, spin)
    if tol is None:
        return u, steps
    while True:
        if 2 * steps > max_steps:
            raise ConvergenceError(
                f"propagation did not converge to {tol:g} within {max_steps} steps"
            )
        finer = evolve(path, total_time, 2 * steps, spin)
        steps *= 2
        delta = np.max(np.abs(np.abs(finer) ** 2 - np.abs(u) ** 2))
        u = finer
        if delta < tol:
            return u, steps


def unitarity_defect(u: np.ndarray) -> float:
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - eye)))


def zero_projection_state(axis) -> np.ndarray:
    """Zero-projection eigenstate of ``axis . I`` with a fixed phase convention.

    The state is ``R_z(phi) R_x(theta) R_z(phi)^-1 |0_z>`` where ``theta`` is the
    polar angle of ``axis`` and ``phi`` is its azimuth shifted by ``pi/2`` (the
    x-rotation tilts ``z`` towards ``-y``). In closed form this is
    ``(-sin(theta) e^{-i az} / sqrt 2, cos(theta), sin(theta) e^{i az} / sqrt 2)``.
    At the south pole every azimuth gives ``-|0_z>``.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("axis must be nonzero")
    x, y, z = np.moveaxis(axis / norm, -1, 0)
    # sin and cos of the polar angle straight from the axis; arccos loses digits near the poles
    st = np.hypot(x, y)
    az = np.arctan2(y, x)
    return np.stack([-st * np.exp(-1j * az) * _R2, z + 0j, st * np.exp(1j * az) * _R2], axis=-1)


def zero_projection_state_by_rotation(axis) -> np.ndarray:
    """The same state built literally from the rotation composition."""
    axis = np.asarray(axis, dtype=float)
    x, y, z = axis / np.linalg.norm(axis)
    theta = math.atan2(math.hypot(x, y), z)
    phi = math.atan2(y, x) + math.pi / 2
    rz = rotation_step((0.0, 0.0, 1.0), phi)
    rx = rotation_step((1.0, 0.0, 0.0), theta)
    rz_inv = rotation_step((0.0, 0.0, 1.0), -phi)
    return rz @ rx @ rz_inv @ ZERO_Z


ZERO_X = zero_projection_state((1.0, 0.0, 0.0))


@dataclass
class SectorPropagator:
    """Propagator of the spin-1 ancilla inside one conserved-energy sector."""

    u: np.ndarray
    e_k: float | None = None
    steps: int = 0
    schedule: dict = field(default_factory=dict)


# -- field paths --------------------------------------------------------------


def spherical_path(theta, phi=0.0, magnitude=1.0) -> FieldPath:
    """Field path from spherical functions of ``s`` (callables or constants)."""

    def as_fn(v):
        return v if callable(v) else (lambda s, v=v: np.full_like(s, v, dtype=float))

    th, ph, mag = as_fn(theta), as_fn(phi), as_fn(magnitude)

    def path(s):
        s = np.asarray(s, dtype=float)
        t, p, m = th(s), ph(s), mag(s)
        return np.stack([m * np.sin(t) * np.cos(p), m * np.sin(t) * np.sin(p), m * np.cos(t)], axis=-1)

    return path


def smooth_step(s):
    """C-infinity-flat-ish step from 0 to 1 with vanishing first two derivatives at the ends."""
    s = np.asarray(s, dtype=float)
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def reversing_paths(magnitude: float = 1.0) -> list[FieldPath]:
    """A family of distinct paths taking the field from ``+z`` to ``-z``."""
    pi = math.pi
    return [
        spherical_path(lambda s: pi * smooth_step(s), 0.0, magnitude),
        spherical_path(lambda s: pi * smooth_step(s), pi / 2, magnitude),
        spherical_path(lambda s: pi * smooth_step(s), lambda s: 2.0 * pi * smooth_step(s), magnitude),
        spherical_path(
            lambda s: pi * smooth_step(s),
            lambda s: 0.7 + 1.5 * np.sin(pi * s) ** 2,
            lambda s: magnitude * (1.0 + 0.5 * np.sin(pi * s) ** 2),
        ),
        spherical_path(
            lambda s: pi * smooth_step(s) + 0.4 * np.sin(pi * smooth_step(s)) ** 2,
            lambda s: -1.0 + 3.0 * smooth_step(s),
            lambda s: magnitude * (1.0 + 0.3 * np.sin(2 * pi * s) ** 2),
        ),
    ]


def closed_paths(magnitude: float = 1.0) -> list[FieldPath]:
    """Paths leaving ``+z`` and returning to it."""
    pi = math.pi
    return [
        spherical_path(lambda s: 0.5 * pi * np.sin(pi * smooth_step(s)) ** 2, lambda s: 2 * pi * smooth_step(s), magnitude),
        spherical_path(lambda s: 0.9 * pi * np.sin(pi * smooth_step(s)) ** 2, 0.3, magnitude),
        spherical_path(
            lambda s: 2.0 * np.sin(pi * smooth_step(s)) ** 2,
            lambda s: 4 * pi * smooth_step(s),
            lambda s: magnitude * (1.0 + 0.4 * np.sin(pi * s) ** 2),
        ),
    ]


# -- analytic checks ------------------------------------------------------------


def berry_phase_check(path: FieldPath, total_time: float, steps: int | None = None) -> tuple[float, float]:
    """Evolve the zero-projection state along ``path`` and return ``(phase, leakage)``.

    The path must end parallel or antiparallel to its start; then the final
    zero-projection state is the initial one up to a phase, which is read off
    the overlap with the initial state. Leakage is the population lost to
    the ``+-1`` projections.
    """
    ends = path(np.array([0.0, 1.0]))
    b0, b1 = ends[0], ends[1]
    n0 = b0 / np.linalg.norm(b0)
    n1 = b1 / np.linalg.norm(b1)
    if np.linalg.norm(np.cross(n0, n1)) > 1e-9:
        raise ValueError("path must end along the axis it started on (either sign)")
    psi0 = zero_projection_state(n0)
    u, _ = propagate(path, total_time, steps)
    amp = np.vdot(psi0, u @ psi0)
    return float(np.angle(amp)), float(max(0.0, 1.0 - abs(amp) ** 2))


def majorana_lift(u2) -> np.ndarray:
    """Spin-1 propagator built from the SU(2) matrix ``[[a, b], [-b*, a*]]``."""
    u2 = np.asarray(u2, dtype=complex)
    if u2.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    a, b = u2[0, 0], u2[0, 1]
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValueError("spin-1/2 propagator is not unitary")
    if abs(u2[1, 0] + np.conj(b)) > 1e-10 or abs(u2[1, 1] - np.conj(a)) > 1e-10:
        raise ValueError("spin-1/2 propagator is not of the form [[a, b], [-b*, a*]]")
    r2 = math.sqrt(2.0)
    ac, bc = np.conj(a), np.conj(b)
    return np.array(
        [
            [a * a, r2 * a * b, b * b],
            [-r2 * a * bc, abs(a) ** 2 - abs(b) ** 2, r2 * ac * b],
            [bc * bc, -r2 * ac * bc, ac * ac],
        ]
    )


def dykhne_pex(gap: float, t_char: float) -> float:
    """Analytic excitation probability ``4 exp(-pi gap t_char)`` for the exponential sweep."""
    if not gap > 0 or not t_char > 0:
        raise ValueError("gap and t_char must be positive")
    return 4.0 * math.exp(-math.pi * gap * t_char)


def exp_sweep_path(gap: float, t_char: float, t_min: float, t_max: float) -> FieldPath:
    """Sector field ``(exp(-t/t_char), 0, gap)`` with ``t = t_min + s (t_max - t_min)``."""

    def path(s):
        t = t_min + np.asarray(s, dtype=float) * (t_max - t_min)
        g = np.exp(-t / t_char)
        return np.stack([g, np.zeros_like(g), np.full_like(g, gap)], axis=-1)

    return path


def exp_sweep_excitation(
    gap: float,
    t_char: float,
    span: float = 12.0,
    steps: int | None = None,
    tol: float | None = None,
) -> float:
    """Numerical excitation probability of one exponential-sweep sector.

    The sweep runs over ``t in [-span t_char, span t_char]`` and starts in the
    exact zero-projection state of the initial field, so boundary misalignment
    does not contaminate the nonadiabatic probability.
    """
    t_min, t_max = -span * t_char, span * t_char
    path = exp_sweep_path(gap, t_char, t_min, t_max)
    ends = path(np.array([0.0, 1.0]))
    psi0 = zero_projection_state(ends[0])
    psi1 = zero_projection_state(ends[1])
    if steps is None:
        steps = default_steps(t_max - t_min)
    u, _ = propagate(path, t_max - t_min, steps, tol=tol)
    return float(max(0.0, 1.0 - abs(np.vdot(psi1, u @ psi0)) ** 2))
