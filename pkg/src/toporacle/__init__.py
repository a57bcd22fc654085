"""Adiabatic spin-1 oracles and Grover search for number partitioning."""

from .npp import Assignment, EnergySpectrum, GuardError, PartitionInstance, energies, energy, flip, spectrum
from .oracle import OracleConfig, OracleRealization, build_oracle, npp2_oracle, range_oracle
from .schedules import ExpSweep, TanhPulse, TanhRamp, make_schedule

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "EnergySpectrum",
    "ExpSweep",
    "GuardError",
    "OracleConfig",
    "OracleRealization",
    "PartitionInstance",
    "TanhPulse",
    "TanhRamp",
    "build_oracle",
    "energies",
    "energy",
    "flip",
    "make_schedule",
    "npp2_oracle",
    "range_oracle",
    "spectrum",
]
