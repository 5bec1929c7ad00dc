"""Spectral simulation and estimate experiments for a coupled third-order NLS system on the torus."""

from .dispersion import PhysicsParams, ResonanceTriple, c0_from_data, phase, q_minus, q_plus
from .grid import PairState, PeriodicGrid, SpectralField, to_physical, to_spectral

__all__ = [
    "PhysicsParams",
    "ResonanceTriple",
    "c0_from_data",
    "phase",
    "q_minus",
    "q_plus",
    "PairState",
    "PeriodicGrid",
    "SpectralField",
    "to_physical",
    "to_spectral",
]
