"""Pulse-kicked optomechanical resonator: Gaussian moment dynamics, QFI and
squeezing diagnostics."""

from ._core import (  # noqa: F401
    SystemParams,
    fit_scaling_exponent,
    mass_qfi,
    monte_carlo_moments,
    occupation_from_temperature,
    purity,
    qfi_vs_pulses,
    squeezing,
    step,
    stroboscopic,
    thermal_moments,
    wigner,
)

__all__ = [
    "SystemParams",
    "fit_scaling_exponent",
    "mass_qfi",
    "monte_carlo_moments",
    "occupation_from_temperature",
    "purity",
    "qfi_vs_pulses",
    "squeezing",
    "step",
    "stroboscopic",
    "thermal_moments",
    "wigner",
]
