"""Traveling-wave and size statistics built on recurrence and Monte Carlo output"""

from pycascade.analysis.wave import (
    WaveProfile, dispersion_roots, extract_profile, fit_velocity,
    selected_velocity, tail_fit, wave_equation_residual,
)
from pycascade.analysis.size import exact_moment, limiting_moment, mc_moments, scaled_distribution

__all__ = [
    "WaveProfile",
    "dispersion_roots",
    "extract_profile",
    "fit_velocity",
    "selected_velocity",
    "tail_fit",
    "wave_equation_residual",
    "exact_moment",
    "limiting_moment",
    "mc_moments",
    "scaled_distribution",
]
