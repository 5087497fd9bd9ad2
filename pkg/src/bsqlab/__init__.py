"""Solitons, direct scattering and long-time asymptotics for the Boussinesq equation."""

from .asymptotics import (ModulationContext, build_modulation, complex_log_gamma, model_rh_constants, msol_solve,
                          near_soliton, sector2_leading, u_rad, u_sol)
from .harness import GridSpec, VerificationReport, compare_asymptotics, pde_residual, run_invariant_suite
from .scattering import (InitialData, ReflectionTable, gaussian_data, locate_zeros, reflection_coefficients,
                         residue_constant, scattering_matrices, seeded_soliton_data, synthetic_table, zero_data)
from .soliton import SolitonSpectrum, one_soliton_parameters, u_multisoliton, validate_spectrum
from .spectral import phi, saddle_points, theta

__all__ = [
    "GridSpec", "InitialData", "ModulationContext", "ReflectionTable", "SolitonSpectrum", "VerificationReport",
    "build_modulation", "compare_asymptotics", "complex_log_gamma", "gaussian_data", "locate_zeros",
    "model_rh_constants", "msol_solve", "near_soliton", "one_soliton_parameters", "pde_residual", "phi",
    "reflection_coefficients", "residue_constant", "run_invariant_suite", "saddle_points", "scattering_matrices",
    "sector2_leading", "seeded_soliton_data", "synthetic_table", "theta", "u_multisoliton", "u_rad", "u_sol",
    "validate_spectrum", "zero_data",
]
