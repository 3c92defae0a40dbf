"""Solitary waves of one-dimensional nonlinear Dirac models (massive
Thirring and Gross-Neveu families) and their linear stability."""

__version__ = "0.1.0"

from .errors import (EigensolverFailure, GridMismatch, IntegrationDiverged, NoSignChange,
                     ParameterError, ParityDefect)
from .model import Family, ModelSpec, make_model, nonlinear_jacobian, nonlinear_map
from .grid import Grid, make_grid
from .profile import WaveProfile, d_omega_profile, solve_profile, solve_resolved_profile
from .functionals import (FunctionalReport, charge, energy_terms, find_omega_E, find_omega_VK,
                          sweep_functionals, virial_report)
from .linop import LinearizedOperator, assemble_JL, parity_decompose
from .spectrum import (CollisionEvent, EigenTrajectory, SpectrumSlice, detect_origin_collisions,
                       eigen_slice, filter_resolved, real_pairs, track)
from .jordan import JordanReport, build_xi, c_matrix, chain_residuals, vk_pairing
from .sweep import run_sweep

__all__ = [n for n in dir() if not n.startswith("_")]
