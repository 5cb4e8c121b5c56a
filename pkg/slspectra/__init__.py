""" Root __init__ of slspectra """

from slspectra.core import Frame, ModulationKind, BoundaryFrame, Smoothness, Mat2, CoefficientFn, SLParams, BoundaryVector, SolutionTrace, Family
from slspectra.errors import SLSpectraError, ParameterError, CoefficientError, IntegrationError, DegenerateSpectrumError, PivotError, EllipticityError, NotInBandError, NoMinimalSolutionError, UnresolvedClusterError, ConfigError
from slspectra.families.registration import make_family, register, registered_families
from slspectra.transfer import transfer_matrix, monodromy, monodromy_dz, shift_matrix_Xn, propagate
from slspectra.spectral_class import Case, CaseLabel, BandList, discr, xi_pm, eigen_pm, diagonalize, classify, bands, trace_scan, critical_parameter, case_verdict
from slspectra.asymptotics import solution_seq, turan_seq, theta_phases, phi_estimate, minimal_solution
from slspectra.density import cd_kernel_diag, g_estimate, dos_density, spectral_density, count_eigenvalues, dos_convergence, cauchy_transform, example1_identity

import slspectra.families
import slspectra.families.utils

__all__ = [
    "Frame", "ModulationKind", "BoundaryFrame", "Smoothness", "Mat2", "CoefficientFn", "SLParams", "BoundaryVector", "SolutionTrace", "Family", # core
    "make_family", "register", "registered_families", # registration
    "transfer_matrix", "monodromy", "monodromy_dz", "shift_matrix_Xn", "propagate", # transfer
    "Case", "CaseLabel", "BandList", "discr", "xi_pm", "eigen_pm", "diagonalize", "classify", "bands", "trace_scan", "critical_parameter", "case_verdict", # spectral classes
    "solution_seq", "turan_seq", "theta_phases", "phi_estimate", "minimal_solution", # asymptotics
    "cd_kernel_diag", "g_estimate", "dos_density", "spectral_density", "count_eigenvalues", "dos_convergence", "cauchy_transform", "example1_identity", # density
    "families", # module folders
]

__version__ = "0.1.0"
