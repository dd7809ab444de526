"""Regularized stochastic team decision problems on finite spaces."""

from .best_response import best_response_all, best_response_j, g_vector, score_table
from .contraction import (
    ContractionCertificate,
    apriori_error_bound,
    build_certificate,
    local_oscillation,
    spectral_radius,
)
from .oracle import brute_force_J_star, reward_J_reg, sandwich_check
from .regularizers import RegularizerSpec, beta, conjugate_gradient, omega_value
from .static_reduction import reduce
from .sync_solver import SolveReport, solve
from .team_model import (
    DynamicTeamSpec,
    Policy,
    PolicyProfile,
    StaticTeam,
    reward_J,
    reward_J_dynamic,
    reward_R,
    uniform_profile,
)

__version__ = "0.1.0"

__all__ = [
    "ContractionCertificate",
    "DynamicTeamSpec",
    "Policy",
    "PolicyProfile",
    "RegularizerSpec",
    "SolveReport",
    "StaticTeam",
    "apriori_error_bound",
    "best_response_all",
    "best_response_j",
    "beta",
    "brute_force_J_star",
    "build_certificate",
    "conjugate_gradient",
    "g_vector",
    "local_oscillation",
    "omega_value",
    "reduce",
    "reward_J",
    "reward_J_dynamic",
    "reward_J_reg",
    "reward_R",
    "sandwich_check",
    "score_table",
    "solve",
    "spectral_radius",
    "uniform_profile",
]
