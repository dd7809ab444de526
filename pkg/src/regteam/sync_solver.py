"""Synchronous best-response iteration ``gamma^{k+1} = B(gamma^k)``."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .best_response import best_response_all
from .contraction import ContractionCertificate, aposteriori_error_bound, build_certificate
from .team_model import PolicyProfile, StaticTeam, profile_distance, uniform_profile

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class NoGuaranteeWarning(UserWarning):
    """Spectral radius of P is not below one; convergence is not certified."""


@dataclass(frozen=True, eq=False)
class SolveReport:
    fixed_point: PolicyProfile
    iterations: int
    residual: np.ndarray
    converged: bool
    certificate: ContractionCertificate
    history: list[np.ndarray] = field(default_factory=list)
    aposteriori_bound: np.ndarray | None = None

    @property
    def max_iter_reached(self) -> bool:
        return not self.converged

    @property
    def weighted_residual(self) -> float:
        return float(np.max(self.residual / self.certificate.weight_vector))

    def first_step(self) -> np.ndarray | None:
        return self.history[0] if self.history else None


def solve(team: StaticTeam, init: PolicyProfile | None = None, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, record_history: bool = True) -> SolveReport:
    """Iterate the Jacobi best response until every agent's step is below ``tol``.

    Hitting ``max_iter`` is reported through ``converged=False`` rather
    than raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    cert = build_certificate(team)
    if not cert.satisfied:
        warnings.warn(
            f"spectral radius of P is {cert.spectral_radius:.6g} >= 1: "
            "the iteration may not converge and its limit is not certified optimal",
            NoGuaranteeWarning,
            stacklevel=2,
        )
    gamma = uniform_profile(team) if init is None else init
    team.check_profile(gamma)
    history = []
    residual = np.full(team.num_agents, np.inf)
    k = 0
    converged = False
    while k < max_iter:
        nxt = best_response_all(team, gamma)
        residual = profile_distance(team, nxt, gamma)
        gamma = nxt
        k += 1
        if record_history:
            history.append(residual)
        if np.all(residual < tol):
            converged = True
            break
    if not converged:
        log.warning("best-response iteration stopped at max_iter=%d, residual %s", max_iter, residual)
    bound = aposteriori_error_bound(cert, residual) if cert.satisfied else None
    return SolveReport(gamma, k, residual, converged, cert, history, bound)
