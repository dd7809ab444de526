"""Regularized best-response maps for each agent and the joint operator."""

from __future__ import annotations

import numpy as np

from .regularizers import conjugate_gradient
from .team_model import (
    Policy,
    PolicyProfile,
    ShapeError,
    StaticTeam,
    interleaved_reward,
    marginalize,
)


def score_table(team: StaticTeam, profile: PolicyProfile, j: int) -> np.ndarray:
    """All score vectors of agent ``j`` at once, shape ``(|Y_j|, |U_j|)``.

    Row ``y_j`` is ``sum_{y^-j, u^-j} r(y,u) prod_{i != j} gamma_i(u_i|y_i) pi_i(y_i)``.
    Agent ``j``'s own policy in ``profile`` is ignored.
    """
    if not 0 <= j < team.num_agents:
        raise ShapeError(f"agent index {j} out of range")
    team.check_profile(profile)
    weights = [
        None if i == j else pi[:, None] * pol.table
        for i, (pi, pol) in enumerate(zip(team.obs_marginals, profile))
    ]
    return marginalize(interleaved_reward(team), weights)


def g_vector(team: StaticTeam, profile: PolicyProfile, j: int, y_j: int) -> np.ndarray:
    return score_table(team, profile, j)[y_j]


def best_response_j(team: StaticTeam, profile: PolicyProfile, j: int) -> Policy:
    scores = score_table(team, profile, j)
    return Policy(j, conjugate_gradient(team.regularizers[j], scores))


def best_response_all(team: StaticTeam, profile: PolicyProfile) -> PolicyProfile:
    """Jacobi update: every agent responds to the same input profile."""
    return PolicyProfile(tuple(best_response_j(team, profile, j) for j in range(team.num_agents)))
