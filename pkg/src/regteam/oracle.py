"""Regularized reward, brute-force unregularized optimum and the sandwich bound.

The unregularized reward is multilinear in the rows ``gamma_i(.|y_i)``, so
its maximum over the product of simplices is attained at a vertex, i.e. a
deterministic profile. Exhaustive search over deterministic profiles is
therefore exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .regularizers import beta, omega_value
from .team_model import PolicyProfile, SizeError, StaticTeam, reward_J

DEFAULT_MAX_PROFILES = 10**7
SANDWICH_TOL = 1e-9


def regularization_term(team: StaticTeam, profile: PolicyProfile) -> float:
    """``sum_j sum_{y_j} pi_j(y_j) Omega_j(gamma_j(.|y_j))``."""
    return float(sum(
        omega_value(reg, pol.table) @ pi
        for reg, pol, pi in zip(team.regularizers, profile, team.obs_marginals)
    ))


def reward_J_reg(team: StaticTeam, profile: PolicyProfile) -> float:
    return reward_J(team, profile) - regularization_term(team, profile)


def count_deterministic_profiles(team: StaticTeam) -> int:
    return math.prod(nu ** ny for ny, nu in zip(team.obs_sizes, team.action_sizes))


def deterministic_profile(team: StaticTeam, choice: tuple[tuple[int, ...], ...]) -> PolicyProfile:
    tables = []
    for (ny, nu), acts in zip(zip(team.obs_sizes, team.action_sizes), choice):
        t = np.zeros((ny, nu))
        t[np.arange(ny), acts] = 1.0
        tables.append(t)
    return PolicyProfile.from_tables(tables)


def brute_force_J_star(team: StaticTeam, max_profiles: int = DEFAULT_MAX_PROFILES):
    """Exact unregularized optimum over deterministic profiles.

    Ties go to the lexicographically smallest profile. Returns
    ``(J*, maximizer)``.
    """
    total = count_deterministic_profiles(team)
    if total > max_profiles:
        raise SizeError(f"{total} deterministic profiles exceed the cap {max_profiles}")
    n = team.num_agents
    per_agent = [list(itertools.product(range(nu), repeat=ny))
                 for ny, nu in zip(team.obs_sizes, team.action_sizes)]
    y_grid = list(itertools.product(*(range(ny) for ny in team.obs_sizes)))
    y_idx = np.array(y_grid, dtype=int).reshape(len(y_grid), n)
    weight = np.prod([team.obs_marginals[i][y_idx[:, i]] for i in range(n)], axis=0)
    best_val, best_choice = -np.inf, None
    for choice in itertools.product(*per_agent):
        u_idx = np.stack([np.asarray(choice[i])[y_idx[:, i]] for i in range(n)], axis=1)
        vals = team.reward[tuple(y_idx.T) + tuple(u_idx.T)]
        val = float(vals @ weight)
        if val > best_val:
            best_val, best_choice = val, choice
    return best_val, deterministic_profile(team, best_choice)


@dataclass(frozen=True)
class SandwichReport:
    j_star: float
    j_gamma_star: float
    beta_sum: float
    lower_ok: bool
    upper_ok: bool

    @property
    def satisfied(self) -> bool:
        return self.lower_ok and self.upper_ok

    @property
    def lower_bound(self) -> float:
        return self.j_star - self.beta_sum

    def to_dict(self) -> dict:
        return {
            "j_star": self.j_star,
            "j_gamma_star": self.j_gamma_star,
            "beta_sum": self.beta_sum,
            "lower_bound": self.lower_bound,
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "satisfied": self.satisfied,
        }


def sandwich_check(team: StaticTeam, gamma_star: PolicyProfile, tol: float = SANDWICH_TOL,
                   max_profiles: int = DEFAULT_MAX_PROFILES) -> SandwichReport:
    """Check ``J* - sum_j beta_j <= J(gamma*) <= J*``."""
    j_star, _ = brute_force_J_star(team, max_profiles)
    j_gamma = reward_J(team, gamma_star)
    beta_sum = float(sum(beta(reg) for reg in team.regularizers))
    return SandwichReport(
        j_star=j_star,
        j_gamma_star=j_gamma,
        beta_sum=beta_sum,
        lower_ok=j_star - beta_sum <= j_gamma + tol,
        upper_ok=j_gamma <= j_star + tol,
    )
