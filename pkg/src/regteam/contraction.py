"""Oscillation constants, the interaction matrix P and its Perron data.

``P[j, i] = lambda_i(r) / (2 rho_j)`` bounds how far agent ``j``'s best
response moves when agent ``i`` changes policy. The best-response operator
is a P-contraction, which converges whenever the spectral radius of P is
below one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .team_model import StaticTeam

POWER_TOL = 1e-12
POWER_MAX_ITER = 1_000_000
SATISFIED_MARGIN = 1e-12


class PreconditionError(ValueError):
    """Operation requires a certificate with spectral radius below one."""


def local_oscillation(team: StaticTeam, j: int) -> float:
    """``max_{y, u^-j} [max_{u_j} r - min_{u_j} r]``."""
    return float(np.ptp(team.reward, axis=team.num_agents + j).max())


def oscillations(team: StaticTeam) -> np.ndarray:
    return np.array([local_oscillation(team, j) for j in range(team.num_agents)])


def interaction_matrix(lambdas, rhos) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    p = lambdas[None, :] / (2.0 * rhos[:, None])
    np.fill_diagonal(p, 0.0)
    return p


def _perron_irreducible(a: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    """Power iteration on ``a + I`` for an irreducible non-negative block.

    The unit shift makes the block primitive, so the iteration converges
    even for periodic (e.g. cyclic) matrices. Stops when the
    Collatz-Wielandt bracket is narrower than ``tol``.
    """
    k = a.shape[0]
    m = a + np.eye(k)
    x = np.ones(k)
    lo, hi = 0.0, np.inf
    for _ in range(max_iter):
        y = m @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        x = y / y.max()
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi) - 1.0, x


def spectral_radius(p, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Perron root of a non-negative matrix.

    Reducible matrices are split into strongly connected components; the
    radius is the largest radius over the irreducible diagonal blocks.
    """
    return _perron(np.asarray(p, dtype=float), tol, max_iter)[0]


def _perron(p: np.ndarray, tol: float, max_iter: int):
    n = p.shape[0]
    ncomp, labels = connected_components(p > 0, directed=True, connection="strong")
    radius = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        block = p[np.ix_(idx, idx)]
        if idx.size == 1 or not block.any():
            continue
        radius = max(radius, _perron_irreducible(block, tol, max_iter)[0])
    irreducible_vec = None
    if ncomp == 1 and n > 1:
        irreducible_vec = _perron_irreducible(p, tol, max_iter)[1]
    return max(radius, 0.0), irreducible_vec


@dataclass(frozen=True, eq=False)
class ContractionCertificate:
    lambdas: np.ndarray
    rhos: np.ndarray
    matrix_p: np.ndarray
    spectral_radius: float
    weight_vector: np.ndarray
    rate: float
    satisfied: bool

    @property
    def num_agents(self) -> int:
        return len(self.lambdas)

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas.tolist(),
            "rhos": self.rhos.tolist(),
            "matrix_p": self.matrix_p.tolist(),
            "spectral_radius": self.spectral_radius,
            "weight_vector": self.weight_vector.tolist(),
            "rate": self.rate,
            "satisfied": self.satisfied,
            "hypotheses": {
                "spectral_radius_below_one": self.satisfied,
                "sync_convergence_guaranteed": self.satisfied,
                "async_convergence_guaranteed_for_valid_schedules": self.satisfied,
            },
        }


def weight_vector(p: np.ndarray, radius: float, perron_vec: np.ndarray | None) -> np.ndarray:
    """Positive ``v`` (min entry 1) with ``P v <= w v`` for a small ``w``.

    Irreducible P: its Perron vector (gives ``w = alpha(P)``).
    Reducible P: ``v = (I - P/theta)^{-1} 1`` with ``alpha < theta``, which
    is strictly positive and satisfies ``P v = theta (v - 1) < theta v``.
    """
    n = p.shape[0]
    if not p.any():
        return np.ones(n)
    if perron_vec is not None and perron_vec.min() > 0:
        v = perron_vec
    else:
        if radius < 1.0:
            theta = 0.5 * (1.0 + radius)
        else:
            theta = 2.0 * radius
        v = np.linalg.solve(np.eye(n) - p / theta, np.ones(n))
    return v / v.min()


def build_certificate(team: StaticTeam) -> ContractionCertificate:
    lambdas = oscillations(team)
    rhos = team.rhos
    p = interaction_matrix(lambdas, rhos)
    radius, vec = _perron(p, POWER_TOL, POWER_MAX_ITER)
    v = weight_vector(p, radius, vec)
    rate = float(np.max((p @ v) / v))
    return ContractionCertificate(
        lambdas=lambdas,
        rhos=rhos,
        matrix_p=p,
        spectral_radius=float(radius),
        weight_vector=v,
        rate=rate,
        satisfied=bool(radius < 1.0 - SATISFIED_MARGIN),
    )


def resolvent(p, method: str = "solve", terms: int = 10_000) -> np.ndarray:
    """``(I - P)^{-1}`` by direct solve or truncated Neumann series."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    if method == "solve":
        return np.linalg.solve(np.eye(n) - p, np.eye(n))
    if method == "neumann":
        total = np.eye(n)
        power = np.eye(n)
        for _ in range(terms):
            power = power @ p
            if not power.any() or np.abs(power).max() < 1e-18:
                break
            total = total + power
        return total
    raise ValueError(f"unknown method {method!r}")


def apriori_error_bound(cert: ContractionCertificate, first_step, k: int) -> np.ndarray:
    """Componentwise bound ``(I - P)^{-1} P^k ||gamma^1 - gamma^0||``.

    Bounds ``||gamma^{k+m} - gamma^k||`` for every ``m``, and in
    particular the residual of step ``k + 1``.
    """
    if not cert.satisfied:
        raise PreconditionError("a-priori bound needs spectral radius < 1")
    first_step = np.asarray(first_step, dtype=float)
    pk = np.linalg.matrix_power(cert.matrix_p, int(k))
    return resolvent(cert.matrix_p) @ (pk @ first_step)


def aposteriori_error_bound(cert: ContractionCertificate, last_step) -> np.ndarray:
    """``(I - P)^{-1} P ||gamma^k - gamma^{k-1}||`` bounds ``||gamma^k - gamma*||``."""
    if not cert.satisfied:
        raise PreconditionError("a-posteriori bound needs spectral radius < 1")
    return resolvent(cert.matrix_p) @ (cert.matrix_p @ np.asarray(last_step, dtype=float))
