"""Team problem data types and exact reward evaluation.

Reward tensors follow one axis convention throughout the package:

* static reward ``r`` has shape ``(|Y_1|, ..., |Y_N|, |U_1|, ..., |U_N|)``;
* dynamic reward ``p`` has shape ``(|X|, |Y_1|, ..., |Y_N|, |U_1|, ..., |U_N|)``;
* the channel of agent ``i`` has shape ``(|X|, |U_1|, ..., |U_{i-1}|, |Y_i|)``
  and sums to one over its last axis.

Labels are kept in file order and mapped to 0-based indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .regularizers import RegularizerSpec

SIMPLEX_TOL = 1e-12
EQUIVALENCE_TOL = 1e-10
DEFAULT_MAX_ENTRIES = 10**8


class ShapeError(ValueError):
    """Array or label dimensions do not match the team structure."""


class SizeError(ValueError):
    """Dense representation would exceed the configured entry cap."""


class ValidationError(ValueError):
    """A probability table or reward entry violates its invariants."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def _labels(labels, what: str) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if not out:
        raise ShapeError(f"{what} must be non-empty")
    if len(set(out)) != len(out):
        raise ValidationError(f"duplicate labels in {what}: {out}")
    return out


def check_size(shape: Sequence[int], max_entries: int, what: str) -> None:
    n = math.prod(int(s) for s in shape)
    if n > max_entries:
        raise SizeError(f"{what} would hold {n} entries (cap {max_entries})")


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Policy:
    """Row-stochastic table ``table[y, u] = gamma(u | y)`` for one agent."""

    agent_index: int
    table: np.ndarray
    tol: float = field(default=SIMPLEX_TOL, repr=False)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ShapeError(f"policy table of agent {self.agent_index} must be 2-D, got shape {table.shape}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise ValidationError(f"policy of agent {self.agent_index} has negative or non-finite entries")
        sums = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > self.tol)
        if bad.size:
            raise ValidationError(
                f"policy of agent {self.agent_index}: row {int(bad[0])} sums to {float(sums[bad[0]]):.12g}"
            )
        object.__setattr__(self, "table", _frozen(table))

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape


@dataclass(frozen=True, eq=False)
class PolicyProfile:
    policies: tuple[Policy, ...]

    def __post_init__(self):
        policies = tuple(self.policies)
        for pos, pol in enumerate(policies):
            if pol.agent_index != pos:
                raise ShapeError(f"policy at position {pos} belongs to agent {pol.agent_index}")
        object.__setattr__(self, "policies", policies)

    @classmethod
    def from_tables(cls, tables, tol: float = SIMPLEX_TOL) -> PolicyProfile:
        return cls(tuple(Policy(i, t, tol) for i, t in enumerate(tables)))

    @property
    def tables(self) -> list[np.ndarray]:
        return [p.table for p in self.policies]

    def replace(self, j: int, table) -> PolicyProfile:
        tables = self.tables
        tables[j] = table
        return PolicyProfile.from_tables(tables)

    def __len__(self) -> int:
        return len(self.policies)

    def __getitem__(self, j: int) -> Policy:
        return self.policies[j]

    def __iter__(self) -> Iterator[Policy]:
        return iter(self.policies)


# ---------------------------------------------------------------------------
# team types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StaticTeam:
    """Independent static team with uniform observation marginals."""

    reward: np.ndarray
    obs_labels: tuple[tuple[str, ...], ...]
    action_labels: tuple[tuple[str, ...], ...]
    regularizers: tuple[RegularizerSpec, ...]
    obs_marginals: tuple[np.ndarray, ...] | None = None
    max_entries: int = field(default=DEFAULT_MAX_ENTRIES, repr=False)

    def __post_init__(self):
        obs = tuple(_labels(l, f"observations of agent {i + 1}") for i, l in enumerate(self.obs_labels))
        act = tuple(_labels(l, f"actions of agent {i + 1}") for i, l in enumerate(self.action_labels))
        if len(obs) != len(act) or not obs:
            raise ShapeError("need the same positive number of observation and action spaces")
        n = len(obs)
        shape = tuple(len(l) for l in obs) + tuple(len(l) for l in act)
        check_size(shape, self.max_entries, "reward tensor")
        reward = np.asarray(self.reward, dtype=float)
        if reward.shape != shape:
            raise ShapeError(f"reward tensor has shape {reward.shape}, expected {shape}")
        if not np.all(np.isfinite(reward)):
            raise ValidationError("reward tensor has non-finite entries")
        regs = tuple(self.regularizers)
        if len(regs) != n:
            raise ShapeError(f"expected {n} regularizers, got {len(regs)}")
        for i, reg in enumerate(regs):
            if reg.action_count != len(act[i]):
                raise ShapeError(f"regularizer of agent {i + 1} expects {reg.action_count} actions")
        if self.obs_marginals is None:
            marginals = tuple(np.full(len(l), 1.0 / len(l)) for l in obs)
        else:
            marginals = tuple(np.asarray(m, dtype=float) for m in self.obs_marginals)
            if len(marginals) != n:
                raise ShapeError("one observation marginal per agent required")
            for i, m in enumerate(marginals):
                if m.shape != (len(obs[i]),) or not np.all(m == 1.0 / len(obs[i])):
                    raise ValidationError(f"observation marginal of agent {i + 1} must be uniform")
        object.__setattr__(self, "reward", _frozen(reward))
        object.__setattr__(self, "obs_labels", obs)
        object.__setattr__(self, "action_labels", act)
        object.__setattr__(self, "regularizers", regs)
        object.__setattr__(self, "obs_marginals", tuple(_frozen(m) for m in marginals))

    @property
    def num_agents(self) -> int:
        return len(self.obs_labels)

    @property
    def obs_sizes(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.obs_labels)

    @property
    def action_sizes(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.action_labels)

    @property
    def rhos(self) -> np.ndarray:
        return np.array([reg.strong_convexity for reg in self.regularizers])

    def check_profile(self, profile: PolicyProfile) -> None:
        if len(profile) != self.num_agents:
            raise ShapeError(f"profile has {len(profile)} policies, team has {self.num_agents} agents")
        for i, pol in enumerate(profile):
            expected = (self.obs_sizes[i], self.action_sizes[i])
            if pol.shape != expected:
                raise ShapeError(f"policy of agent {i + 1} has shape {pol.shape}, expected {expected}")

    def with_regularizers(self, regularizers) -> StaticTeam:
        return StaticTeam(self.reward, self.obs_labels, self.action_labels, tuple(regularizers),
                          self.obs_marginals, self.max_entries)


@dataclass(frozen=True, eq=False)
class DynamicTeamSpec:
    """Finite-state sequential team in intrinsic form.

    The state space is finite, so the change-of-measure integral is an
    exact finite sum.
    """

    state_labels: tuple[str, ...]
    prior: np.ndarray
    obs_labels: tuple[tuple[str, ...], ...]
    action_labels: tuple[tuple[str, ...], ...]
    channels: tuple[np.ndarray, ...]
    reward_p: np.ndarray
    tol: float = field(default=SIMPLEX_TOL, repr=False)
    max_entries: int = field(default=DEFAULT_MAX_ENTRIES, repr=False)

    def __post_init__(self):
        states = _labels(self.state_labels, "states")
        obs = tuple(_labels(l, f"observations of agent {i + 1}") for i, l in enumerate(self.obs_labels))
        act = tuple(_labels(l, f"actions of agent {i + 1}") for i, l in enumerate(self.action_labels))
        if len(obs) != len(act) or not obs:
            raise ShapeError("need the same positive number of observation and action spaces")
        n = len(obs)
        prior = np.asarray(self.prior, dtype=float)
        if prior.shape != (len(states),):
            raise ShapeError(f"prior has shape {prior.shape}, expected ({len(states)},)")
        if np.any(prior < 0) or abs(prior.sum() - 1.0) > self.tol:
            raise ValidationError(f"prior must be a probability vector (sum={prior.sum()!r})")

        channels = tuple(np.asarray(w, dtype=float) for w in self.channels)
        if len(channels) != n:
            raise ShapeError(f"expected {n} channels, got {len(channels)}")
        for i, w in enumerate(channels):
            expected = (len(states),) + tuple(len(a) for a in act[:i]) + (len(obs[i]),)
            if w.shape != expected:
                raise ShapeError(f"channel of agent {i + 1} has shape {w.shape}, expected {expected}")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                idx = np.argwhere(~(w >= 0))[0]
                raise ValidationError(f"channel of agent {i + 1} has a negative entry at index {tuple(int(k) for k in idx)}")
            sums = w.sum(axis=-1)
            bad = np.argwhere(np.abs(sums - 1.0) > self.tol)
            if bad.size:
                idx = tuple(int(k) for k in bad[0])
                raise ValidationError(
                    f"channel of agent {i + 1}: row {idx} sums to {float(sums[idx]):.12g}, expected 1"
                )

        shape = (len(states),) + tuple(len(l) for l in obs) + tuple(len(l) for l in act)
        check_size(shape, self.max_entries, "dynamic reward table")
        p = np.asarray(self.reward_p, dtype=float)
        if p.shape != shape:
            raise ShapeError(f"reward table has shape {p.shape}, expected {shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("reward table entries must be finite and non-negative")

        object.__setattr__(self, "state_labels", states)
        object.__setattr__(self, "prior", _frozen(prior))
        object.__setattr__(self, "obs_labels", obs)
        object.__setattr__(self, "action_labels", act)
        object.__setattr__(self, "channels", tuple(_frozen(w) for w in channels))
        object.__setattr__(self, "reward_p", _frozen(p))

    @property
    def num_agents(self) -> int:
        return len(self.obs_labels)

    @property
    def obs_sizes(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.obs_labels)

    @property
    def action_sizes(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.action_labels)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


def uniform_profile(team: StaticTeam | DynamicTeamSpec) -> PolicyProfile:
    return PolicyProfile.from_tables(
        [np.full((ny, nu), 1.0 / nu) for ny, nu in zip(team.obs_sizes, team.action_sizes)]
    )


def random_profile(team: StaticTeam | DynamicTeamSpec, rng: np.random.Generator) -> PolicyProfile:
    """Rows drawn uniformly from each simplex (flat Dirichlet)."""
    return PolicyProfile.from_tables(
        [rng.dirichlet(np.ones(nu), size=ny) for ny, nu in zip(team.obs_sizes, team.action_sizes)]
    )


def policy_l1_norms(team: StaticTeam, tables) -> np.ndarray:
    """Per-agent norm sum_y pi(y) * ||tables[i][y, :]||_1."""
    return np.array([
        float(np.abs(np.asarray(t)).sum(axis=1) @ pi) for t, pi in zip(tables, team.obs_marginals)
    ])


def profile_distance(team: StaticTeam, a: PolicyProfile, b: PolicyProfile) -> np.ndarray:
    """Vector of per-agent L1 distances ``||a_i - b_i||_{L1}``."""
    return policy_l1_norms(team, [x - y for x, y in zip(a.tables, b.tables)])


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def interleaved_reward(team: StaticTeam) -> np.ndarray:
    """Reward with axes reordered to ``(y_1, u_1, y_2, u_2, ...)``."""
    n = team.num_agents
    order = [ax for i in range(n) for ax in (i, n + i)]
    return np.transpose(team.reward, order)


def marginalize(r_interleaved: np.ndarray, weights: Sequence[np.ndarray | None]) -> np.ndarray:
    """Contract agents one at a time, in index order.

    ``weights[i]`` is a ``(|Y_i|, |U_i|)`` array, or ``None`` to keep that
    agent's two axes. Kept axes stay in their original relative order.
    """
    t = r_interleaved
    axis = 0
    for w in weights:
        if w is None:
            axis += 2
            continue
        t = np.tensordot(t, w, axes=([axis, axis + 1], [0, 1]))
    return t


def reward_R(team: StaticTeam, y: Sequence[int], delta: Sequence) -> float:
    """Multilinear reward ``sum_u r(y, u) prod_i delta_i(u_i)``."""
    n = team.num_agents
    if len(y) != n or len(delta) != n:
        raise ShapeError(f"need {n} observations and {n} action distributions")
    t = team.reward[tuple(int(v) for v in y)]
    for i, d in enumerate(delta):
        d = np.asarray(d, dtype=float)
        if d.shape != (team.action_sizes[i],):
            raise ShapeError(f"distribution of agent {i + 1} has shape {d.shape}")
        t = np.tensordot(d, t, axes=([0], [0]))
    return float(t)


def reward_J(team: StaticTeam, profile: PolicyProfile) -> float:
    """Expected reward under independent uniform observations."""
    team.check_profile(profile)
    weights = [pi[:, None] * pol.table for pi, pol in zip(team.obs_marginals, profile)]
    return float(marginalize(interleaved_reward(team), weights))


def reward_J_dynamic(spec: DynamicTeamSpec, profile: PolicyProfile) -> float:
    """Exact ``E[p(X, Y, U)]`` by forward propagation of the joint law.

    For every state the joint distribution of ``(y_1, u_1, ..., y_i, u_i)``
    is grown agent by agent from the channels and policies, then paired
    with the reward.
    """
    n = spec.num_agents
    if len(profile) != n:
        raise ShapeError(f"profile has {len(profile)} policies, spec has {n} agents")
    for i, pol in enumerate(profile):
        if pol.shape != (spec.obs_sizes[i], spec.action_sizes[i]):
            raise ShapeError(f"policy of agent {i + 1} has shape {pol.shape}")
    order = [0] + [ax for i in range(n) for ax in (1 + i, 1 + n + i)]
    p = np.transpose(spec.reward_p, order)
    total = 0.0
    for x in range(len(spec.state_labels)):
        joint = np.ones(())
        for i in range(n):
            # channel axes (u_1, ..., u_{i-1}, y_i) spread over (y_1, u_1, ..., y_i, u_i)
            shape = []
            for k in range(i):
                shape += [1, spec.action_sizes[k]]
            shape += [spec.obs_sizes[i], 1]
            w = spec.channels[i][x].reshape(shape)
            joint = joint[..., None, None] * w * profile[i].table
        total += spec.prior[x] * float(np.sum(p[x] * joint))
    return total
