"""Discrete-time simulation of the asynchronous distributed best-response algorithm.

Every agent keeps its own copy of all N policies. At each integer time an
agent either computes (replacing its own entry with its best response to
the other entries of its memory) or idles, and may additionally send its
own entry to any set of other agents. All reads at time ``t`` see the
memories of time ``t - 1``; in particular a transmission at ``t`` carries
the sender's policy from ``t - 1`` even if the sender also computes at ``t``.

Agents are 0-based in Python and 1-based in schedule files and CSV output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .best_response import best_response_j
from .contraction import build_certificate
from .team_model import (
    PolicyProfile,
    ShapeError,
    SizeError,
    StaticTeam,
    policy_l1_norms,
    uniform_profile,
)

COMPUTE = "compute"
IDLE = "idle"

ROUND_ROBIN = "round-robin"
GAUSS_SEIDEL = "gauss-seidel"
RANDOM_BOUNDED = "random-bounded"
SCHEDULE_KINDS = (ROUND_ROBIN, GAUSS_SEIDEL, RANDOM_BOUNDED)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Event table over times ``1..horizon``.

    ``compute[t-1, i]`` marks a computation of agent ``i`` at time ``t``;
    ``transmit[t-1, i, j]`` a transmission from ``i`` to ``j``.
    ``window_bound`` is the compute-and-broadcast window the generator
    guarantees, if known.
    """

    compute: np.ndarray
    transmit: np.ndarray
    window_bound: int | None = None

    def __post_init__(self):
        compute = np.array(self.compute, dtype=bool)
        transmit = np.array(self.transmit, dtype=bool)
        if compute.ndim != 2:
            raise ShapeError("compute table must be (horizon, agents)")
        t, n = compute.shape
        if transmit.shape != (t, n, n):
            raise ShapeError(f"transmit table has shape {transmit.shape}, expected {(t, n, n)}")
        if np.any(transmit[:, np.arange(n), np.arange(n)]):
            raise ShapeError("an agent cannot transmit to itself")
        compute.flags.writeable = False
        transmit.flags.writeable = False
        object.__setattr__(self, "compute", compute)
        object.__setattr__(self, "transmit", transmit)

    @property
    def horizon(self) -> int:
        return self.compute.shape[0]

    @property
    def num_agents(self) -> int:
        return self.compute.shape[1]

    @classmethod
    def idle(cls, num_agents: int, horizon: int) -> Schedule:
        return cls(np.zeros((horizon, num_agents), bool), np.zeros((horizon, num_agents, num_agents), bool))

    @classmethod
    def from_events(cls, events: Iterable[dict], num_agents: int, horizon: int | None = None,
                    window_bound: int | None = None) -> Schedule:
        """Build from ``{t, agent, action, transmit_to}`` records (1-based).

        Missing ``(t, agent)`` pairs are idle without transmissions.
        """
        events = list(events)
        if horizon is None:
            horizon = max((int(e["t"]) for e in events), default=0)
        compute = np.zeros((horizon, num_agents), bool)
        transmit = np.zeros((horizon, num_agents, num_agents), bool)
        for k, e in enumerate(events):
            t, a = int(e["t"]), int(e["agent"])
            if not (1 <= t <= horizon and 1 <= a <= num_agents):
                raise ShapeError(f"event {k}: time {t} or agent {a} out of range")
            action = e.get("action", IDLE)
            if action not in (COMPUTE, IDLE):
                raise ValueError(f"event {k}: unknown action {action!r}")
            compute[t - 1, a - 1] |= action == COMPUTE
            for b in e.get("transmit_to", []):
                b = int(b)
                if not 1 <= b <= num_agents or b == a:
                    raise ShapeError(f"event {k}: invalid transmit target {b}")
                transmit[t - 1, a - 1, b - 1] = True
        return cls(compute, transmit, window_bound)

    def to_events(self) -> list[dict]:
        out = []
        for t in range(self.horizon):
            for a in range(self.num_agents):
                out.append({
                    "t": t + 1,
                    "agent": a + 1,
                    "action": COMPUTE if self.compute[t, a] else IDLE,
                    "transmit_to": [int(b) + 1 for b in np.flatnonzero(self.transmit[t, a])],
                })
        return out

    def event_label(self, t: int, a: int) -> str:
        """Compact description of agent ``a``'s event at time ``t`` (1-based t)."""
        label = COMPUTE if self.compute[t - 1, a] else IDLE
        targets = np.flatnonzero(self.transmit[t - 1, a])
        if targets.size:
            label += "+tx[" + " ".join(str(int(b) + 1) for b in targets) + "]"
        return label


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def generate_schedule(kind: str, num_agents: int, horizon: int, seed: int | None = None,
                      bound: int | None = None) -> Schedule:
    """Concrete schedules with a known compute-and-broadcast window.

    * ``round-robin``: at time t agent ``(t-1) mod N`` computes and
      broadcasts (the broadcast carries its previous policy). Window N.
    * ``gauss-seidel``: agent ``(t-1) mod N`` computes at t and broadcasts
      the fresh result at t+1, reproducing sequential best-response
      sweeps. Window N+1.
    * ``random-bounded``: time is cut into blocks of length ``bound``; in
      every full block each agent computes at least once and transmits to
      each other agent at least once, at random times, plus random extra
      computations. Window at most 2 * bound.
    """
    n = num_agents
    compute = np.zeros((horizon, n), bool)
    transmit = np.zeros((horizon, n, n), bool)
    others = ~np.eye(n, dtype=bool)
    if kind == ROUND_ROBIN:
        if horizon < n:
            raise SizeError(f"round-robin needs horizon >= {n}")
        for t in range(horizon):
            a = t % n
            compute[t, a] = True
            transmit[t, a] = others[a]
        window = n
    elif kind == GAUSS_SEIDEL:
        if horizon < n + 1:
            raise SizeError(f"gauss-seidel needs horizon >= {n + 1}")
        for t in range(horizon):
            compute[t, t % n] = True
            if t >= 1:
                prev = (t - 1) % n
                transmit[t, prev] = others[prev]
        window = n + 1
    elif kind == RANDOM_BOUNDED:
        if bound is None or bound < 1:
            raise ValueError("random-bounded needs a block length bound >= 1")
        if horizon < bound:
            raise SizeError(f"random-bounded needs horizon >= {bound}")
        rng = np.random.default_rng(seed)
        nblocks = horizon // bound
        for b in range(nblocks):
            start = b * bound
            for a in range(n):
                compute[start + rng.integers(bound), a] = True
                for j in range(n):
                    if j != a:
                        transmit[start + rng.integers(bound), a, j] = True
        compute |= rng.random((horizon, n)) < 0.25
        window = 2 * bound
    else:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")
    return Schedule(compute, transmit, window)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleValidity:
    """Finite-horizon check of the compute-and-broadcast liveness condition.

    For a start time ``s`` the witness window is the shortest ``[s, e]``
    in which the agent computes at least once and transmits to every other
    agent at least once. Starts in the final ``window - 1`` times (the
    tail) are allowed to lack a witness. ``first_violation[a]`` is the
    earliest start before the tail whose witness is missing or too long.
    """

    valid: bool
    window: int | None
    max_witness_window: int | None
    tail_start: int | None
    first_violation: tuple[int | None, ...]
    violations: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "window": self.window,
            "max_witness_window": self.max_witness_window,
            "tail_start": self.tail_start,
            "first_violation": [
                None if s is None else {"agent": a + 1, "t": s} for a, s in enumerate(self.first_violation)
            ],
            "violations": [{"agent": a + 1, "t": s} for a, s in self.violations],
        }


def _next_occurrence(flags: np.ndarray) -> np.ndarray:
    """``out[s]`` = first index ``>= s`` where flags is true, else ``inf``."""
    out = np.full(flags.shape[0] + 1, np.inf)
    for s in range(flags.shape[0] - 1, -1, -1):
        out[s] = s if flags[s] else out[s + 1]
    return out[:-1]


def witness_ends(schedule: Schedule) -> np.ndarray:
    """``ends[s-1, a]``: last time of agent a's shortest window from start s (inf if none)."""
    n, horizon = schedule.num_agents, schedule.horizon
    ends = np.empty((horizon, n))
    for a in range(n):
        e = _next_occurrence(schedule.compute[:, a])
        for j in range(n):
            if j != a:
                e = np.maximum(e, _next_occurrence(schedule.transmit[:, a, j]))
        ends[:, a] = e + 1
    return ends


def validate_schedule(schedule: Schedule, max_window: int | None = None) -> ScheduleValidity:
    horizon = schedule.horizon
    ends = witness_ends(schedule)
    starts = np.arange(1, horizon + 1)[:, None]
    lengths = ends - starts + 1
    finite = np.isfinite(lengths)
    observed = int(lengths[finite].max()) if finite.any() else None
    window = max_window if max_window is not None else schedule.window_bound
    if window is None:
        window = observed
    first = []
    for a in range(schedule.num_agents):
        bad = np.flatnonzero(~finite[:, a])
        first.append(int(bad[0]) + 1 if bad.size else None)
    if window is None:
        return ScheduleValidity(False, None, None, None, tuple(first),
                                tuple((a, s) for a, s in enumerate(first) if s is not None))
    tail_start = horizon - window + 2
    violations = []
    first = [None] * schedule.num_agents
    for a in range(schedule.num_agents):
        for s in range(1, min(tail_start, horizon + 1)):
            if not finite[s - 1, a] or lengths[s - 1, a] > window:
                violations.append((a, s))
                first[a] = s
                break
    return ScheduleValidity(
        valid=not violations and tail_start > 1,
        window=window,
        max_witness_window=observed,
        tail_start=tail_start,
        first_violation=tuple(first),
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AsyncTrace:
    """History of the diagonal profile ``gamma_j^(t) = gamma_j^(t)(j)``.

    Row ``t-1`` of the arrays refers to time ``t``; time 0 is kept
    separately in ``initial_*``.
    """

    schedule: Schedule
    diagonal: list[PolicyProfile]
    initial_diagonal: PolicyProfile
    validity: ScheduleValidity
    distance: np.ndarray | None = None
    memory_weighted: np.ndarray | None = None
    initial_distance: np.ndarray | None = None
    initial_memory_weighted: np.ndarray | None = None
    weights: np.ndarray | None = None
    memories: list[list[PolicyProfile]] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.diagonal)

    @property
    def final(self) -> PolicyProfile:
        return self.diagonal[-1] if self.diagonal else self.initial_diagonal

    def final_distance(self) -> np.ndarray | None:
        if self.distance is None:
            return None
        return self.distance[-1] if len(self.distance) else self.initial_distance


def _memory_weighted(team, memory, gamma_star, v) -> float:
    d = policy_l1_norms(team, [m - s for m, s in zip(memory, gamma_star.tables)])
    return float(np.max(d / v))


def run_async(team: StaticTeam, schedule: Schedule,
              init_memories: Sequence[PolicyProfile] | None = None,
              gamma_star: PolicyProfile | None = None,
              weights: np.ndarray | None = None,
              keep_memories: bool = False) -> AsyncTrace:
    """Apply the memory-update rules for every time step of ``schedule``.

    With ``gamma_star`` the trace also records per-agent distances
    ``||gamma_j^(t) - gamma*_j||_{L1}`` and, per memory m, the weighted
    distance ``max_j ||gamma^(t)_j(m) - gamma*_j||_{L1} / v_j`` with v from
    the contraction certificate (or ``weights``).
    """
    n = team.num_agents
    if schedule.num_agents != n:
        raise ShapeError(f"schedule has {schedule.num_agents} agents, team has {n}")
    if init_memories is None:
        init_memories = [uniform_profile(team)] * n
    if len(init_memories) != n:
        raise ShapeError(f"need {n} initial memories, got {len(init_memories)}")
    for m in init_memories:
        team.check_profile(m)
    mem = [list(m.tables) for m in init_memories]

    track = gamma_star is not None
    if track:
        team.check_profile(gamma_star)
        v = build_certificate(team).weight_vector if weights is None else np.asarray(weights, float)
        star = gamma_star.tables
    else:
        v = None

    def diag_of(memory):
        return PolicyProfile.from_tables([memory[j][j] for j in range(n)])

    def measure(memory):
        d = policy_l1_norms(team, [memory[j][j] - star[j] for j in range(n)])
        w = np.array([_memory_weighted(team, memory[m], gamma_star, v) for m in range(n)])
        return d, w

    initial_diag = diag_of(mem)
    init_d, init_w = measure(mem) if track else (None, None)
    diagonal, dists, wdists, snaps = [], [], [], []
    for t in range(schedule.horizon):
        prev = mem
        mem = [list(row) for row in prev]
        for i in np.flatnonzero(schedule.compute[t]):
            view = PolicyProfile.from_tables(prev[i])
            mem[i][i] = best_response_j(team, view, int(i)).table
        senders, receivers = np.nonzero(schedule.transmit[t])
        for i, j in zip(senders, receivers):
            mem[j][i] = prev[i][i]
        diagonal.append(diag_of(mem))
        if track:
            d, w = measure(mem)
            dists.append(d)
            wdists.append(w)
        if keep_memories:
            snaps.append([PolicyProfile.from_tables(row) for row in mem])
    return AsyncTrace(
        schedule=schedule,
        diagonal=diagonal,
        initial_diagonal=initial_diag,
        validity=validate_schedule(schedule),
        distance=np.array(dists).reshape(-1, n) if track else None,
        memory_weighted=np.array(wdists).reshape(-1, n) if track else None,
        initial_distance=init_d,
        initial_memory_weighted=init_w,
        weights=v,
        memories=snaps if keep_memories else None,
    )


def nested_set_excursions(trace: AsyncTrace, tol: float = 1e-9) -> list[tuple[int, int, float, float]]:
    """Times where a memory leaves the smallest nested set all memories shared before.

    Once every memory lies within weighted distance ``D`` of the fixed
    point, compute and transmit events keep them there. Returns
    ``(t, memory, value, level)`` for each excursion above the running
    level by more than ``tol``.
    """
    if trace.memory_weighted is None:
        raise ValueError("trace was run without a reference fixed point")
    level = float(np.max(trace.initial_memory_weighted))
    out = []
    for t, row in enumerate(trace.memory_weighted, start=1):
        for m, value in enumerate(row):
            if value > level + tol:
                out.append((t, m, float(value), level))
        level = min(level, float(np.max(row)))
    return out
