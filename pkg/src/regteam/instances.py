"""Small hand-built and random team instances."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .regularizers import NEG_ENTROPY, RegularizerSpec
from .team_model import DynamicTeamSpec, StaticTeam


def _labels(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(k))


def _regs(action_sizes, temperature, kind=NEG_ENTROPY):
    temps = np.broadcast_to(np.asarray(temperature, dtype=float), (len(action_sizes),))
    return tuple(RegularizerSpec(kind, float(t), nu) for t, nu in zip(temps, action_sizes))


def static_team(reward, temperature=1.0, kind=NEG_ENTROPY) -> StaticTeam:
    reward = np.asarray(reward, dtype=float)
    n = reward.ndim // 2
    obs, act = reward.shape[:n], reward.shape[n:]
    return StaticTeam(
        reward,
        tuple(_labels("y", k) for k in obs),
        tuple(_labels("u", k) for k in act),
        _regs(act, temperature, kind),
    )


def example1_two_agent(temperature: float = 1.0) -> StaticTeam:
    """Two agents, binary observations and actions.

    ``r = 0.5 [u1 == u2] + 0.5 [u1 == y1] + 0.5 [u2 == y2]``: each agent
    wants to report its own observation and to agree with the other.
    Both local oscillations equal 1.
    """
    r = np.zeros((2, 2, 2, 2))
    for y1, y2, u1, u2 in itertools.product(range(2), repeat=4):
        r[y1, y2, u1, u2] = 0.5 * (u1 == u2) + 0.5 * (u1 == y1) + 0.5 * (u2 == y2)
    return static_team(r, temperature)


def circular_team(n: int = 3, temperature: float = 1.0) -> StaticTeam:
    """Circularly coupled team ``r = sum_k r_k(y_k, y_{k+1}, u_k, u_{k+1})``.

    ``r_k = 0.5 [u_k xor u_{k+1} == y_k xor y_{k+1}]``, indices mod n.
    Every local oscillation equals 1.
    """
    r = np.zeros((2,) * (2 * n))
    for idx in itertools.product(range(2), repeat=2 * n):
        y, u = idx[:n], idx[n:]
        r[idx] = sum(0.5 * ((u[k] ^ u[(k + 1) % n]) == (y[k] ^ y[(k + 1) % n])) for k in range(n))
    return static_team(r, temperature)


def matching_team(temperature: float = 1.0) -> StaticTeam:
    """``r(y, u) = [u1 == u2]`` with binary observations and actions."""
    r = np.zeros((2, 2, 2, 2))
    for y1, y2, u1, u2 in itertools.product(range(2), repeat=4):
        r[y1, y2, u1, u2] = float(u1 == u2)
    return static_team(r, temperature)


def signaling_spec() -> DynamicTeamSpec:
    """Two-stage team: agent 2 sees a noisy copy of agent 1's action.

    The state is a fair bit; agent 1 observes it through a 0.8-accurate
    channel; agent 2 observes agent 1's action through a 0.9-accurate
    channel. The team is rewarded when agent 2 guesses the state, plus a
    smaller bonus when agent 1 does.
    """
    prior = np.array([0.5, 0.5])
    w1 = np.array([[0.8, 0.2], [0.2, 0.8]])  # (x, y1)
    w2 = np.zeros((2, 2, 2))  # (x, u1, y2)
    for x, u1, y2 in itertools.product(range(2), repeat=3):
        w2[x, u1, y2] = 0.9 if y2 == u1 else 0.1
    p = np.zeros((2, 2, 2, 2, 2))
    for x, y1, y2, u1, u2 in itertools.product(range(2), repeat=5):
        p[x, y1, y2, u1, u2] = 1.0 * (u2 == x) + 0.25 * (u1 == x)
    return DynamicTeamSpec(
        state_labels=("s0", "s1"),
        prior=prior,
        obs_labels=(("z0", "z1"), ("m0", "m1")),
        action_labels=(("a0", "a1"), ("g0", "g1")),
        channels=(w1, w2),
        reward_p=p,
    )


def random_static_team(rng: np.random.Generator, obs_sizes: Sequence[int], action_sizes: Sequence[int],
                       temperature=1.0, kind=NEG_ENTROPY) -> StaticTeam:
    return static_team(rng.random(tuple(obs_sizes) + tuple(action_sizes)), temperature, kind)


def contractive_random_team(rng: np.random.Generator, obs_sizes, action_sizes, target_radius=0.7,
                            kind=NEG_ENTROPY) -> StaticTeam:
    """Random team whose temperatures are set so that alpha(P) == target_radius.

    With a common temperature tau, ``P = P_1 / tau``, so scaling tau scales
    the spectral radius inversely.
    """
    from .contraction import build_certificate

    base = random_static_team(rng, obs_sizes, action_sizes, 1.0, kind)
    radius = build_certificate(base).spectral_radius
    tau = radius / target_radius if radius > 0 else 1.0
    return base.with_regularizers(_regs(base.action_sizes, tau, kind))


def random_dynamic_spec(rng: np.random.Generator, num_states: int, obs_sizes: Sequence[int],
                        action_sizes: Sequence[int], deterministic: bool = False) -> DynamicTeamSpec:
    """Random sequential team; channels depend on the state and earlier actions."""
    n = len(obs_sizes)
    channels = []
    for i in range(n):
        shape = (num_states,) + tuple(action_sizes[:i])
        if deterministic:
            pick = rng.integers(obs_sizes[i], size=shape)
            w = np.eye(obs_sizes[i])[pick]
        else:
            w = rng.dirichlet(np.ones(obs_sizes[i]), size=shape)
        channels.append(w)
    return DynamicTeamSpec(
        state_labels=_labels("x", num_states),
        prior=rng.dirichlet(np.ones(num_states)),
        obs_labels=tuple(_labels("y", k) for k in obs_sizes),
        action_labels=tuple(_labels("u", k) for k in action_sizes),
        channels=tuple(channels),
        reward_p=rng.random((num_states,) + tuple(obs_sizes) + tuple(action_sizes)),
    )
