"""Change-of-measure reduction of a dynamic team to an independent static team."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .regularizers import RegularizerSpec
from .team_model import DynamicTeamSpec, ShapeError, StaticTeam, check_size


def density_weights(spec: DynamicTeamSpec) -> np.ndarray:
    """``prod_i |Y_i| * W_i(y_i | x, u^{1:i-1})`` on axes ``(x, y..., u...)``."""
    n = spec.num_agents
    nx = len(spec.state_labels)
    full = (nx,) + spec.obs_sizes + spec.action_sizes
    out = np.ones(full)
    for i, w in enumerate(spec.channels):
        # (x, u_1..u_{i-1}, y_i) -> (x, y_i, u_1..u_{i-1}) so axes ascend in the full layout
        w = np.moveaxis(w, -1, 1)
        shape = [1] * (2 * n + 1)
        shape[0] = nx
        shape[1 + i] = spec.obs_sizes[i]
        for k in range(i):
            shape[1 + n + k] = spec.action_sizes[k]
        out = out * (spec.obs_sizes[i] * w.reshape(shape))
    return out


def reduce(spec: DynamicTeamSpec, regs: Sequence[RegularizerSpec],
           max_entries: int | None = None) -> StaticTeam:
    """Static reward ``r(y,u) = sum_x p(x,y,u) prod_i |Y_i| W_i(y_i|x,u^{1:i-1}) P(x)``.

    The sum over states runs in label order so results are reproducible
    bit for bit.
    """
    if len(regs) != spec.num_agents:
        raise ShapeError(f"expected {spec.num_agents} regularizers, got {len(regs)}")
    cap = spec.max_entries if max_entries is None else max_entries
    check_size(spec.obs_sizes + spec.action_sizes, cap, "reward tensor")
    weights = density_weights(spec)
    r = np.zeros(spec.obs_sizes + spec.action_sizes)
    for x in range(len(spec.state_labels)):
        r += spec.prior[x] * (spec.reward_p[x] * weights[x])
    return StaticTeam(r, spec.obs_labels, spec.action_labels, tuple(regs), max_entries=cap)
