"""Entropy-type regularizers on the probability simplex.

Both supported kinds are scaled copies of the negative entropy, so their
Fenchel-conjugate gradient is the softmax map ``exp(g / tau)`` normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_ENTROPY = "neg_entropy"
REL_ENTROPY_UNIFORM = "rel_entropy_uniform"
KINDS = (NEG_ENTROPY, REL_ENTROPY_UNIFORM)

_ALIASES = {
    "negentropy": NEG_ENTROPY,
    "neg_entropy": NEG_ENTROPY,
    "relentropyuniform": REL_ENTROPY_UNIFORM,
    "rel_entropy_uniform": REL_ENTROPY_UNIFORM,
}


class DomainError(ValueError):
    """Input outside the domain of a regularizer map."""


@dataclass(frozen=True)
class RegularizerSpec:
    kind: str
    temperature: float
    action_count: int

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower().replace("-", "_"))
        if kind is None:
            raise ValueError(f"unknown regularizer kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError(f"temperature must be positive and finite, got {self.temperature}")
        if int(self.action_count) < 1:
            raise ValueError("action_count must be >= 1")
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "action_count", int(self.action_count))

    @property
    def strong_convexity(self) -> float:
        """Modulus rho w.r.t. the l1 norm (negative entropy is 1-strongly convex)."""
        return self.temperature

    def to_dict(self) -> dict:
        return {"kind": self.kind, "temperature": self.temperature}


def _check_distribution(reg: RegularizerSpec, delta) -> np.ndarray:
    delta = np.asarray(delta, dtype=float)
    if delta.shape[-1] != reg.action_count:
        raise ValueError(f"distribution has {delta.shape[-1]} entries, expected {reg.action_count}")
    if np.any(delta < 0) or not np.all(np.isfinite(delta)):
        raise DomainError("distribution entries must be finite and non-negative")
    return delta


def omega_value(reg: RegularizerSpec, delta) -> float | np.ndarray:
    """Regularizer value; works row-wise on a stack of distributions.

    Uses the convention ``0 * ln 0 = 0``.
    """
    delta = _check_distribution(reg, delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(delta > 0, delta * np.log(delta), 0.0)
    value = reg.temperature * terms.sum(axis=-1)
    if reg.kind == REL_ENTROPY_UNIFORM:
        value = value + reg.temperature * math.log(reg.action_count)
    return float(value) if np.ndim(value) == 0 else value


def conjugate_gradient(reg: RegularizerSpec, g) -> np.ndarray:
    """argmax over the simplex of <g, delta> - Omega(delta).

    Accepts a single score vector or a stack of them (last axis = actions).
    """
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != reg.action_count:
        raise ValueError(f"score vector has {g.shape[-1]} entries, expected {reg.action_count}")
    if not np.all(np.isfinite(g)):
        raise DomainError("score vector must be finite")
    z = (g - g.max(axis=-1, keepdims=True)) / reg.temperature
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def beta(reg: RegularizerSpec) -> float:
    """Range sup - inf of the regularizer over the simplex: tau * ln|U|."""
    return reg.temperature * math.log(reg.action_count)
