import itertools

import numpy as np
import pytest

from regteam.instances import random_dynamic_spec, random_static_team, static_team
from regteam.regularizers import RegularizerSpec
from regteam.static_reduction import reduce
from regteam.team_model import (
    DynamicTeamSpec,
    Policy,
    PolicyProfile,
    ShapeError,
    SizeError,
    StaticTeam,
    ValidationError,
    profile_distance,
    random_profile,
    reward_J,
    reward_J_dynamic,
    reward_R,
    uniform_profile,
)

from .conftest import naive_J


def test_policy_rows_must_be_distributions():
    Policy(0, [[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValidationError):
        Policy(0, [[0.5, 0.4]])
    with pytest.raises(ValidationError):
        Policy(0, [[1.5, -0.5]])
    with pytest.raises(ShapeError):
        PolicyProfile((Policy(1, [[1.0]]),))


def test_policy_table_is_read_only():
    pol = Policy(0, [[0.5, 0.5]])
    with pytest.raises(ValueError):
        pol.table[0, 0] = 1.0


def test_static_team_rejects_bad_shapes_and_marginals():
    r = np.zeros((2, 2))
    regs = (RegularizerSpec("neg_entropy", 1.0, 2),)
    StaticTeam(r, (("a", "b"),), (("x", "y"),), regs)
    with pytest.raises(ShapeError):
        StaticTeam(np.zeros((2, 3)), (("a", "b"),), (("x", "y"),), regs)
    with pytest.raises(ValidationError):
        StaticTeam(r, (("a", "b"),), (("x", "y"),), regs, obs_marginals=([0.3, 0.7],))
    with pytest.raises(SizeError):
        StaticTeam(r, (("a", "b"),), (("x", "y"),), regs, max_entries=3)


def test_reward_R_vertex_and_constant(rng):
    team = random_static_team(rng, (2, 3), (2, 3))
    y = (1, 2)
    d = [np.eye(2)[1], np.eye(3)[0]]
    assert reward_R(team, y, d) == team.reward[1, 2, 1, 0]
    const = static_team(np.full((2, 2, 3, 2), 4.25))
    for _ in range(20):
        ds = [rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))]
        assert reward_R(const, (0, 1), ds) == pytest.approx(4.25, abs=1e-14)
    with pytest.raises(ShapeError):
        reward_R(team, y, [np.ones(3) / 3, np.ones(3) / 3])


def test_reward_R_uniform_two_agents_is_mean_of_four(rng):
    team = random_static_team(rng, (2, 2), (2, 2))
    for y in itertools.product(range(2), repeat=2):
        r = team.reward[y]
        explicit = (r[0, 0] + r[0, 1] + r[1, 0] + r[1, 1]) / 4
        assert reward_R(team, y, [np.full(2, 0.5)] * 2) == pytest.approx(explicit, abs=1e-15)


def test_reward_R_is_affine_in_each_argument(rng):
    team = random_static_team(rng, (2, 2, 2), (3, 2, 2))
    y = (0, 1, 1)
    base = [rng.dirichlet(np.ones(k)) for k in team.action_sizes]
    for j in range(3):
        a, b = rng.dirichlet(np.ones(team.action_sizes[j]), size=2)
        lam = 0.3
        vals = []
        for d in (a, b, lam * a + (1 - lam) * b):
            args = list(base)
            args[j] = d
            vals.append(reward_R(team, y, args))
        assert vals[2] == pytest.approx(lam * vals[0] + (1 - lam) * vals[1], abs=1e-14)


def test_reward_J_matches_exhaustive_sum(rng):
    for obs, act in [((1,), (3,)), ((2, 3), (2, 2)), ((2, 2, 2), (2, 3, 2))]:
        team = random_static_team(rng, obs, act)
        for _ in range(5):
            prof = random_profile(team, rng)
            assert reward_J(team, prof) == pytest.approx(naive_J(team.reward, prof.tables), abs=1e-13)


def test_reward_J_degenerate_and_constant(rng):
    team = static_team(np.array([[3.0, -1.0, 2.0]]))
    gamma = PolicyProfile.from_tables([[[0.2, 0.5, 0.3]]])
    assert reward_J(team, gamma) == pytest.approx(3 * 0.2 - 0.5 + 2 * 0.3, abs=1e-15)
    const = static_team(np.full((2, 3, 2, 2), -1.5))
    assert reward_J(const, random_profile(const, rng)) == pytest.approx(-1.5, abs=1e-14)


def test_reward_J_bounded_by_reward_range(rng):
    team = random_static_team(rng, (2, 3), (3, 2))
    for _ in range(200):
        j = reward_J(team, random_profile(team, rng))
        assert team.reward.min() - 1e-12 <= j <= team.reward.max() + 1e-12


def test_profile_distance_uses_weighted_l1(rng):
    team = random_static_team(rng, (4,), (3,))
    a = PolicyProfile.from_tables([np.tile([1.0, 0, 0], (4, 1))])
    b = PolicyProfile.from_tables([np.tile([0, 1.0, 0], (4, 1))])
    np.testing.assert_allclose(profile_distance(team, a, b), [2.0])


# ---------------------------------------------------------------------------
# dynamic model
# ---------------------------------------------------------------------------


def test_dynamic_constant_reward(rng):
    spec = random_dynamic_spec(rng, 3, (2, 2), (2, 3))
    spec = DynamicTeamSpec(spec.state_labels, spec.prior, spec.obs_labels, spec.action_labels,
                           spec.channels, np.full(spec.reward_p.shape, 2.5))
    assert reward_J_dynamic(spec, random_profile(spec, rng)) == pytest.approx(2.5, abs=1e-14)


def test_dynamic_deterministic_trajectory():
    # y1 = x, u1 = y1, y2 = 1 - u1, u2 = y2: trajectory is fixed by x
    prior = np.array([0.3, 0.7])
    w1 = np.eye(2)  # (x, y1)
    w2 = np.zeros((2, 2, 2))  # (x, u1, y2)
    for x, u1 in itertools.product(range(2), repeat=2):
        w2[x, u1, 1 - u1] = 1.0
    p = np.arange(32, dtype=float).reshape(2, 2, 2, 2, 2)
    spec = DynamicTeamSpec(("a", "b"), prior, (("0", "1"),) * 2, (("0", "1"),) * 2, (w1, w2), p)
    ident = PolicyProfile.from_tables([np.eye(2), np.eye(2)])
    expected = 0.3 * p[0, 0, 1, 0, 1] + 0.7 * p[1, 1, 0, 1, 0]
    assert reward_J_dynamic(spec, ident) == pytest.approx(expected, abs=1e-12)


def test_dynamic_spec_validation():
    w_bad = np.array([[0.6, 0.3], [0.5, 0.5]])
    with pytest.raises(ValidationError, match=r"row \(0,\) sums to 0.9"):
        DynamicTeamSpec(("a", "b"), [0.5, 0.5], (("0", "1"),), (("0", "1"),), (w_bad,), np.zeros((2, 2, 2)))
    with pytest.raises(ValidationError):
        DynamicTeamSpec(("a", "b"), [0.6, 0.6], (("0", "1"),), (("0", "1"),), (np.eye(2),), np.zeros((2, 2, 2)))
    with pytest.raises(ValidationError):
        DynamicTeamSpec(("a", "b"), [0.5, 0.5], (("0", "1"),), (("0", "1"),), (np.eye(2),), -np.ones((2, 2, 2)))
    zero_row = np.array([[0.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ValidationError):
        DynamicTeamSpec(("a", "b"), [0.5, 0.5], (("0", "1"),), (("0", "1"),), (zero_row,), np.zeros((2, 2, 2)))


def test_dynamic_equals_static_after_reduction(rng):
    for _ in range(5):
        spec = random_dynamic_spec(rng, 3, (2, 3), (3, 2))
        regs = [RegularizerSpec("neg_entropy", 1.0, k) for k in spec.action_sizes]
        team = reduce(spec, regs)
        for _ in range(10):
            prof = random_profile(team, rng)
            assert abs(reward_J(team, prof) - reward_J_dynamic(spec, prof)) < 1e-10


def test_dynamic_monte_carlo_agrees(rng):
    spec = random_dynamic_spec(rng, 2, (2, 2), (2, 2))
    prof = random_profile(spec, rng)
    n_samples = 40000
    x = rng.choice(2, size=n_samples, p=spec.prior)
    y1 = (rng.random(n_samples) < spec.channels[0][x, 1]).astype(int)
    u1 = (rng.random(n_samples) < prof[0].table[y1, 1]).astype(int)
    y2 = (rng.random(n_samples) < spec.channels[1][x, u1, 1]).astype(int)
    u2 = (rng.random(n_samples) < prof[1].table[y2, 1]).astype(int)
    vals = spec.reward_p[x, y1, y2, u1, u2]
    est, se = vals.mean(), vals.std() / np.sqrt(n_samples)
    assert abs(est - reward_J_dynamic(spec, prof)) < 5 * se


def test_uniform_profile_shapes(rng):
    team = random_static_team(rng, (2, 3), (4, 2))
    prof = uniform_profile(team)
    assert [t.shape for t in prof.tables] == [(2, 4), (3, 2)]
