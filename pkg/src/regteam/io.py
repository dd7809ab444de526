"""JSON problem/profile files and CSV traces.

Problem file layout::

    {
      "static":  {"agents": [{"observations": [...], "actions": [...]}, ...],
                  "reward": <nested list, axes y_1..y_N, u_1..u_N>,
                  "obs_marginals": [[...], ...]            # optional, must be uniform
                 },
      -- or --
      "dynamic": {"states": [...], "prior": [...],
                  "agents": [{"observations": [...], "actions": [...],
                              "channel": <nested list, axes x, u_1..u_{i-1}, y_i>}, ...],
                  "reward": <nested list, axes x, y_1..y_N, u_1..u_N>},
      "regularizers": [{"kind": "neg_entropy" | "rel_entropy_uniform", "temperature": 1.0}, ...],
      "solver": {"tol": 1e-10, "max_iter": 10000, "seed": 0}     # optional
    }

Floats are written with ``repr`` so every double survives a round trip.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .regularizers import RegularizerSpec
from .static_reduction import reduce
from .team_model import DynamicTeamSpec, PolicyProfile, StaticTeam

BUNDLED = ("example1_two_agent", "example2_circular_n3", "example3_signaling_dynamic")


class ProblemFileError(ValueError):
    def __init__(self, source: str, where: str, message: str):
        super().__init__(f"{source}: {where}: {message}")
        self.source = source
        self.where = where


@dataclass
class Problem:
    regularizers: tuple[RegularizerSpec, ...]
    static: StaticTeam | None = None
    dynamic: DynamicTeamSpec | None = None
    solver: dict[str, Any] = field(default_factory=dict)

    def static_team(self) -> StaticTeam:
        if self.static is not None:
            return self.static
        return reduce(self.dynamic, self.regularizers)


# ---------------------------------------------------------------------------
# reading
# ---------------------------------------------------------------------------


def resolve_input(name: str | Path) -> Path | Any:
    path = Path(name)
    if path.exists():
        return path
    if str(name) in BUNDLED:
        return resources.files("regteam") / "data" / f"{name}.json"
    raise FileNotFoundError(f"no such problem file or bundled example: {name}")


def read_json(name: str | Path) -> tuple[Any, str]:
    src = resolve_input(name)
    text = src.read_text()
    try:
        return json.loads(text), str(name)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(str(name), f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def _get(d: dict, key: str, source: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ProblemFileError(source, where, f"missing field {key!r}")
    return d[key]


def _array(value, source, where) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(source, where, f"not a rectangular numeric array ({exc})") from None
    return arr


def parse_problem(data: dict, source: str = "<problem>") -> Problem:
    has_static, has_dynamic = "static" in data, "dynamic" in data
    if has_static == has_dynamic:
        raise ProblemFileError(source, "top level", "exactly one of 'static' or 'dynamic' is required")
    section = "static" if has_static else "dynamic"
    body = data[section]
    agents = _get(body, "agents", source, section)
    obs = [_get(a, "observations", source, f"{section}.agents[{i}]") for i, a in enumerate(agents)]
    act = [_get(a, "actions", source, f"{section}.agents[{i}]") for i, a in enumerate(agents)]
    reg_entries = _get(data, "regularizers", source, "top level")
    if len(reg_entries) != len(agents):
        raise ProblemFileError(source, "regularizers", f"expected {len(agents)} entries, got {len(reg_entries)}")
    regs = []
    for i, e in enumerate(reg_entries):
        try:
            regs.append(RegularizerSpec(_get(e, "kind", source, f"regularizers[{i}]"),
                                        float(_get(e, "temperature", source, f"regularizers[{i}]")),
                                        len(act[i])))
        except ValueError as exc:
            if isinstance(exc, ProblemFileError):
                raise
            raise ProblemFileError(source, f"regularizers[{i}]", str(exc)) from None
    solver = dict(data.get("solver", {}))
    try:
        if has_static:
            reward = _array(_get(body, "reward", source, section), source, "static.reward")
            team = StaticTeam(reward, obs, act, tuple(regs), body.get("obs_marginals"))
            return Problem(tuple(regs), static=team, solver=solver)
        channels = [
            _array(_get(a, "channel", source, f"dynamic.agents[{i}]"), source, f"dynamic.agents[{i}].channel")
            for i, a in enumerate(agents)
        ]
        spec = DynamicTeamSpec(
            state_labels=_get(body, "states", source, section),
            prior=_array(_get(body, "prior", source, section), source, "dynamic.prior"),
            obs_labels=obs,
            action_labels=act,
            channels=tuple(channels),
            reward_p=_array(_get(body, "reward", source, section), source, "dynamic.reward"),
        )
    except ProblemFileError:
        raise
    except ValueError as exc:
        raise ProblemFileError(source, section, str(exc)) from None
    return Problem(tuple(regs), dynamic=spec, solver=solver)


def load_problem(name: str | Path) -> Problem:
    data, source = read_json(name)
    return parse_problem(data, source)


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def problem_to_dict(problem: Problem) -> dict:
    out: dict[str, Any] = {}
    if problem.static is not None:
        t = problem.static
        out["static"] = {
            "agents": [{"observations": list(o), "actions": list(a)}
                       for o, a in zip(t.obs_labels, t.action_labels)],
            "reward": t.reward.tolist(),
        }
    else:
        s = problem.dynamic
        out["dynamic"] = {
            "states": list(s.state_labels),
            "prior": s.prior.tolist(),
            "agents": [{"observations": list(o), "actions": list(a), "channel": w.tolist()}
                       for o, a, w in zip(s.obs_labels, s.action_labels, s.channels)],
            "reward": s.reward_p.tolist(),
        }
    out["regularizers"] = [r.to_dict() for r in problem.regularizers]
    if problem.solver:
        out["solver"] = dict(problem.solver)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj))


def save_problem(problem: Problem, path: str | Path) -> None:
    write_json(path, problem_to_dict(problem))


def profile_to_dict(team: StaticTeam, profile: PolicyProfile) -> list[dict]:
    return [
        {"agent": i + 1, "observations": list(team.obs_labels[i]), "actions": list(team.action_labels[i]),
         "table": pol.table.tolist()}
        for i, pol in enumerate(profile)
    ]


def profile_from_json(obj, team: StaticTeam) -> PolicyProfile:
    """Accepts a bare list of policy entries or a report with ``fixed_point``/``final_profile``."""
    if isinstance(obj, dict):
        for key in ("fixed_point", "final_profile", "profile"):
            if key in obj:
                obj = obj[key]
                break
        else:
            raise ValueError("no policy profile found in JSON object")
    tables = [None] * team.num_agents
    for entry in obj:
        i = int(entry["agent"]) - 1
        table = np.array(entry["table"], dtype=float)
        if "observations" in entry and tuple(entry["observations"]) != team.obs_labels[i]:
            raise ValueError(f"agent {i + 1}: observation labels do not match the problem")
        if "actions" in entry and tuple(entry["actions"]) != team.action_labels[i]:
            raise ValueError(f"agent {i + 1}: action labels do not match the problem")
        tables[i] = table
    if any(t is None for t in tables):
        raise ValueError("profile does not cover every agent")
    profile = PolicyProfile.from_tables(tables, tol=1e-9)
    team.check_profile(profile)
    return profile


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
