"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 3 ``analyze`` found spectral
radius >= 1, 4 ``schedule-validate`` found an invalid schedule.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .async_sim import (
    SCHEDULE_KINDS,
    Schedule,
    generate_schedule,
    nested_set_excursions,
    run_async,
    validate_schedule,
)
from .contraction import build_certificate
from .oracle import brute_force_J_star, reward_J_reg, sandwich_check
from .static_reduction import reduce
from .sync_solver import DEFAULT_MAX_ITER, DEFAULT_TOL, NoGuaranteeWarning, solve
from .team_model import reward_J, reward_J_dynamic, random_profile, uniform_profile

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNSATISFIED = 3
EXIT_BAD_SCHEDULE = 4

DEFAULT_HORIZON = 500

log = logging.getLogger("regteam")


def _emit(args, obj) -> None:
    text = io.dumps(obj)
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _settings(args, problem):
    s = problem.solver
    tol = args.tol if args.tol is not None else float(s.get("tol", DEFAULT_TOL))
    max_iter = args.max_iter if args.max_iter is not None else int(s.get("max_iter", DEFAULT_MAX_ITER))
    seed = args.seed if args.seed is not None else int(s.get("seed", 0))
    return tol, max_iter, seed


def cmd_reduce(args) -> int:
    problem = io.load_problem(args.input)
    if problem.dynamic is None:
        raise ValueError("reduce needs a problem with a 'dynamic' section")
    team = reduce(problem.dynamic, problem.regularizers)
    out = io.Problem(problem.regularizers, static=team, solver=problem.solver)
    result = {"reduced": True}
    if args.verify:
        _, _, seed = _settings(args, problem)
        rng = np.random.default_rng(seed)
        gaps = []
        for _ in range(args.verify_profiles):
            prof = random_profile(team, rng)
            gaps.append(abs(reward_J(team, prof) - reward_J_dynamic(problem.dynamic, prof)))
        result = {"max_gap": float(max(gaps)), "profiles": len(gaps), "equivalent": bool(max(gaps) < 1e-10)}
        if not result["equivalent"]:
            log.error("reduction check failed: max gap %g", max(gaps))
    if args.output:
        io.save_problem(out, args.output)
        # round-trip check through the loader
        io.load_problem(args.output)
    else:
        sys.stdout.write(io.dumps(io.problem_to_dict(out)))
    if args.verify:
        sys.stderr.write(json.dumps(result) + "\n")
        return EXIT_OK if result["equivalent"] else EXIT_INVALID
    return EXIT_OK


def cmd_analyze(args) -> int:
    team = io.load_problem(args.input).static_team()
    cert = build_certificate(team)
    _emit(args, cert.to_dict())
    return EXIT_OK if cert.satisfied else EXIT_UNSATISFIED


def _init_profile(kind, team, rng):
    return uniform_profile(team) if kind == "uniform" else random_profile(team, rng)


def cmd_solve_sync(args) -> int:
    problem = io.load_problem(args.input)
    team = problem.static_team()
    tol, max_iter, seed = _settings(args, problem)
    init = _init_profile(args.init, team, np.random.default_rng(seed))
    rep = solve(team, init=init, tol=tol, max_iter=max_iter)
    v = rep.certificate.weight_vector
    report = {
        "converged": rep.converged,
        "max_iter_reached": rep.max_iter_reached,
        "iterations": rep.iterations,
        "residual": rep.residual.tolist(),
        "weighted_residual": rep.weighted_residual,
        "aposteriori_bound": None if rep.aposteriori_bound is None else rep.aposteriori_bound.tolist(),
        "J": reward_J(team, rep.fixed_point),
        "J_reg": reward_J_reg(team, rep.fixed_point),
        "certificate": rep.certificate.to_dict(),
        "fixed_point": io.profile_to_dict(team, rep.fixed_point),
    }
    _emit(args, report)
    if args.trace:
        n = team.num_agents
        header = ["iter"] + [f"residual_agent_{i + 1}" for i in range(n)] + ["weighted_residual"]
        rows = ([k + 1, *r.tolist(), float(np.max(r / v))] for k, r in enumerate(rep.history))
        io.write_csv(args.trace, header, rows)
    return EXIT_OK


def _load_schedule(args, n) -> Schedule:
    if args.schedule_file:
        events, _ = io.read_json(args.schedule_file)
        if isinstance(events, dict):
            events = events["events"]
        return Schedule.from_events(events, n, args.horizon)
    horizon = DEFAULT_HORIZON if args.horizon is None else args.horizon
    return generate_schedule(args.schedule, n, horizon, seed=args.seed, bound=args.bound)


def cmd_solve_async(args) -> int:
    problem = io.load_problem(args.input)
    team = problem.static_team()
    tol, max_iter, seed = _settings(args, problem)
    if args.seed is None:
        args.seed = seed
    n = team.num_agents
    schedule = _load_schedule(args, n)
    rng = np.random.default_rng(seed)
    memories = [_init_profile(args.init, team, rng) for _ in range(n)]
    ref = solve(team, tol=min(tol, 1e-12), max_iter=max_iter)
    trace = run_async(team, schedule, memories, gamma_star=ref.fixed_point)
    excursions = nested_set_excursions(trace)
    final = trace.final_distance()
    report = {
        "horizon": schedule.horizon,
        "schedule_validity": trace.validity.to_dict(),
        "final_distance": final.tolist(),
        "max_final_distance": float(final.max()),
        "weight_vector": trace.weights.tolist(),
        "nested_set_excursions": len(excursions),
        "certificate": ref.certificate.to_dict(),
        "final_profile": io.profile_to_dict(team, trace.final),
    }
    _emit(args, report)
    if args.trace:
        header = (["t"] + [f"event_agent_{i + 1}" for i in range(n)]
                  + [f"distance_agent_{i + 1}" for i in range(n)]
                  + [f"weighted_memory_{m + 1}" for m in range(n)])
        rows = [[0] + ["init"] * n + trace.initial_distance.tolist() + trace.initial_memory_weighted.tolist()]
        for t in range(1, schedule.horizon + 1):
            rows.append([t] + [schedule.event_label(t, a) for a in range(n)]
                        + trace.distance[t - 1].tolist() + trace.memory_weighted[t - 1].tolist())
        io.write_csv(args.trace, header, rows)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    problem = io.load_problem(args.input)
    team = problem.static_team()
    if args.policy:
        obj, _ = io.read_json(args.policy)
        profile = io.profile_from_json(obj, team)
    else:
        tol, max_iter, _ = _settings(args, problem)
        profile = solve(team, tol=tol, max_iter=max_iter).fixed_point
    report = {"J": reward_J(team, profile), "J_reg": reward_J_reg(team, profile)}
    if problem.dynamic is not None:
        report["J_dynamic"] = reward_J_dynamic(problem.dynamic, profile)
    if args.sandwich:
        report["sandwich"] = sandwich_check(team, profile).to_dict()
    _emit(args, report)
    if args.sandwich and not report["sandwich"]["satisfied"]:
        return EXIT_INVALID
    return EXIT_OK


def cmd_brute_force(args) -> int:
    team = io.load_problem(args.input).static_team()
    value, profile = brute_force_J_star(team, max_profiles=args.max_profiles)
    _emit(args, {"J_star": value, "maximizer": io.profile_to_dict(team, profile)})
    return EXIT_OK


def _num_agents(args) -> int:
    if args.agents:
        return args.agents
    if args.input:
        return io.load_problem(args.input).static_team().num_agents
    raise ValueError("give --agents or --input")


def cmd_schedule_gen(args) -> int:
    n = _num_agents(args)
    sched = generate_schedule(args.kind, n, args.horizon, seed=args.seed, bound=args.bound)
    _emit(args, sched.to_events())
    return EXIT_OK


def cmd_schedule_validate(args) -> int:
    n = _num_agents(args)
    events, _ = io.read_json(args.schedule_file)
    sched = Schedule.from_events(events, n, args.horizon)
    validity = validate_schedule(sched, max_window=args.max_window)
    _emit(args, validity.to_dict())
    return EXIT_OK if validity.valid else EXIT_BAD_SCHEDULE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regteam", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        p.add_argument("--input", required=needs_input,
                       help="problem JSON file or bundled example name (" + ", ".join(io.BUNDLED) + ")")
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)

    p = sub.add_parser("reduce", help="static reduction of a dynamic problem")
    common(p)
    p.add_argument("--verify", action="store_true", help="compare both models on random profiles")
    p.add_argument("--verify-profiles", type=int, default=10)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("analyze", help="contraction certificate")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve-sync", help="synchronous best-response iteration")
    common(p)
    p.add_argument("--trace", help="per-iteration residual CSV")
    p.add_argument("--init", choices=("uniform", "random"), default="uniform")
    p.set_defaults(func=cmd_solve_sync)

    p = sub.add_parser("solve-async", help="simulate the asynchronous algorithm")
    common(p)
    p.add_argument("--schedule", choices=SCHEDULE_KINDS, default="round-robin")
    p.add_argument("--schedule-file", help="JSON list of {t, agent, action, transmit_to}")
    p.add_argument("--bound", type=int, default=3, help="block length for random-bounded")
    p.add_argument("--horizon", type=int, default=None,
                   help=f"number of time steps (default: length of --schedule-file, else {DEFAULT_HORIZON})")
    p.add_argument("--init", choices=("uniform", "random"), default="uniform",
                   help="initial memories; 'random' gives every agent a different profile")
    p.add_argument("--trace", help="per-time CSV trace")
    p.set_defaults(func=cmd_solve_async)

    p = sub.add_parser("evaluate", help="J and J_reg of a profile (default: the solved fixed point)")
    common(p)
    p.add_argument("--policy", help="profile JSON, or a solve-sync/solve-async report")
    p.add_argument("--sandwich", action="store_true", help="check the J* - sum beta <= J <= J* bound")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("brute-force", help="exact unregularized optimum over deterministic profiles")
    common(p)
    p.add_argument("--max-profiles", type=int, default=10**7)
    p.set_defaults(func=cmd_brute_force)

    p = sub.add_parser("schedule-gen", help="generate a schedule file")
    common(p, needs_input=False)
    p.add_argument("--agents", type=int)
    p.add_argument("--kind", choices=SCHEDULE_KINDS, default="round-robin")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--bound", type=int, default=3)
    p.set_defaults(func=cmd_schedule_gen)

    p = sub.add_parser("schedule-validate", help="check the compute-and-broadcast window condition")
    common(p, needs_input=False)
    p.add_argument("--agents", type=int)
    p.add_argument("--schedule-file", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--max-window", type=int, default=None)
    p.set_defaults(func=cmd_schedule_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    with warnings.catch_warnings():
        warnings.simplefilter("always", NoGuaranteeWarning)
        warnings.showwarning = lambda msg, *a, **k: log.warning("NO GUARANTEE: %s", msg)
        try:
            return args.func(args)
        except (ValueError, FileNotFoundError, KeyError) as exc:
            log.error("%s", exc)
            return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
