"""Command-line front end.

Exit status: 0 success, 1 usage or configuration error, 2 runtime or numeric
error, 3 a verification check failed.  Output files are written only after
the computation finishes, and contain no timings, so equal configurations
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import io
from .composite import entropic_instance, kappa_bar, run_comparison, verify_composite
from .dlfp import (
    fixed_point_gap_target,
    fixed_point_iteration_bound,
    run_dlfp,
    solve_fixed_point,
    uniform_state,
    verify_recursions,
)
from .errors import ConfigurationError, InvalidInputError, LogitPlayError, ParseError
from .game import RegularizedGame, duality_gap, kappa, uniform
from .lfp import global_complexity_estimate, locality_constants, monte_carlo, run_lfp
from .schedules import parse_schedule

EXPERIMENTS = ("dlfp", "lfp", "lfp-mc", "composite", "verify", "fixed-point", "complexity")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3

# Per-experiment defaults.  Each equals the default of the library call the
# value is passed to, so the CLI adds no defaults of its own.
_DEFAULT_SCHEDULE = {"dlfp": "constant", "verify": "constant", "lfp": "harmonic", "lfp-mc": "fw"}
_DEFAULT_TOL = {"fixed-point": 1e-10, "complexity": 1e-3, "verify": 1e-9, "composite": 1e-9, "lfp-mc": 1e-10}


@dataclass
class RunConfig:
    experiment: str
    payoff: str = "matching-pennies"
    eta: float | None = None
    eta_x: float | None = None
    eta_y: float | None = None
    tilt: str | None = None
    schedule: str | None = None
    iters: int = 1000
    seed: int = 0
    replicas: int = 1000
    burn_in: int = 100
    stride: int | None = None
    tol: float | None = None
    out: str | None = None
    allow_constant_step: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}")
        if self.iters < 1:
            raise ConfigurationError(f"--iters must be positive, got {self.iters}")
        if self.replicas < 2:
            raise ConfigurationError(f"--replicas must be at least 2, got {self.replicas}")
        if self.burn_in < 0 or (self.experiment == "lfp-mc" and self.burn_in > self.iters):
            raise ConfigurationError(f"--burn-in must lie in [0, iters], got {self.burn_in}")
        if self.stride is not None and self.stride < 1:
            raise ConfigurationError(f"--stride must be positive, got {self.stride}")
        if self.tol is not None and not self.tol > 0:
            raise ConfigurationError(f"--tol must be positive, got {self.tol}")
        if self.experiment == "composite":
            if self.eta_x is None or self.eta_y is None:
                if self.eta is None:
                    raise ConfigurationError("composite needs --eta-x and --eta-y (or --eta)")
                self.eta_x = self.eta if self.eta_x is None else self.eta_x
                self.eta_y = self.eta if self.eta_y is None else self.eta_y
        elif self.eta is None:
            raise ConfigurationError(f"{self.experiment} needs --eta")
        if self.schedule is None:
            self.schedule = _DEFAULT_SCHEDULE.get(self.experiment)
        if self.tol is None:
            self.tol = _DEFAULT_TOL.get(self.experiment)
        if self.out is None:
            ext = ".json" if self.experiment in ("fixed-point", "complexity") else ".csv"
            self.out = self.experiment + ext


def parse_tilt(text: str | None, n: int) -> np.ndarray:
    """``None``/``zero``, ``a,b,...`` (n values) or ``uniform:<lo>:<hi>:<seed>``."""
    if text is None or text.strip().lower() in ("", "zero", "none"):
        return np.zeros(n)
    parts = text.strip().split(":")
    if parts[0].lower() == "uniform":
        if len(parts) != 4:
            raise ConfigurationError(f"tilt {text!r} should read uniform:<lo>:<hi>:<seed>")
        lo, hi, seed = float(parts[1]), float(parts[2]), int(parts[3])
        return np.random.default_rng(seed).uniform(lo, hi, n)
    try:
        b = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigurationError(f"cannot parse tilt {text!r}") from None
    if b.size != n:
        raise ConfigurationError(f"tilt has {b.size} entries, expected {n}")
    return b


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logitplay", description="Logit fictitious play experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file of option values; flags take precedence")
        p.add_argument("--payoff", help="CSV path or builtin: matching-pennies, zero:MxN, random:MxN:SEED")
        p.add_argument("--eta", type=float)
        p.add_argument("--eta-x", type=float)
        p.add_argument("--eta-y", type=float)
        p.add_argument("--tilt", help="zero, comma list, or uniform:LO:HI:SEED")
        p.add_argument("--schedule", help="constant, constant:C, harmonic, fw, rational:Q, nesterov-gfw")
        p.add_argument("--iters", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--burn-in", type=int)
        p.add_argument("--stride", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--out")
        p.add_argument("--allow-constant-step", action="store_true", default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigurationError("config file must hold a JSON object")
        values = {k.replace("-", "_"): v for k, v in values.items()}
        known = {f.name for f in fields(RunConfig)} - {"experiment"}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for f in fields(RunConfig):
        if f.name != "experiment" and getattr(args, f.name, None) is not None:
            values[f.name] = getattr(args, f.name)
    try:
        return RunConfig(experiment=args.experiment, **values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


# ---------------------------------------------------------------------------
# experiments; each returns (exit status, summary line)


def _game(cfg: RunConfig) -> RegularizedGame:
    return RegularizedGame(io.load_payoff(cfg.payoff), cfg.eta)


def _dlfp_summary(game, trace, schedule):
    return {
        "payoff": game.A.shape,
        "eta": game.eta,
        "kappa": kappa(game),
        "schedule": schedule.name,
        "iters": int(trace.iterations[-1]),
        "V0": trace.gaps[0],
        "final_gap": trace.gaps[-1],
        "final_bound": trace.bounds[-1],
    }


def _run_dlfp(cfg: RunConfig):
    game = _game(cfg)
    schedule = parse_schedule(cfg.schedule, kappa(game))
    trace = run_dlfp(game, uniform_state(game), schedule, cfg.iters, record_states=cfg.experiment == "verify")
    files = [(io.write_trace, trace, cfg.out)]
    summary = _dlfp_summary(game, trace, schedule)
    status = EXIT_OK
    if cfg.experiment == "verify":
        report = verify_recursions(game, trace, rtol=cfg.tol)
        summary["verification"] = report.summary()
        files.append((io.write_checks, report, io.sibling(cfg.out, "checks", ".csv")))
        files.append((io.write_json, summary, io.sibling(cfg.out, "report", ".json")))
        status = EXIT_OK if report.ok else EXIT_VERIFY
        line = f"verify: {report.n_checked} checks, {report.n_failed} failed"
    else:
        files.append((io.write_json, summary, io.sibling(cfg.out, "summary", ".json")))
        line = f"dlfp: final gap {float(trace.gaps[-1])!r} after {cfg.iters} steps"
    return status, line, files


def _run_lfp(cfg: RunConfig):
    game = _game(cfg)
    schedule = parse_schedule(cfg.schedule, kappa(game))
    trace = run_lfp(game, (0, 0), schedule, cfg.iters, cfg.seed, cfg.stride, cfg.allow_constant_step)
    summary = {
        "payoff": game.A.shape,
        "eta": game.eta,
        "schedule": schedule.name,
        "seed": cfg.seed,
        "iters": cfg.iters,
        "final_gap": trace.gaps[-1],
        "final_x": trace.xs[-1],
        "final_y": trace.ys[-1],
    }
    files = [(io.write_trace, trace, cfg.out), (io.write_json, summary, io.sibling(cfg.out, "summary", ".json"))]
    return EXIT_OK, f"lfp: final gap {float(trace.gaps[-1])!r}", files


def _run_lfp_mc(cfg: RunConfig):
    game = _game(cfg)
    schedule = parse_schedule(cfg.schedule, kappa(game))
    saddle = solve_fixed_point(game, tol=cfg.tol)
    loc = locality_constants(game, saddle)
    agg = monte_carlo(
        game,
        schedule,
        cfg.iters,
        cfg.replicas,
        cfg.seed,
        saddle,
        (loc.r_x, loc.r_y),
        cfg.burn_in,
        checkpoint_stride=cfg.stride,
        allow_constant=cfg.allow_constant_step,
    )
    summary = {
        "schedule": schedule.name,
        "seed": cfg.seed,
        "replicas": cfg.replicas,
        "iters": cfg.iters,
        "burn_in": agg.burn_in,
        "radii": [loc.r_x, loc.r_y],
        "C_bar": loc.C_bar,
        "event_fraction": agg.burn_in_event_fraction,
        "final_mean_gap": agg.mean_gap[-1],
        "final_conditional_mean_gap": agg.conditional_mean_gap[-1],
        "final_conditional_ci95": agg.conditional_ci95[-1],
    }
    files = [(io.write_aggregate, agg, cfg.out), (io.write_json, summary, io.sibling(cfg.out, "summary", ".json"))]
    line = f"lfp-mc: event fraction {float(agg.burn_in_event_fraction)!r}, conditional mean gap {float(agg.conditional_mean_gap[-1])!r}"
    return EXIT_OK, line, files


def _run_composite(cfg: RunConfig):
    A = io.load_payoff(cfg.payoff)
    problem = entropic_instance(A, cfg.eta_x, cfg.eta_y, parse_tilt(cfg.tilt, A.shape[1]))
    gfw, dl, f_ref = run_comparison(problem, cfg.iters)
    report = verify_composite(problem, dl, f_ref, rtol=cfg.tol)
    summary = {
        "kappa_bar": kappa_bar(problem),
        "alpha": dl.meta["alpha"],
        "iters": cfg.iters,
        "f_bracket": dl.meta["f_bracket"],
        "dlfp_final_gap": dl.gaps[-1],
        "gfw_final_certificate": gfw.gaps[-1],
        "verification": report.summary(),
    }
    files = [
        (io.write_trace, dl, cfg.out),
        (io.write_trace, gfw, io.sibling(cfg.out, "gfw")),
        (io.write_json, summary, io.sibling(cfg.out, "summary", ".json")),
    ]
    line = f"composite: dlfp gap {float(dl.gaps[-1])!r}, gfw certificate {float(gfw.gaps[-1])!r}"
    return (EXIT_OK if report.ok else EXIT_VERIFY), line, files


def _run_fixed_point(cfg: RunConfig):
    game = _game(cfg)
    sp = solve_fixed_point(game, tol=cfg.tol)
    V0 = duality_gap(game, uniform(game.n), uniform(game.m))
    target = fixed_point_gap_target(game, cfg.tol)
    doc = {
        "eta": game.eta,
        "tol": cfg.tol,
        "x_star": sp.x_star,
        "y_star": sp.y_star,
        "residual": sp.residual,
        "gap": sp.gap,
        "gap_target": target,
        "iterations": sp.iterations,
        "iteration_bound": fixed_point_iteration_bound(game, V0, target),
    }
    return EXIT_OK, f"fixed-point: residual {float(sp.residual)!r} in {sp.iterations} steps", [(io.write_json, doc, cfg.out)]


def _run_complexity(cfg: RunConfig):
    game = _game(cfg)
    sp = solve_fixed_point(game)
    loc = locality_constants(game, sp)
    est = global_complexity_estimate(game, loc, cfg.tol)
    doc = {
        "eta": game.eta,
        "epsilon": cfg.tol,
        "locality": asdict(loc),
        "v_bar": est.v_bar,
        "delta": est.delta,
        "tail_iterations": est.tail_iterations,
        "burn_in_iterations": None,
        "note": "the burn-in time T(delta) has no known bound and is not estimated",
    }
    line = f"complexity: tail {est.tail_iterations} iterations, delta {float(est.delta)!r}"
    return EXIT_OK, line, [(io.write_json, doc, cfg.out)]


_RUNNERS = {
    "dlfp": _run_dlfp,
    "verify": _run_dlfp,
    "lfp": _run_lfp,
    "lfp-mc": _run_lfp_mc,
    "composite": _run_composite,
    "fixed-point": _run_fixed_point,
    "complexity": _run_complexity,
}


def run(cfg: RunConfig) -> int:
    """Execute ``cfg`` and write its files; returns the exit status."""
    try:
        status, line, files = _RUNNERS[cfg.experiment](cfg)
    except (ConfigurationError, InvalidInputError, ParseError) as exc:
        print(f"error [{cfg.experiment}: configuration]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LogitPlayError, ArithmeticError) as exc:
        print(f"error [{cfg.experiment}: run]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        for write, obj, path in files:
            write(obj, path)
    except LogitPlayError as exc:
        print(f"error [{cfg.experiment}: output]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(line)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
    except (ConfigurationError, InvalidInputError) as exc:
        print(f"error [{args.experiment}: configuration]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
