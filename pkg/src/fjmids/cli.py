"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 model not convergent where a limit
is required, 4 solver did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import NotConvergent, limit_opinion, simulate
from .fixtures import write_all
from .gossip import (
    PRNG_NAME,
    GossipConfigError,
    NonStochasticC,
    ObliviousAgentsPresent,
    default_config,
    run,
)
from .graph import classify_agents
from .identify import IdentificationError, IdentificationProblem, solve
from .model import ModelError, load_model, normalize_model
from .spectra import analyze_spectrum

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGENT, EXIT_SOLVER = 0, 2, 3, 4

DEFAULTS = {
    "simulate": {"max_steps": 100_000, "conv_tol": 1e-10},
    "limit": {},
    "analyze": {},
    "gossip": {"seed": 0, "steps": 1_000_000, "replications": 1, "grid": None,
               "tail_window": 10_000, "workers": 1},
    "identify": {"mode": None, "constraint": None, "objective": None, "max_iter": 200_000,
                 "tol": 1e-9},
    "fixtures": {},
}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(cmd: str, cfg: dict, path) -> dict:
    man = {"subcommand": cmd, "config": cfg, "tool_version": __version__}
    if path is not None:
        man["input_sha256"] = _digest(path)
    if cmd == "gossip":
        man["prng"] = PRNG_NAME
        man["seed"] = cfg["seed"]
    return man


def _resolve(cmd: str, args: argparse.Namespace) -> dict:
    """CLI flag > config file > built-in default."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_INVALID, "ConfigError", str(exc)) from None
        file_cfg = doc.get(cmd, doc)
    out = {}
    for key, default in DEFAULTS[cmd].items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else file_cfg.get(key, default)
    return out


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_json(doc: dict, out) -> None:
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _coord_names(n: int, m: int) -> list[str]:
    return [f"x{i + 1}_{p + 1}" for i in range(n) for p in range(m)]


def _load(path):
    try:
        return load_model(path)
    except ModelError as exc:
        raise CliError(EXIT_INVALID, exc.kind, str(exc)) from None
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_INVALID, "ReadError", str(exc)) from None


def cmd_analyze(args) -> int:
    cfg = _resolve("analyze", args)
    model = normalize_model(_load(args.model))
    cls = classify_agents(model)
    rep = analyze_spectrum(model, cls)
    doc = {
        "manifest": _manifest("analyze", cfg, args.model),
        "n": model.n,
        "m": model.m,
        "classification": cls.to_dict(),
        "spectrum": rep.to_dict(),
        "verdict": rep.verdict,
        "clause": rep.clause,
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _resolve("simulate", args)
    model = _load(args.model)
    traj = simulate(model, max_steps=int(cfg["max_steps"]), conv_tol=float(cfg["conv_tol"]))
    man = _manifest("simulate", cfg, args.model)
    man["termination"] = traj.reason
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, sort_keys=True) + "\n")
    buf.write(",".join(["k"] + _coord_names(model.n, model.m)) + "\n")
    for s in traj.states:
        buf.write(",".join([str(s.k)] + [_fmt(v) for v in s.x]) + "\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_limit(args) -> int:
    cfg = _resolve("limit", args)
    model = _load(args.model)
    cls = classify_agents(model)
    rep = analyze_spectrum(model, cls)
    try:
        x = limit_opinion(model, cls, rep)
    except NotConvergent as exc:
        raise CliError(EXIT_NOT_CONVERGENT, "NotConvergent", str(exc)) from None
    doc = {
        "manifest": _manifest("limit", cfg, args.model),
        "verdict": rep.verdict,
        "clause": rep.clause,
        "limit": x.tolist(),
        "limit_by_agent": x.reshape(model.n, model.m).tolist(),
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _parse_grid(raw):
    if raw is None or isinstance(raw, (list, tuple)):
        return raw
    return [int(float(t)) for t in str(raw).split(",") if t.strip()]


def cmd_gossip(args) -> int:
    cfg = _resolve("gossip", args)
    cfg["steps"] = int(float(cfg["steps"]))
    cfg["seed"] = int(cfg["seed"])
    cfg["grid"] = _parse_grid(cfg["grid"])
    model = _load(args.model)
    try:
        config = default_config(model, seed=cfg["seed"], steps=cfg["steps"],
                                replications=int(cfg["replications"]), grid=cfg["grid"])
        stats = run(model, config, tail_window=int(cfg["tail_window"]), workers=int(cfg["workers"]))
    except ObliviousAgentsPresent as exc:
        raise CliError(EXIT_NOT_CONVERGENT, exc.kind, str(exc)) from None
    except (NonStochasticC, GossipConfigError) as exc:
        raise CliError(EXIT_INVALID, exc.kind, str(exc)) from None
    cfg["grid"] = stats.grid.tolist()
    man = _manifest("gossip", cfg, args.model)
    man["replication_seeds"] = stats.seeds

    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, sort_keys=True) + "\n")
    buf.write(",".join(["rep", "k"] + _coord_names(model.n, model.m) + ["dist2", "distinf"]) + "\n")
    ces, d2, dinf = stats.cesaro_grid, stats.dist2, stats.distinf
    for r in range(ces.shape[0]):
        for g, k in enumerate(stats.grid):
            row = [str(r), str(int(k))] + [_fmt(v) for v in ces[r, g]] + [_fmt(d2[r, g]), _fmt(dinf[r, g])]
            buf.write(",".join(row) + "\n")
    _emit(buf.getvalue(), args.out)

    if args.summary:
        summary = {
            "manifest": man,
            "x_limit": stats.x_ref.tolist(),
            "grid": stats.grid.tolist(),
            "median_dist2": np.median(d2, axis=0).tolist(),
            "median_distinf": np.median(dinf, axis=0).tolist(),
            "final_cesaro_mean": stats.cesaro.mean(axis=0).tolist(),
            "tail_window": stats.tail_window,
            "tail_max_deviation": stats.tail_max_dev.tolist(),
            "num_arcs": stats.meta["num_arcs"],
        }
        _emit_json(summary, args.summary)
    return EXIT_OK


def cmd_identify(args) -> int:
    cfg = _resolve("identify", args)
    try:
        doc = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_INVALID, "ReadError", str(exc)) from None
    for key, fallback in (("mode", "infinite"), ("constraint", "stochastic"), ("objective", "squares")):
        if cfg[key] is None:
            cfg[key] = doc.get(key, fallback)
    try:
        problem = IdentificationProblem(
            W=doc["W"], lam=doc["Lambda"], u=np.asarray(doc["u"], dtype=float).ravel(),
            m=int(doc.get("m", np.asarray(doc["u"]).shape[-1])),
            observations=doc["observations"], mode=cfg["mode"],
            constraint=cfg["constraint"], objective=cfg["objective"],
        )
    except KeyError as exc:
        raise CliError(EXIT_INVALID, "DimensionMismatch", f"missing field {exc.args[0]!r}") from None
    except ModelError as exc:
        raise CliError(EXIT_INVALID, exc.kind, str(exc)) from None
    except IdentificationError as exc:
        code = EXIT_NOT_CONVERGENT if "rho" in str(exc) else EXIT_INVALID
        raise CliError(code, "IdentificationError", str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_INVALID, "InvalidOption", str(exc)) from None
    res = solve(problem, max_iter=int(cfg["max_iter"]), tol=float(cfg["tol"]))
    out = {"manifest": _manifest("identify", cfg, args.input), **res.to_dict()}
    _emit_json(out, args.out)
    if not res.converged and not res.approximate:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_fixtures(args) -> int:
    paths = write_all(args.directory)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fjmids", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_model=True):
        if needs_model:
            p.add_argument("model", help="model JSON file")
        p.add_argument("--out", "-o", default=None, help="output file (default: stdout)")
        p.add_argument("--config", default=None, help="JSON file with option defaults")

    p = sub.add_parser("analyze", help="classify agents and report stability/convergence")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="synchronous trajectory as CSV")
    common(p)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--conv-tol", dest="conv_tol", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limit", help="closed-form limit opinion as JSON")
    common(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("gossip", help="randomized gossip runs with Cesaro averages")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=lambda s: int(float(s)), help="activations per run, e.g. 1e6")
    p.add_argument("--replications", type=int)
    p.add_argument("--grid", help="comma-separated checkpoint steps (default: 1-2-5 log grid)")
    p.add_argument("--tail-window", dest="tail_window", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--summary", default=None, help="write a JSON summary here")
    p.set_defaults(func=cmd_gossip)

    p = sub.add_parser("identify", help="estimate the MiDS matrix from data")
    p.add_argument("input", help="identification JSON (W, Lambda, u, observations)")
    p.add_argument("--out", "-o", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--mode", choices=["finite", "infinite"])
    p.add_argument("--constraint", choices=["none", "stochastic", "infnorm"])
    p.add_argument("--objective", choices=["squares", "abs", "max"])
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("fixtures", help="write the bundled example files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(json.dumps({"error": exc.kind, "message": str(exc), "exit_code": exc.code}) + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
