"""Command-line entry point.

Exit codes: 0 ok, 2 usage/config/input error, 3 infeasibility above threshold.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, replace
from pathlib import Path

from . import io as jio
from .config import (
    ConfigError,
    build_run_config,
    ga_from_values,
    read_config_file,
    resolve,
)
from .evaluator import evaluate
from .experiments import run_sweep, summarize
from .model import StructuralError
from .solvers import BudgetExceeded, solve_exhaustive, solve_fcfs, solve_ga, solve_stf
from .taskgen import GenRanges, generate_instance

log = logging.getLogger("jamsched")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3
SOLVE_STRATEGIES = ("ga", "ga-ntd", "fcfs", "stf", "exhaustive")

# command-line flag -> config key
SWEEP_FLAGS = {
    "scenario": "scenario", "rb": "rb", "sjnr_db": "sjnr_db", "sjnr_points": "sjnr_points",
    "rb_points": "rb_points", "runs": "runs", "seed": "seed", "lam": "lambda",
    "strategies": "strategies", "ga_pop": "ga_pop", "ga_gens": "ga_gens",
    "full_budget": "full_budget", "out": "out", "workers": "workers", "ber_model": "ber_model",
    "max_infeasible": "max_infeasible",
}


class UsageError(Exception):
    pass


def _flag_name(dest: str) -> str:
    return "--" + {"lam": "lambda"}.get(dest, dest).replace("_", "-")


def _gather(args, flags: dict[str, str]) -> tuple[dict, dict]:
    raw = read_config_file(args.config) if getattr(args, "config", None) else {}
    for dest, key in flags.items():
        v = getattr(args, dest, None)
        if v is None or v is False:
            continue
        raw[key] = ("true" if v is True else str(v), _flag_name(dest))
    values = resolve(raw)
    provenance = {k: where for k, (_, where) in raw.items()}
    return values, provenance


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _load_json(path: str, what: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: cannot read {what} ({exc.strerror})") from exc
    if not text.strip():
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed {what} JSON: {exc}") from exc


def _load_instance(path: str):
    d = _load_json(path, "instance")
    if d is None:
        raise UsageError(f"{path}: instance file is empty")
    return jio.instance_from_dict(d)


def cmd_sweep(args) -> int:
    values, provenance = _gather(args, SWEEP_FLAGS)
    cfg = build_run_config(values, provenance)
    if not cfg.out:
        raise ConfigError("--out: an output CSV path is required")
    out = Path(cfg.out)
    if not out.parent.is_dir():
        raise ConfigError(f"{provenance.get('out', '--out')}: output directory {str(out.parent)!r} does not exist")

    resolved = cfg.to_dict()
    digest = jio.config_hash(resolved)
    log.info("sweep %s over %d points x %d replicates (config %s)",
             cfg.spec.scenario.value, len(cfg.spec.points), cfg.spec.replicates, digest[:12])
    result = run_sweep(cfg.spec, workers=cfg.workers)
    csv_text = result.to_csv()
    excluded = {f"{r.sweep_value}/{r.strategy.value}": r.excluded for r in result.rows if r.excluded}
    sidecar = {
        "config": resolved,
        "config_sha256": digest,
        "provenance": provenance,
        "csv": out.name,
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "infeasible_ratio": result.infeasible_ratio,
        "excluded": excluded,
        "silent_violations": sum(r.silent_violation() for r in result.records),
    }
    if len(cfg.spec.strategies) >= 2:
        sidecar["ranking"] = summarize(result).to_text().splitlines()
    _atomic_write(out, csv_text)
    _atomic_write(out.with_suffix(".json"), jio.dumps(sidecar) + "\n")
    if result.infeasible_ratio > cfg.max_infeasible:
        print(f"error: infeasible ratio {result.infeasible_ratio:.3f} exceeds {cfg.max_infeasible}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _load_instance(args.instance)
    sol = jio.solution_from_dict(_load_json(args.solution, "solution"), inst)
    ev = evaluate(inst, sol)
    payload = {
        "input_sha256": jio.config_hash({"instance": jio.instance_to_dict(inst), "solution": sol.to_dict()}),
        "evaluation": ev.to_dict(),
    }
    print(jio.dumps(payload))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    values, _ = _gather(args, {"ga_pop": "ga_pop", "ga_gens": "ga_gens", "full_budget": "full_budget", "seed": "seed"})
    name = args.strategy
    if name not in SOLVE_STRATEGIES:
        raise UsageError(f"unknown strategy {name!r}; valid: {', '.join(SOLVE_STRATEGIES)}")
    resolved = {"strategy": name, "instance": jio.instance_to_dict(inst)}
    if name in ("ga", "ga-ntd"):
        if "seed" not in values:
            raise ConfigError("--seed: required for GA strategies")
        cfg = replace(ga_from_values(values, seed=values["seed"]), allow_diversity=name == "ga")
        resolved["ga"] = asdict(cfg)
        res = solve_ga(inst, cfg)
    elif name == "fcfs":
        res = solve_fcfs(inst)
    elif name == "stf":
        res = solve_stf(inst)
    else:
        try:
            res = solve_exhaustive(inst, budget=args.budget)
        except BudgetExceeded as exc:
            raise UsageError(str(exc)) from exc
    digest = jio.config_hash(resolved)
    payload = {"config_sha256": digest, **res.to_dict()}
    print(jio.dumps(payload))
    if args.trace_out and res.trace:
        trace = "generation,best_fitness,mean_fitness\n" + "".join(
            f"{t.generation},{t.best_fitness!r},{t.mean_fitness!r}\n" for t in res.trace)
        path = Path(args.trace_out)
        if not path.parent.is_dir():
            raise UsageError(f"--trace-out: directory {str(path.parent)!r} does not exist")
        _atomic_write(path, trace)
    return EXIT_OK


def cmd_generate(args) -> int:
    ranges = GenRanges(m=args.m, m_queued=args.m_queued)
    inst = generate_instance(ranges, args.sjnr_db, args.rb, args.seed, lam=args.lam, ber_model=args.ber_model)
    text = jio.dumps(jio.instance_to_dict(inst)) + "\n"
    if args.out:
        path = Path(args.out)
        if not path.parent.is_dir():
            raise UsageError(f"--out: directory {str(path.parent)!r} does not exist")
        _atomic_write(path, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jamsched", description="Jamming-aware task offloading simulator.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run an SJNR or RB-count sweep and write CSV + JSON sidecar")
    s.add_argument("--config", help="key = value config file; flags override it")
    s.add_argument("--scenario", choices=["sjnr", "rb"])
    s.add_argument("--rb", type=str, help="RB count held fixed in the SJNR sweep")
    s.add_argument("--sjnr-db", type=str, help="SJNR (dB) held fixed in the RB sweep")
    s.add_argument("--sjnr-points", help="e.g. '0:30:2' or '0,4,8'")
    s.add_argument("--rb-points", help="e.g. '1:15:1'")
    s.add_argument("--runs", type=str, help="replicates per point")
    s.add_argument("--seed", type=str)
    s.add_argument("--lambda", dest="lam", type=str, help="objective weight on the drop ratio")
    s.add_argument("--strategies", help="comma list of proposed, proposed-ntd, fcfs, stf")
    s.add_argument("--ga-pop", type=str)
    s.add_argument("--ga-gens", type=str)
    s.add_argument("--full-budget", action="store_true", help="GA population 2000, 500 generations")
    s.add_argument("--ber-model", help="bit-error curve: awgn (default) or rayleigh")
    s.add_argument("--workers", type=str, help="parallel worker processes")
    s.add_argument("--max-infeasible", type=str, help="exit 3 above this infeasible-run ratio (default 0.25)")
    s.add_argument("--out", help="output CSV path; the sidecar goes next to it with a .json suffix")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="evaluate a solution on an instance")
    e.add_argument("instance")
    e.add_argument("solution")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("solve", help="run one solver on an instance")
    v.add_argument("instance")
    v.add_argument("--strategy", required=True, help=f"one of {', '.join(SOLVE_STRATEGIES)}")
    v.add_argument("--seed", type=str)
    v.add_argument("--ga-pop", type=str)
    v.add_argument("--ga-gens", type=str)
    v.add_argument("--full-budget", action="store_true")
    v.add_argument("--budget", type=int, default=10_000_000, help="exhaustive evaluation budget")
    v.add_argument("--trace-out", help="write the GA convergence trace CSV here")
    v.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="draw a random instance as JSON")
    g.add_argument("--sjnr-db", type=float, default=5.0)
    g.add_argument("--rb", type=int, default=10)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--m-queued", type=int, default=3)
    g.add_argument("--lambda", dest="lam", type=float, default=0.5)
    g.add_argument("--ber-model", default="awgn")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError, jio.InputError, StructuralError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
