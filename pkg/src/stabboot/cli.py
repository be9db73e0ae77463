"""Command line: stabboot gen | stab run | highdim run | product run | stabprod run | magic | verify."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig, instance_to_json, run_experiment
from .instances import KINDS, InstanceSpec, generate_instance
from .verify import run_checks

_FLAG_FIELDS = ("tau", "eps", "delta", "gamma", "t", "trials", "master_seed", "budget_cap",
                "p_floor", "max_reps", "outer_reps", "step2_reps", "exp_reps", "out", "csv",
                "workers", "instance", "packing", "estimator")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _count(text: str) -> int:
    # accepts 1e12 as well as 1000000000000
    value = float(text)
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not a whole number: {text}")
    return int(value)


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--instance", help="instance, density-matrix or generator-spec JSON file")
    p.add_argument("--tau", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--budget-cap", dest="budget_cap", type=_count)
    p.add_argument("--p-floor", dest="p_floor", type=float)
    p.add_argument("--max-reps", dest="max_reps", type=int)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabboot", description="Agnostic tomography experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a planted instance")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    g.add_argument("--out", help="output file (stdout if omitted)")

    for name, extra in (("stab", None), ("highdim", "t"), ("product", "packing"), ("stabprod", "estimator")):
        grp = sub.add_parser(name, help=f"{name} learner")
        s = grp.add_subparsers(dest="action", required=True)
        r = s.add_parser("run")
        _run_args(r)
        if extra == "t":
            r.add_argument("--t", type=int)
            r.add_argument("--outer-reps", dest="outer_reps", type=int)
            r.add_argument("--step2-reps", dest="step2_reps", type=int)
            r.add_argument("--exp-reps", dest="exp_reps", type=int)
        elif extra == "packing":
            r.add_argument("--packing", help="JSON file {mu, states: [[x,y,z], ...]}")
        elif extra == "estimator":
            r.add_argument("--estimator", choices=("shadow", "pvm"))

    m = sub.add_parser("magic", help="estimate stabilizer fidelity")
    _run_args(m)

    v = sub.add_parser("verify", help="run the invariant battery")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    return ap


def config_from_args(args: argparse.Namespace, algorithm: str) -> ExperimentConfig:
    obj = json.loads(Path(args.config).read_text()) if args.config else {}
    obj["algorithm"] = algorithm
    for f in _FLAG_FIELDS:
        val = getattr(args, f, None)
        if val is not None:
            obj[f] = val
    if "instance" not in obj:
        raise ConfigError("instance: required (config field or --instance)")
    return ExperimentConfig.from_dict(obj)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            params = {}
            for item in args.param:
                key, _, val = item.partition("=")
                params[key] = _parse_value(val)
            inst = generate_instance(InstanceSpec(args.kind, args.n, params, args.seed))
            text = json.dumps(instance_to_json(inst))
            if args.out:
                Path(args.out).write_text(text + "\n")
            else:
                print(text)
            return 0
        if args.command == "verify":
            report = run_checks(args.seed)
            text = json.dumps(report, indent=2)
            if args.out:
                Path(args.out).write_text(text + "\n")
            print(text)
            return 0 if report["passed"] else 1
        summary = run_experiment(config_from_args(args, args.command))
        print(json.dumps(summary))
        return 0 if summary["completed"] == summary["trials"] else 1
    except (ConfigError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
