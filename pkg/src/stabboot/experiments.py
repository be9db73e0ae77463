"""Monte Carlo trial runner behind the command line."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from . import bruteforce, dense
from .dense import DensityMatrix
from .highdim import HighDimConfig, agnostic_highdim
from .instances import Instance, InstanceSpec, generate_instance
from .oracle import DEFAULT_BUDGET_CAP, BudgetExceeded, CopyOracle
from .product import PackingSet, agnostic_product, agnostic_stab_product, stabilizer_packing
from .stab_learner import NoCandidate, agnostic_stabilizer, estimate_stabilizer_fidelity

ALGORITHMS = ("stab", "highdim", "product", "stabprod", "magic")
WORKERS_ENV = "STABBOOT_WORKERS"
PHASE_INSTANCE, PHASE_ALGORITHM = 0, 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    algorithm: str
    instance: dict | str
    master_seed: int
    tau: float = 1.0
    eps: float = 0.1
    delta: float = 0.1
    gamma: float = 1.0
    t: int = 0
    packing: dict | str | None = None
    trials: int = 1
    budget_cap: int = DEFAULT_BUDGET_CAP
    p_floor: float = 1e-6
    max_reps: int | None = None
    outer_reps: int | None = None
    step2_reps: int | None = None
    exp_reps: int | None = None
    estimator: str = "shadow"
    out: str = "results.jsonl"
    csv: str | None = None
    workers: int | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, obj: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if "master_seed" not in obj:
            raise ConfigError("master_seed: required")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        def bad(path, msg):
            raise ConfigError(f"{path}: {msg}")
        if self.algorithm not in ALGORITHMS:
            bad("algorithm", f"expected one of {ALGORITHMS}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            bad("master_seed", "must be a non-negative integer")
        if not 0 < self.tau <= 1:
            bad("tau", "must lie in (0, 1]")
        if not 0 < self.eps <= 1:
            bad("eps", "must lie in (0, 1]")
        if self.algorithm != "magic" and self.eps > self.tau:
            bad("eps", "must not exceed tau")
        if not 0 < self.delta < 1:
            bad("delta", "must lie in (0, 1)")
        if not 0.5 < self.gamma <= 1:
            bad("gamma", "must lie in (1/2, 1]")
        if self.t < 0:
            bad("t", "must be non-negative")
        if self.trials < 1:
            bad("trials", "must be positive")
        if self.budget_cap < 1:
            bad("budget_cap", "must be positive")
        if not 0 <= self.p_floor <= 1:
            bad("p_floor", "must lie in [0, 1]")
        if self.estimator not in ("shadow", "pvm"):
            bad("estimator", "expected 'shadow' or 'pvm'")
        if isinstance(self.instance, dict):
            try:
                if "kind" in self.instance:
                    InstanceSpec.from_json(self.instance)
            except (ValueError, KeyError) as exc:
                bad("instance", str(exc))


def _load_json(ref):
    if isinstance(ref, (dict, list)):
        return ref
    return json.loads(Path(ref).read_text())


def load_state(obj) -> tuple[DensityMatrix, dict | None, InstanceSpec | None]:
    """A density-matrix file, a saved instance, or a generator spec (returned unbuilt)."""
    obj = _load_json(obj)
    if "kind" in obj:
        return None, None, InstanceSpec.from_json(obj)
    if "rho" in obj:
        return DensityMatrix.from_json(obj["rho"]), obj, None
    return DensityMatrix.from_json(obj), None, None


def rng_stream(seed: int, trial: int, phase: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial, phase]))


def instance_to_json(inst: Instance) -> dict:
    return {"spec": inst.spec.to_json(), "rho": inst.rho.to_json(), "planted": inst.planted,
            "optimum": inst.optimum}


def _packing(cfg: ExperimentConfig) -> PackingSet:
    return stabilizer_packing() if cfg.packing is None else PackingSet.from_json(_load_json(cfg.packing))


def target_fidelity(cfg: ExperimentConfig, rho: DensityMatrix, optimum: float | None) -> float | None:
    """Best class fidelity by exhaustive search when feasible, else the planted optimum."""
    n = rho.n
    try:
        if cfg.algorithm in ("stab", "magic") and n <= bruteforce.ENUM_LIMIT:
            return bruteforce.best_stabilizer(rho)[0]
        if cfg.algorithm == "highdim" and n <= bruteforce.ENUM_LIMIT:
            return bruteforce.best_high_dimension(rho, cfg.t)[0]
        if cfg.algorithm == "stabprod":
            return bruteforce.best_product(rho)[0]
        if cfg.algorithm == "product":
            return bruteforce.best_product(rho, _packing(cfg).vectors)[0]
    except ValueError:
        pass
    return optimum


def run_algorithm(cfg: ExperimentConfig, o: CopyOracle) -> tuple[dict, float | None]:
    """Run the configured learner; returns (output record, exact fidelity or estimate)."""
    rho = o.base
    kw = {"p_floor": cfg.p_floor, "max_reps": cfg.max_reps}
    if cfg.algorithm == "stab":
        s = agnostic_stabilizer(o, cfg.tau, cfg.eps, cfg.delta, **kw)
        return s.to_json(), dense.exact_fidelity(rho, s.vector())
    if cfg.algorithm == "magic":
        est = estimate_stabilizer_fidelity(o, cfg.eps, cfg.delta, **kw)
        return {"estimate": est}, est
    if cfg.algorithm == "product":
        p = agnostic_product(o, _packing(cfg), cfg.tau, cfg.eps, cfg.delta, **kw)
        return p.to_json(), dense.exact_fidelity(rho, p.vector())
    if cfg.algorithm == "stabprod":
        p = agnostic_stab_product(o, cfg.tau, cfg.eps, cfg.delta, estimator=cfg.estimator, **kw)
        return p.to_json(), dense.exact_fidelity(rho, p.vector())
    if cfg.algorithm == "highdim":
        hcfg = HighDimConfig(cfg.t, cfg.tau, cfg.eps, cfg.delta, cfg.p_floor,
                             cfg.outer_reps, cfg.step2_reps, cfg.exp_reps)
        out = agnostic_highdim(o, hcfg)
        return out.to_json(), dense.exact_fidelity(rho, out.density())
    raise AssertionError(cfg.algorithm)


def run_trial(cfg: ExperimentConfig, trial: int) -> tuple[dict, float]:
    """One trial; returns the deterministic record and the wall time in ms."""
    start = time.perf_counter()
    rho, saved, spec = load_state(cfg.instance)
    optimum = saved.get("optimum") if saved else None
    if spec is not None:
        inst = generate_instance(spec, rng_stream(cfg.master_seed, trial, PHASE_INSTANCE))
        rho, optimum = inst.rho, inst.optimum
    o = CopyOracle(rho, rng_stream(cfg.master_seed, trial, PHASE_ALGORITHM), cfg.budget_cap)
    target = target_fidelity(cfg, rho, optimum)
    rec = {"trial_id": trial, "algorithm": cfg.algorithm, "success": False, "completed": True,
           "output": None, "exact_fidelity": None, "target_fidelity": target, "error": None}
    try:
        output, value = run_algorithm(cfg, o)
        rec["output"] = output
        if cfg.algorithm == "magic":
            rec["estimate"] = value
            rec["success"] = target is None or abs(value - target) <= cfg.eps
        else:
            rec["exact_fidelity"] = value
            rec["success"] = target is None or value >= target - cfg.eps - 1e-12
    except BudgetExceeded as exc:
        rec["error"] = f"budget: {exc}"
        rec["completed"] = False
    except NoCandidate as exc:
        rec["error"] = f"no candidate: {exc}"
    rec["ledger"] = o.ledger.snapshot()
    return rec, (time.perf_counter() - start) * 1000


def _trial_job(args):
    cfg_dict, trial = args
    return run_trial(ExperimentConfig(**cfg_dict), trial)


def worker_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return cfg.workers or 1


def aggregate(records: list[dict]) -> dict:
    n = len(records)
    k = sum(bool(r["success"]) for r in records)
    ci = binomtest(k, n).proportion_ci(0.95, method="wilson") if n else None
    return {"trials": n, "completed": sum(r["completed"] for r in records), "successes": k,
            "success_rate": k / n if n else 0.0,
            "ci_low": ci.low if ci else 0.0, "ci_high": ci.high if ci else 0.0,
            "mean_samples": float(np.mean([r["ledger"]["base_copies"] for r in records])) if n else 0.0}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run all trials, write JSONL (plus a timing sidecar) and the CSV aggregate."""
    cfg.validate()
    jobs = [(asdict(cfg), i) for i in range(cfg.trials)]
    workers = worker_count(cfg)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(j) for j in jobs]
    records = [r for r, _ in results]
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    with out.with_suffix(out.suffix + ".timing").open("w") as fh:
        for r, ms in zip(records, (ms for _, ms in results)):
            fh.write(json.dumps({"trial_id": r["trial_id"], "wall_ms": round(ms, 3)}) + "\n")
    summary = aggregate(records)
    csv_path = Path(cfg.csv) if cfg.csv else out.with_suffix(".csv")
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary))
        w.writeheader()
        w.writerow(summary)
    return summary
