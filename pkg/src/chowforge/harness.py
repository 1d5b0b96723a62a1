"""Experiment orchestration: the generate -> corrupt -> estimate ->
reconstruct -> evaluate pipeline, axis sweeps, and ground-truth Delta
diagnostics.

Every stage draws from its own derived seed stream, so changing one stage's
budget never perturbs another stage's randomness. All artifacts are written
to the run directory and are re-readable; result.json carries no timing, so
identical specs produce byte-identical files (wall-clock lives only in the
results CSV row).
"""

import csv
import json
import os
import time
from dataclasses import dataclass, field, replace
from math import ceil, isfinite, log

import numpy as np

from . import rng as rngmod
from .adversary import KINDS, CorruptionStrategy, corrupt
from .concepts import (
    SparsePTF,
    chow_oracle,
    misclassification_rate,
    random_concept,
    sample_clean,
)
from .errors import ConfigError
from .estimator import EstimatorConfig, calibrate, estimate_chow, gamma_radius
from .reconstruct import reconstruct_ptf
from .samples import save_meta

RESULTS_COLUMNS = (
    "seed", "n", "d", "K", "eta", "strategy", "N", "phases", "certified",
    "removed_clean", "removed_corrupt", "chow_l2_err", "miscls",
    "miscls_stderr", "wall_ms",
)

SWEEP_AXES = ("eta", "N", "strategy")


class StageFailure(RuntimeError):
    """A pipeline stage failed; .stage names it, __cause__ holds the original."""

    def __init__(self, stage, exc):
        super().__init__(f"stage {stage!r} failed: {exc}")
        self.stage = stage


def theory_n(config, C=1.0):
    """Sample count prescribed by the analysis, with configurable constant.

    Explodes at desk scale (hence explicit N everywhere by default); exposed
    so runs can opt in via --theory-n.
    """
    d, K = config.d, config.K
    val = (C * d ** (5 * d) * K ** (4 * d) / config.eps ** 2
           * log(config.n * d / (config.eps * config.delta)) ** (5 * d))
    return int(ceil(val))


@dataclass
class ExperimentSpec:
    config: EstimatorConfig
    N: int
    eta: float = 0.0
    strategy: str = "none"
    seed: int = 0
    concept_file: str = None  # JSON concept; None draws one from the seed
    outdir: str = None
    oracle_budget: int = 10 ** 6
    recon_budget: int = 200_000
    eval_budget: int = 100_000
    calib_rounds: int = 20
    strategy_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if not (0 <= self.eta < 0.5):
            raise ConfigError("eta must lie in [0, 1/2)")
        if self.strategy not in KINDS:
            raise ConfigError(f"strategy must be one of {KINDS}")
        if min(self.oracle_budget, self.recon_budget, self.eval_budget) < 1000:
            raise ConfigError("budgets must be >= 1000")
        if self.config.eta != self.eta:
            # the estimator's assumed corruption rate follows the experiment
            self.config = replace(self.config, eta=self.eta)


@dataclass
class RunResult:
    seed: int
    n: int
    d: int
    K: int
    eta: float
    strategy: str
    N: int
    n_corrupted: int
    phases: int
    certified: bool
    removed_clean: int
    removed_corrupt: int
    chow_l2_err: float
    miscls: float
    miscls_stderr: float
    wall_ms: float
    phase_log: list
    delta_trajectory: list
    stage_seeds: dict
    estimate_summary: dict
    reconstruct_summary: dict

    def __post_init__(self):
        for name in ("eta", "chow_l2_err", "miscls", "miscls_stderr", "wall_ms"):
            if not isfinite(getattr(self, name)):
                raise ConfigError(f"non-finite metric {name}")
        if not all(isfinite(v) for v in self.delta_trajectory):
            raise ConfigError("non-finite delta trajectory")

    def to_json_dict(self):
        # no wall clock here: identical specs must produce identical bytes
        return {
            "seed": self.seed, "n": self.n, "d": self.d, "K": self.K,
            "eta": self.eta, "strategy": self.strategy, "N": self.N,
            "n_corrupted": self.n_corrupted,
            "phases": self.phases,
            "certified": self.certified,
            "removed_clean": self.removed_clean,
            "removed_corrupt": self.removed_corrupt,
            "chow_l2_err": self.chow_l2_err,
            "miscls": self.miscls,
            "miscls_stderr": self.miscls_stderr,
            "phase_log": self.phase_log,
            "delta_trajectory": self.delta_trajectory,
            "stage_seeds": self.stage_seeds,
            "estimate": self.estimate_summary,
            "reconstruct": self.reconstruct_summary,
        }

    def csv_row(self):
        vals = {
            "seed": self.seed, "n": self.n, "d": self.d, "K": self.K,
            "eta": repr(float(self.eta)), "strategy": self.strategy,
            "N": self.N, "phases": self.phases,
            "certified": int(self.certified),
            "removed_clean": self.removed_clean,
            "removed_corrupt": self.removed_corrupt,
            "chow_l2_err": repr(float(self.chow_l2_err)),
            "miscls": repr(float(self.miscls)),
            "miscls_stderr": repr(float(self.miscls_stderr)),
            "wall_ms": repr(round(float(self.wall_ms), 3)),
        }
        return [vals[c] for c in RESULTS_COLUMNS]


def delta_trajectory(estimate, corrupted_mask):
    """Delta(S, S') against the original clean set S, |S| = N.

    Entry 0 is the as-corrupted input (<= 2 eta), entry 1 is after sup-norm
    pruning, then one entry per phase. Refuses without a mask: real data has
    no ground truth to diff against.
    """
    if corrupted_mask is None:
        raise ConfigError("delta trajectory needs the corruption mask")
    mask = np.asarray(corrupted_mask, dtype=bool)
    if mask.shape != (estimate.n_input,):
        raise ConfigError("mask length does not match the estimation input")
    N = estimate.n_input
    n_bad = int(mask.sum())
    clean_gone = estimate.pruned_clean  # on top of the n_bad replaced rows
    bad_left = n_bad - estimate.pruned_corrupted
    out = [2.0 * n_bad / N, (n_bad + clean_gone + bad_left) / N]
    for p in estimate.phases:
        clean_gone += p.removed_clean
        bad_left -= p.removed_corrupted
        out.append((n_bad + clean_gone + bad_left) / N)
    return out


def build_strategy(kind, f_star, gamma_val, d, options=None):
    """CorruptionStrategy aimed at the prune radius the estimator will use."""
    opts = dict(options or {})
    if kind == "none":
        return CorruptionStrategy(kind="none")
    if kind == "label_flip_margin":
        return CorruptionStrategy(kind=kind, f_star=f_star, **opts)
    if kind == "chow_shift":
        if opts.get("target_index") is not None:
            opts["target_index"] = tuple(opts["target_index"])
        return CorruptionStrategy(kind=kind, f_star=f_star, gamma=gamma_val, **opts)
    if kind == "variance_spike":
        return CorruptionStrategy(kind=kind, gamma=gamma_val, d=d, **opts)
    raise ConfigError(f"unknown strategy {kind!r}")


def _run_stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(name, exc) from exc


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_chow_json(path):
    """Chow vector from an estimate.json or oracle_chow.json artifact."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    m = obj.get("m_dim", obj.get("m"))
    if m is None:
        raise ConfigError(f"{path} does not look like a Chow artifact")
    v = np.zeros(int(m))
    for e in obj["u"] if "u" in obj else obj["entries"]:
        v[int(e["index"])] = float(e["value"])
    return v


def write_results_csv(path, results):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_COLUMNS)
        for r in results:
            w.writerow(r.csv_row())


def run_pipeline(spec):
    """Full pipeline run; returns the RunResult and writes all artifacts.

    Stage failures propagate as StageFailure with the stage name attached.
    removed_clean / removed_corrupt count filter-phase removals; pruning
    counts are reported separately under the estimate summary.
    """
    if spec.outdir is None:
        raise ConfigError("run_pipeline needs an output directory")
    os.makedirs(spec.outdir, exist_ok=True)
    t0 = time.perf_counter()
    seeds = {s: rngmod.derive_seed(spec.seed, s)
             for s in ("concept", "oracle", "sample", "corrupt", "calibrate",
                       "reconstruct", "evaluate")}
    cfg = spec.config

    def load_or_draw():
        if spec.concept_file is not None:
            f = SparsePTF.load(spec.concept_file)
            if (f.n, f.d) != (cfg.n, cfg.d):
                raise ConfigError("concept shape disagrees with the config")
            return f
        return random_concept(cfg.n, cfg.d, cfg.K, seeds["concept"])

    f_star = _run_stage("concept", load_or_draw)
    oracle = _run_stage("oracle", chow_oracle, f_star, budget=spec.oracle_budget,
                        seed=seeds["oracle"], order=cfg.quad_order)
    clean = _run_stage("sample", sample_clean, f_star, spec.N, seeds["sample"])

    def calibrated_config():
        if cfg.mode != "calibrated" or (cfg.kappa_override is not None
                                        and cfg.gamma_override is not None):
            return cfg
        kap, gam = calibrate(cfg, spec.N, seeds["calibrate"],
                             rounds=spec.calib_rounds)
        return replace(
            cfg,
            kappa_override=kap if cfg.kappa_override is None else cfg.kappa_override,
            gamma_override=gam if cfg.gamma_override is None else cfg.gamma_override,
        )

    run_cfg = _run_stage("calibrate", calibrated_config)
    gamma_val = (run_cfg.gamma_override if run_cfg.gamma_override is not None
                 else gamma_radius(run_cfg, spec.N))

    def corrupted_set():
        strat = build_strategy(spec.strategy, f_star, gamma_val, cfg.d,
                               spec.strategy_options)
        return corrupt(clean, spec.eta, strat, seeds["corrupt"])

    corrupted = _run_stage("corrupt", corrupted_set)
    estimate = _run_stage("estimate", estimate_chow, corrupted, run_cfg)
    clf, trace = _run_stage("reconstruct", reconstruct_ptf, estimate.u,
                            run_cfg.eps, cfg.n, cfg.d,
                            budget=spec.recon_budget, seed=seeds["reconstruct"])
    miscls, miscls_se = _run_stage("evaluate", misclassification_rate, clf,
                                   f_star, spec.eval_budget, seeds["evaluate"])

    deltas = delta_trajectory(estimate, corrupted.corrupted)
    chow_err = float(np.linalg.norm(estimate.u - oracle.values))
    result = RunResult(
        seed=spec.seed, n=cfg.n, d=cfg.d, K=cfg.K, eta=spec.eta,
        strategy=spec.strategy, N=spec.N,
        n_corrupted=int(corrupted.corrupted.sum()),
        phases=len(estimate.phases),
        certified=estimate.terminated_by == "certified",
        removed_clean=int(sum(p.removed_clean for p in estimate.phases)),
        removed_corrupt=int(sum(p.removed_corrupted for p in estimate.phases)),
        chow_l2_err=chow_err,
        miscls=float(miscls),
        miscls_stderr=float(miscls_se),
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        phase_log=[p.to_json_dict() for p in estimate.phases],
        delta_trajectory=deltas,
        stage_seeds={s: int(v) for s, v in seeds.items()},
        estimate_summary={
            "gamma": estimate.gamma,
            "kappa": estimate.kappa,
            "l_max": estimate.l_max,
            "terminated_by": estimate.terminated_by,
            "n_pruned": estimate.n_pruned,
            "pruned_clean": estimate.pruned_clean,
            "pruned_corrupted": estimate.pruned_corrupted,
            "mode": run_cfg.mode,
        },
        reconstruct_summary={
            "iterations": trace.iterations,
            "case1": trace.case1,
            "final_rho": trace.rhos[-1],
            "final_rho_stderr": trace.rho_stderrs[-1],
        },
    )
    _run_stage("persist", _write_artifacts, spec, f_star, oracle, clean,
               corrupted, estimate, clf, trace, result)
    return result


def _write_artifacts(spec, f_star, oracle, clean, corrupted, estimate, clf,
                     trace, result):
    out = spec.outdir
    f_star.save(os.path.join(out, "concept.json"))
    oracle.save(os.path.join(out, "oracle_chow.json"), n=f_star.n, d=f_star.d)
    clean.save_csv(os.path.join(out, "clean.csv"))
    save_meta(os.path.join(out, "clean_meta.json"), f_star.n, f_star.d,
              f_star.K, 0.0, "none", result.stage_seeds["sample"], len(clean))
    corrupted.save_csv(os.path.join(out, "corrupted.csv"))
    save_meta(os.path.join(out, "corrupted_meta.json"), f_star.n, f_star.d,
              f_star.K, spec.eta, spec.strategy, result.stage_seeds["corrupt"],
              len(corrupted))
    _dump_json(os.path.join(out, "estimate.json"), estimate.to_json_dict())
    clf.save(os.path.join(out, "classifier.json"))
    with open(os.path.join(out, "trace.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "rho", "rho_stderr"])
        for t, (r, s) in enumerate(zip(trace.rhos, trace.rho_stderrs)):
            w.writerow([t, repr(float(r)), repr(float(s))])
    _dump_json(os.path.join(out, "result.json"), result.to_json_dict())
    write_results_csv(os.path.join(out, "results.csv"), [result])


def sweep(spec, axis, values):
    """One pipeline run per value along axis; result rows in input order.

    Cell i runs under a seed derived from (spec.seed, "cell", i) in its own
    subdirectory. Per-cell failures land in sweep_errors.json and the sweep
    continues.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise ConfigError("need at least one sweep value")
    if spec.outdir is None:
        raise ConfigError("sweep needs an output directory")
    os.makedirs(spec.outdir, exist_ok=True)
    results, errors = [], []
    for i, v in enumerate(values):
        kw = {
            "seed": rngmod.derive_seed(spec.seed, "cell", i),
            "outdir": os.path.join(spec.outdir, f"cell_{i:03d}_{axis}_{v}"),
        }
        if axis == "eta":
            kw["eta"] = float(v)
        elif axis == "N":
            kw["N"] = int(v)
        else:
            kw["strategy"] = str(v)
        try:
            results.append(run_pipeline(replace(spec, **kw)))
        except Exception as exc:
            errors.append({"index": i, "axis": axis, "value": v,
                           "stage": getattr(exc, "stage", None),
                           "error": str(exc)})
    write_results_csv(os.path.join(spec.outdir, "sweep_results.csv"), results)
    if errors:
        _dump_json(os.path.join(spec.outdir, "sweep_errors.json"), errors)
    return results


CONFIG_FIELDS = ("n", "d", "K", "eps", "delta", "eta", "c0", "C1", "C2", "c",
                 "mode", "kappa_override", "gamma_override", "mc_budget",
                 "quad_order")
SPEC_FIELDS = ("eta", "strategy", "seed", "concept_file", "outdir",
               "oracle_budget", "recon_budget", "eval_budget", "calib_rounds",
               "strategy_options")


def spec_from_json(obj, **overrides):
    """ExperimentSpec from a config dict or JSON path; overrides win.

    A missing N falls back to the theory formula (constant via "theory_C").
    """
    if isinstance(obj, (str, os.PathLike)):
        with open(obj, encoding="utf-8") as fh:
            obj = json.load(fh)
    obj = dict(obj)
    obj.update({k: v for k, v in overrides.items() if v is not None})
    config = EstimatorConfig(**{k: obj[k] for k in CONFIG_FIELDS if k in obj})
    N = obj.get("N")
    if N is None:
        N = theory_n(config, float(obj.get("theory_C", 1.0)))
    kwargs = {k: obj[k] for k in SPEC_FIELDS if obj.get(k) is not None}
    return ExperimentSpec(config=config, N=int(N), **kwargs)
