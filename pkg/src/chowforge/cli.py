"""Command-line front end; every subcommand is a thin wrapper over the
library. `chowforge pipeline --config spec.json --out runs/r0` is the main
entry point, the rest expose individual stages for scripting."""

import argparse
import csv
import json
import os
import sys

from .adversary import KINDS, corrupt
from .concepts import (
    SparsePTF,
    chow_oracle,
    misclassification_rate,
    random_concept,
    sample_clean,
)
from .errors import ConfigError
from .estimator import EstimatorConfig, estimate_chow, gamma_radius
from .harness import (
    StageFailure,
    build_strategy,
    load_chow_json,
    run_pipeline,
    spec_from_json,
    sweep,
    theory_n,
)
from .reconstruct import reconstruct_ptf
from .samples import LabeledSampleSet, save_meta


def _ensure_out(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _config_from_file(path, args):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    fields = ("n", "d", "K", "eps", "delta", "eta", "c0", "C1", "C2", "c",
              "mode", "kappa_override", "gamma_override", "mc_budget",
              "quad_order")
    kwargs = {k: obj[k] for k in fields if k in obj}
    if getattr(args, "mode", None):
        kwargs["mode"] = args.mode
    if getattr(args, "kappa", None) is not None:
        kwargs["kappa_override"] = args.kappa
    if getattr(args, "gamma", None) is not None:
        kwargs["gamma_override"] = args.gamma
    return EstimatorConfig(**kwargs)


def _dump(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_gen_concept(args):
    f = random_concept(args.n, args.d, args.K, args.seed)
    out = _ensure_out(args)
    path = os.path.join(out, "concept.json")
    f.save(path)
    print(f"wrote {path} (support {f.support}, {len(f.coeffs)} terms)")
    return 0


def cmd_sample(args):
    f = SparsePTF.load(args.concept)
    s = sample_clean(f, args.n_samples, args.seed)
    out = _ensure_out(args)
    s.save_csv(os.path.join(out, "clean.csv"))
    save_meta(os.path.join(out, "clean_meta.json"), f.n, f.d, f.K, 0.0,
              "none", args.seed, len(s))
    print(f"wrote {out}/clean.csv ({len(s)} samples, n={f.n})")
    return 0


def cmd_corrupt(args):
    f = SparsePTF.load(args.concept)
    clean = LabeledSampleSet.load_csv(args.samples)
    gamma_val = args.gamma
    if gamma_val is None and args.config is not None:
        cfg = _config_from_file(args.config, args)
        gamma_val = (cfg.gamma_override if cfg.gamma_override is not None
                     else gamma_radius(cfg, len(clean)))
    if gamma_val is None and args.strategy in ("chow_shift", "variance_spike"):
        raise ConfigError(f"{args.strategy} needs --gamma or --config")
    strat = build_strategy(args.strategy, f, gamma_val, f.d)
    bad = corrupt(clean, args.eta, strat, args.seed)
    out = _ensure_out(args)
    bad.save_csv(os.path.join(out, "corrupted.csv"))
    save_meta(os.path.join(out, "corrupted_meta.json"), f.n, f.d, f.K,
              args.eta, args.strategy, args.seed, len(bad))
    print(f"wrote {out}/corrupted.csv "
          f"({int(bad.corrupted.sum())} of {len(bad)} replaced)")
    return 0


def cmd_estimate(args):
    cfg = _config_from_file(args.config, args)
    samples = LabeledSampleSet.load_csv(args.samples)
    est = estimate_chow(samples, cfg)
    out = _ensure_out(args)
    _dump(os.path.join(out, "estimate.json"), est.to_json_dict())
    print(f"wrote {out}/estimate.json ({est.terminated_by} after "
          f"{len(est.phases)} phases, {len(samples) - est.n_pruned} pruned)")
    return 0


def cmd_reconstruct(args):
    v = load_chow_json(args.chow)
    clf, trace = reconstruct_ptf(v, args.eps, args.n, args.d,
                                 budget=args.budget, seed=args.seed)
    out = _ensure_out(args)
    clf.save(os.path.join(out, "classifier.json"))
    with open(os.path.join(out, "trace.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "rho", "rho_stderr"])
        for t, (r, s) in enumerate(zip(trace.rhos, trace.rho_stderrs)):
            w.writerow([t, repr(float(r)), repr(float(s))])
    print(f"wrote {out}/classifier.json ({trace.iterations} iterations, "
          f"final rho {trace.rhos[-1]:.4f})")
    return 0


def cmd_evaluate(args):
    clf = SparsePTF.load(args.classifier)
    f = SparsePTF.load(args.concept)
    rate, se = misclassification_rate(clf, f, args.budget, args.seed)
    print(f"misclassification {rate:.6f} +- {se:.6f}")
    if args.out is not None:
        out = _ensure_out(args)
        _dump(os.path.join(out, "eval.json"),
              {"miscls": rate, "miscls_stderr": se, "budget": args.budget,
               "seed": args.seed})
    return 0


def cmd_oracle_chow(args):
    f = SparsePTF.load(args.concept)
    chow = chow_oracle(f, method=args.method, budget=args.budget,
                       seed=args.seed, order=args.order)
    out = _ensure_out(args)
    path = os.path.join(out, "oracle_chow.json")
    chow.save(path, n=f.n, d=f.d)
    print(f"wrote {path} ({chow.provenance})")
    return 0


def cmd_pipeline(args):
    spec = spec_from_json(args.config, seed=args.seed, outdir=args.out,
                          mode=args.mode, kappa_override=args.kappa,
                          gamma_override=args.gamma)
    if args.theory_n:
        n_th = theory_n(spec.config)
        print(f"theory sample count: {n_th}")
        with open(args.config, encoding="utf-8") as fh:
            if json.load(fh).get("N") is None:
                spec = spec_from_json(args.config, seed=args.seed,
                                      outdir=args.out, mode=args.mode,
                                      kappa_override=args.kappa,
                                      gamma_override=args.gamma, N=n_th)
    result = run_pipeline(spec)
    print(f"wrote {spec.outdir}/result.json "
          f"(chow error {result.chow_l2_err:.4f}, "
          f"miscls {result.miscls:.4f} +- {result.miscls_stderr:.4f}, "
          f"{result.phases} phases)")
    return 0


def cmd_sweep(args):
    spec = spec_from_json(args.config, seed=args.seed, outdir=args.out,
                          mode=args.mode, kappa_override=args.kappa,
                          gamma_override=args.gamma)
    if args.axis == "eta":
        values = [float(v) for v in args.values.split(",")]
    elif args.axis == "N":
        values = [int(v) for v in args.values.split(",")]
    else:
        values = args.values.split(",")
    results = sweep(spec, args.axis, values)
    print(f"wrote {spec.outdir}/sweep_results.csv "
          f"({len(results)} of {len(values)} cells succeeded)")
    return 0 if len(results) == len(values) else 1


def build_parser():
    p = argparse.ArgumentParser(
        prog="chowforge",
        description="Outlier-robust Chow vector estimation for sparse PTFs")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=out_required,
                        help="output directory")

    sp = sub.add_parser("gen-concept", help="draw a random sparse PTF")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--K", type=int, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_gen_concept)

    sp = sub.add_parser("sample", help="draw clean labeled Gaussians")
    sp.add_argument("--concept", required=True)
    sp.add_argument("--n-samples", type=int, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("corrupt", help="apply an adversary to clean samples")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--concept", required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--strategy", choices=KINDS, required=True)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--config", default=None)
    sp.add_argument("--mode", choices=("theory", "calibrated"), default=None)
    sp.add_argument("--kappa", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_corrupt)

    sp = sub.add_parser("estimate", help="robust sparse Chow estimation")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--config", required=True)
    sp.add_argument("--mode", choices=("theory", "calibrated"), default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("reconstruct", help="Chow vector -> PTF classifier")
    sp.add_argument("--chow", required=True,
                    help="estimate.json or oracle_chow.json")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--budget", type=int, default=200_000)
    common(sp)
    sp.set_defaults(fn=cmd_reconstruct)

    sp = sub.add_parser("evaluate", help="misclassification vs a concept")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--concept", required=True)
    sp.add_argument("--budget", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_evaluate)

    sp = sub.add_parser("oracle-chow", help="exact/MC Chow vector of a concept")
    sp.add_argument("--concept", required=True)
    sp.add_argument("--method", choices=("quadrature", "montecarlo"),
                    default="quadrature")
    sp.add_argument("--budget", type=int, default=10 ** 6)
    sp.add_argument("--order", type=int, default=80)
    common(sp)
    sp.set_defaults(fn=cmd_oracle_chow)

    sp = sub.add_parser("pipeline", help="full generate->evaluate run")
    sp.add_argument("--config", required=True, help="experiment spec JSON")
    sp.add_argument("--mode", choices=("theory", "calibrated"), default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--theory-n", action="store_true",
                    help="print the theory sample count; use it if N unset")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_pipeline)

    sp = sub.add_parser("sweep", help="pipeline sweep along one axis")
    sp.add_argument("--config", required=True)
    sp.add_argument("--axis", choices=("eta", "N", "strategy"), required=True)
    sp.add_argument("--values", required=True, help="comma-separated")
    sp.add_argument("--mode", choices=("theory", "calibrated"), default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_sweep)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, StageFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
