#!/usr/bin/env python3
"""
End-to-end run: draw a sparse PTF, corrupt a sample, estimate its Chow
vector robustly, rebuild a classifier from the estimate, and score it.
Identical to what `chowforge pipeline` does, minus the artifact files.
"""
import numpy as np

from chowforge.adversary import CorruptionStrategy, corrupt
from chowforge.concepts import (
    chow_oracle,
    misclassification_rate,
    random_concept,
    sample_clean,
)
from chowforge.estimator import EstimatorConfig, calibrate, estimate_chow
from chowforge.reconstruct import reconstruct_ptf
from chowforge.rng import derive_seed

SEED = 42
N = 60_000
ETA = 0.03

f = random_concept(6, 2, 2, derive_seed(SEED, "concept"))
chi = chow_oracle(f, method="quadrature").values
print(f"target concept: degree 2 on attributes {f.support} of 6")

cfg = EstimatorConfig(n=6, d=2, K=2, eps=0.02, eta=ETA, c=0.4,
                      mode="calibrated")
kap, gam = calibrate(cfg, N, derive_seed(SEED, "calib"), rounds=10)
cfg.kappa_override, cfg.gamma_override = kap, gam
print(f"calibrated: kappa={kap:.4f} gamma={gam:.2f}")

clean = sample_clean(f, N, derive_seed(SEED, "sample"))
strat = CorruptionStrategy("chow_shift", f_star=f, gamma=gam)
bad = corrupt(clean, ETA, strat, derive_seed(SEED, "corrupt"))
print(f"sample: {N} rows, {int(bad.corrupted.sum())} corrupted")

est = estimate_chow(bad, cfg)
err = np.linalg.norm(est.u - chi)
print(f"estimate: {len(est.phases)} phases, terminated {est.terminated_by}, "
      f"chow error {err:.4f}")

clf, trace = reconstruct_ptf(est.u, 0.02, 6, 2, budget=300_000,
                             seed=derive_seed(SEED, "recon"))
print(f"reconstruction: {trace.iterations} iterations, "
      f"final rho {trace.rhos[-1]:.4f}, case1={trace.case1}")

mis, se = misclassification_rate(clf, f, 200_000, derive_seed(SEED, "eval"))
print(f"misclassification vs target: {mis:.4f} +- {se:.4f}")
