"""Attribute-efficient, outlier-robust Chow vector estimation for sparse
polynomial threshold functions under Gaussian marginals."""

from .adversary import CorruptionStrategy, corrupt
from .concepts import (
    ChowVector,
    SparsePTF,
    chow_oracle,
    chow_support_bound,
    evaluate_ptf,
    misclassification_rate,
    random_concept,
    sample_clean,
)
from .errors import AllSamplesPruned, ConfigError, EstimationError
from .estimator import (
    ChowEstimate,
    EstimatorConfig,
    calibrate,
    empirical_chow,
    estimate_chow,
    gamma_radius,
    hard_threshold,
    kappa,
    prune,
    rho2,
    sparse_filter,
)
from .harness import (
    ExperimentSpec,
    RunResult,
    StageFailure,
    delta_trajectory,
    run_pipeline,
    spec_from_json,
    sweep,
    theory_n,
)
from .hermite import (
    MultiIndexBasis,
    enumerate_basis,
    eval_feature_vector,
    eval_features,
    hermite_1d,
    sup_norm_feature,
)
from .reconstruct import chow_of_bounded, p1_clamp, potential_diag, reconstruct_ptf
from .samples import LabeledSampleSet

__version__ = "0.1.0"
