"""Nasty-noise adversary simulator.

The adversary inspects the target concept and the clean sample, replaces
exactly floor(eta*N) samples with adversarially constructed ones, and
re-shuffles so position carries no information. The corruption mask is
ground truth for diagnostics only; estimator decisions never see it.
"""

from dataclasses import dataclass
from math import factorial, floor, sqrt

import numpy as np
from numpy.polynomial import hermite_e

from . import rng as rngmod
from .errors import ConfigError
from .hermite import enumerate_basis, eval_feature_vector, sup_norm_feature
from .samples import LabeledSampleSet

KINDS = ("none", "label_flip_margin", "chow_shift", "variance_spike")


@dataclass
class CorruptionStrategy:
    """What the adversary does with its floor(eta*N) replacements.

    label_flip_margin flips the labels of the most confident points (largest
    |p*(x)|). chow_shift plants identical points with feature value
    scale*gamma on one support-restricted basis element and labels chosen to
    push the empirical Chow vector against it. variance_spike plants points
    with sup-norm feature just below (or above) the prune radius with random
    labels, inflating the restricted covariance.
    """

    kind: str
    f_star: object = None
    gamma: float = None
    d: int = None
    target_index: tuple = None
    magnitude_scale: float = None
    inside_prune: bool = True
    coordinate: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown corruption kind {self.kind!r}")
        if self.kind in ("label_flip_margin", "chow_shift") and self.f_star is None:
            raise ConfigError(f"{self.kind} needs the target concept")
        if self.kind in ("chow_shift", "variance_spike"):
            if self.gamma is None or self.gamma <= 0:
                raise ConfigError(f"{self.kind} needs a positive prune radius")
        if self.kind == "variance_spike" and self.d is None and self.f_star is None:
            raise ConfigError("variance_spike needs the basis degree d")
        if self.magnitude_scale is not None and self.magnitude_scale <= 0:
            raise ConfigError("magnitude_scale must be positive")

    def scale(self):
        if self.magnitude_scale is not None:
            return self.magnitude_scale
        if self.kind == "chow_shift":
            return 0.9 if self.inside_prune else 1.1
        return 0.95 if self.inside_prune else 1.05


def solve_hermite_level(deg, value):
    """Largest real z with normalized He_deg(z) = value."""
    if deg < 1:
        raise ConfigError("need degree >= 1 to hit a feature value")
    c = np.zeros(deg + 1)
    c[deg] = 1.0
    c[0] -= value * sqrt(factorial(deg))
    roots = hermite_e.hermeroots(c)
    real = roots[np.abs(roots.imag) < 1e-9].real
    if len(real) == 0:
        raise ConfigError(f"He_{deg} never attains {value}")
    return float(np.max(real))


def _default_target(f_star):
    # degree-d element on the first support attribute: its solved coordinate
    # value keeps every other feature below the target one
    mi = [0] * f_star.n
    mi[f_star.support[0]] = f_star.d
    return tuple(mi)


def _planted_chow_shift(strategy):
    f = strategy.f_star
    target = strategy.target_index or _default_target(f)
    if len(target) != f.n or sum(target) == 0 or sum(target) > f.d:
        raise ConfigError("target must be a non-constant multi-index of degree <= d")
    if any(e and c not in f.support for c, e in enumerate(target)):
        raise ConfigError("chow_shift target must be supported inside the concept")
    active = [(c, e) for c, e in enumerate(target) if e]
    feat_value = strategy.scale() * strategy.gamma
    per_coord = feat_value ** (1.0 / len(active))
    x = np.zeros(f.n)
    for c, e in active:
        x[c] = solve_hermite_level(e, per_coord)
    basis = f.basis
    m_a = float(eval_feature_vector(basis, x)[basis.index_of(target)])
    if strategy.inside_prune and sup_norm_feature(basis, x) > strategy.gamma:
        raise ConfigError("planted point exceeds the prune radius; pick a different target")
    label = -1 if m_a >= 0 else 1
    return x, label


def corrupt(clean, eta, strategy, seed):
    """Corrupted copy of `clean` with exactly floor(eta*N) replacements,
    re-shuffled; the mask marks replaced positions."""
    if not (0 <= eta < 0.5):
        raise ConfigError("eta must satisfy 0 <= eta < 1/2")
    if clean.corrupted.any():
        raise ConfigError("input set is already corrupted")
    N = len(clean)
    g = rngmod.stream(seed, "corrupt")
    X = clean.X.copy()
    y = clean.y.copy()
    mask = np.zeros(N, dtype=bool)
    n_replace = floor(eta * N)

    if n_replace > 0 and strategy.kind != "none":
        if strategy.kind == "label_flip_margin":
            conf = np.abs(strategy.f_star.poly(X))
            idx = np.argsort(-conf, kind="stable")[:n_replace]
            y[idx] = -y[idx]
        elif strategy.kind == "chow_shift":
            x_plant, label = _planted_chow_shift(strategy)
            idx = g.choice(N, size=n_replace, replace=False)
            X[idx] = x_plant
            y[idx] = label
        elif strategy.kind == "variance_spike":
            d = strategy.d if strategy.d is not None else strategy.f_star.d
            n_attr = clean.n
            z = solve_hermite_level(d, strategy.scale() * strategy.gamma)
            idx = g.choice(N, size=n_replace, replace=False)
            for j, i in enumerate(idx):
                coord = strategy.coordinate if strategy.coordinate is not None else j % n_attr
                X[i] = 0.0
                X[i, coord] = z
            y[idx] = g.choice(np.array([-1, 1], dtype=np.int8), size=n_replace)
        mask[idx] = True

    perm = g.permutation(N)
    return LabeledSampleSet(X[perm], y[perm], mask[perm])
