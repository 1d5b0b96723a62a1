"""Sparse polynomial threshold functions, clean sampling, and Chow oracles.

A K-sparse degree-d PTF is f(x) = sign(q(x_L)) where q is a polynomial over
the support attributes L, written in the normalized Hermite basis. Its Chow
vector chi_f = E[f(x) m(x)] under x ~ N(0, I_n) vanishes off the L-supported
multi-indices, so oracles only ever integrate over |L| coordinates.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import ConfigError
from .hermite import enumerate_basis, eval_features
from .quadrature import chow_quadrature
from .samples import LabeledSampleSet


class SparsePTF:
    """PTF with coefficients restricted to multi-indices inside `support`.

    coeffs maps basis index -> real over the (n, d) graded-lex basis; the
    construction rejects coefficients outside the support and all-zero
    coefficient maps.
    """

    def __init__(self, n, d, support, coeffs):
        self.n = int(n)
        self.d = int(d)
        self.support = tuple(sorted(int(c) for c in support))
        if len(set(self.support)) != len(self.support):
            raise ConfigError("duplicate support attributes")
        if self.support and not (0 <= self.support[0] and self.support[-1] < n):
            raise ConfigError("support attribute out of range")
        self.basis = enumerate_basis(n, d)
        sup = set(self.support)
        clean = {}
        for j, v in coeffs.items():
            v = float(v)
            if v == 0.0:
                continue
            mi = self.basis.indices[int(j)]
            if any(e and c not in sup for c, e in enumerate(mi)):
                raise ConfigError(f"coefficient on {mi} falls outside the support")
            clean[int(j)] = v
        if not clean:
            raise ConfigError("PTF needs at least one non-zero coefficient")
        self.coeffs = dict(sorted(clean.items()))
        self._cols = np.array(list(self.coeffs), dtype=int)
        self._vals = np.array([self.coeffs[j] for j in self._cols])

    @property
    def K(self):
        return len(self.support)

    def coeff_items(self):
        """(full multi-index, value) pairs."""
        return [(self.basis.indices[j], v) for j, v in self.coeffs.items()]

    def poly(self, X):
        """q(x) for a batch of instances, evaluated on support features only."""
        F = eval_features(self.basis, np.atleast_2d(X), cols=self._cols)
        return F @ self._vals

    def labels(self, X):
        return np.where(self.poly(X) >= 0, 1, -1).astype(np.int8)

    def to_json_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "K": self.K,
            "support": list(self.support),
            "coeffs": [
                {"multi_index": list(self.basis.indices[j]), "value": v}
                for j, v in self.coeffs.items()
            ],
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, obj):
        basis = enumerate_basis(obj["n"], obj["d"])
        coeffs = {
            basis.index_of(tuple(item["multi_index"])): item["value"]
            for item in obj["coeffs"]
        }
        return cls(obj["n"], obj["d"], obj["support"], coeffs)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    @classmethod
    def from_multi_indices(cls, n, d, items, support=None):
        """Build from (multi-index, value) pairs; support inferred if omitted."""
        pairs = list(items.items()) if isinstance(items, dict) else list(items)
        basis = enumerate_basis(n, d)
        if support is None:
            support = sorted(
                {c for mi, _ in pairs for c, e in enumerate(mi) if e}
            ) or [0]
        coeffs = {basis.index_of(tuple(mi)): v for mi, v in pairs}
        return cls(n, d, support, coeffs)


@dataclass
class ChowVector:
    values: np.ndarray
    provenance: str  # oracle-quadrature | oracle-montecarlo | empirical
    stderr: np.ndarray = None

    def save(self, path, n=None, d=None):
        entries = [
            {"index": int(j), "value": float(v)}
            for j, v in enumerate(self.values)
            if v != 0.0 or self.provenance != "oracle-quadrature"
        ]
        obj = {"m": len(self.values), "provenance": self.provenance, "entries": entries}
        if n is not None:
            obj["n"], obj["d"] = n, d
        if self.stderr is not None:
            obj["stderr"] = [float(s) for s in self.stderr]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


def evaluate_ptf(f, x):
    """Label of one instance; sign(0) := +1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != f.n:
        raise ConfigError(f"expected an n-vector with n={f.n}")
    return int(f.labels(x[None, :])[0])


def chow_support_bound(K, d):
    """Sparsity bound k for the Chow vector of a K-sparse degree-d PTF."""
    if K < 1 or d < 1:
        raise ConfigError("K >= 1 and d >= 1 required")
    return d + 1 if K == 1 else 2 * K**d


def chow_oracle(f, method="quadrature", budget=10**6, seed=0, order=80):
    """Chow vector of f, either by support-restricted quadrature (entries off
    the supported multi-indices exactly 0) or by Monte Carlo with stderr."""
    if method == "quadrature":
        values, converged = chow_quadrature(
            f.n, f.d, f.support, f.coeff_items(), order=order
        )
        if converged:
            return ChowVector(values, "oracle-quadrature")
        # step-doubling disagreed; fall back to Monte Carlo
        method = "montecarlo"
    if method != "montecarlo":
        raise ConfigError(f"unknown oracle method {method!r}")
    if budget < 10**3:
        raise ConfigError("montecarlo oracle needs budget >= 1e3")
    mean, stderr = _mc_chow(f, budget, seed)
    return ChowVector(mean, "oracle-montecarlo", stderr)


def _mc_chow(f, budget, seed):
    basis = f.basis

    def one(c, a, b):
        X = rngmod.stream(seed, "chow-mc", c).standard_normal((b - a, f.n))
        F = eval_features(basis, X)
        ym = f.labels(X)[:, None] * F
        return np.stack([ym.sum(axis=0), (F * F).sum(axis=0)])

    acc = rngmod.sum_chunks(rngmod.map_chunks(one, budget))
    mean = acc[0] / budget
    # y^2 = 1, so Var(y m_j) = E[m_j^2] - mean^2
    var = np.maximum(acc[1] / budget - mean**2, 0.0)
    return mean, np.sqrt(var / budget)


def sample_clean(f, N, seed):
    """N i.i.d. Gaussian instances labeled by f; mask all-false."""
    if N < 1:
        raise ConfigError("N >= 1 required")
    X = rngmod.gaussian_matrix(N, f.n, seed, "sample")
    return LabeledSampleSet(X, f.labels(X))


def misclassification_rate(f_hat, f_star, budget, seed):
    """Monte-Carlo disagreement probability with standard error."""
    if budget < 10**3:
        raise ConfigError("misclassification budget >= 1e3 required")
    if f_hat.n != f_star.n:
        raise ConfigError("dimension mismatch between hypotheses")

    def one(c, a, b):
        X = rngmod.stream(seed, "miscls", c).standard_normal((b - a, f_star.n))
        return float(np.sum(f_hat.labels(X) != f_star.labels(X)))

    wrong = float(rngmod.sum_chunks(rngmod.map_chunks(one, budget)))
    p = wrong / budget
    return p, float(np.sqrt(p * (1 - p) / budget))


def random_concept(n, d, K, seed, balance=(0.05, 0.95), probe=10**4, max_tries=200):
    """Random K-sparse degree-d PTF with i.i.d. normal coefficients on the
    supported multi-indices, rejection-sampled to a non-degenerate sign
    balance Pr[f=+1] within `balance` (estimated on `probe` draws)."""
    if not (1 <= K <= n):
        raise ConfigError("need 1 <= K <= n")
    g = rngmod.stream(seed, "concept")
    support = np.sort(g.choice(n, size=K, replace=False))
    basis = enumerate_basis(n, d)
    sup = set(int(c) for c in support)
    cols = [
        j
        for j, mi in enumerate(basis.indices)
        if all(not e or c in sup for c, e in enumerate(mi))
    ]
    for _ in range(max_tries):
        coeffs = {j: float(v) for j, v in zip(cols, g.standard_normal(len(cols)))}
        f = SparsePTF(n, d, support, coeffs)
        X = g.standard_normal((probe, n))
        p_plus = float(np.mean(f.labels(X) == 1))
        if balance[0] <= p_plus <= balance[1]:
            return f
    raise ConfigError(f"no balanced concept found in {max_tries} tries")
