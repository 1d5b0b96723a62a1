"""Chow vector to PTF reconstruction.

Iteratively fits a bounded polynomial whose Chow vector matches the target:
g'_{t+1} = g'_t + (v - chi_{P1(g'_t)}) / 2, stopping when the residual norm
drops to 3*eps plus a Monte-Carlo noise floor, then returns the sign of the
final polynomial as the classifier.
"""

from dataclasses import dataclass, field
from math import ceil, sqrt

import numpy as np
from numpy.polynomial import hermite_e

from . import rng as rngmod
from .concepts import SparsePTF
from .errors import ConfigError
from .hermite import enumerate_basis, eval_features

QUAD_MAX_N = 6
GRID_LIMIT = 10 ** 7
# hermegauss weights overflow to nan somewhere above this order
QUAD_MAX_ORDER = 350


def p1_clamp(a):
    """Pointwise projection onto [-1, 1]."""
    return np.clip(a, -1.0, 1.0)


def _chow_bounded_mc(gprime, basis, budget, seed, tag):
    M = len(basis)
    n = basis.n

    def part(c, a, b):
        g = rngmod.stream(seed, "chowg", tag, c)
        X = g.standard_normal((b - a, n))
        F = eval_features(basis, X)
        gp = p1_clamp(F @ gprime)
        contrib = F * gp[:, None]
        return np.stack([contrib.sum(axis=0), (contrib ** 2).sum(axis=0)])

    parts = rngmod.map_chunks(part, budget)
    s1, s2 = rngmod.sum_chunks(parts)
    values = s1 / budget
    var = np.maximum(s2 / budget - values ** 2, 0.0)
    return values, np.sqrt(var / budget)


def _chow_bounded_quad(gprime, basis, order):
    n = basis.n
    if n > QUAD_MAX_N:
        raise ConfigError(f"quadrature limited to n <= {QUAD_MAX_N}")
    if not (1 <= order <= QUAD_MAX_ORDER):
        raise ConfigError(f"quadrature order must lie in [1, {QUAD_MAX_ORDER}]")
    if order ** n > GRID_LIMIT:
        raise ConfigError("quadrature grid exceeds the node limit")
    nodes, weights = hermite_e.hermegauss(order)
    weights = weights / sqrt(2.0 * np.pi)
    grids = np.meshgrid(*([nodes] * n), indexing="ij")
    X = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*([weights] * n), indexing="ij")
    W = np.ones(X.shape[0])
    for wg in wgrids:
        W = W * wg.ravel()
    F = eval_features(basis, X)
    gp = p1_clamp(F @ gprime)
    return F.T @ (W * gp)


def chow_of_bounded(gprime, basis, method="mc", budget=200_000, seed=0, tag=0, order=40):
    """Chow vector of the clamped polynomial P1(g'): E[P1(g'(x)) m(x)].

    Monte-Carlo (default) returns (values, per-entry standard errors);
    tensor quadrature (small n only) returns (values, None).
    """
    gprime = np.asarray(gprime, dtype=float)
    if gprime.shape != (len(basis),):
        raise ConfigError("coefficient vector does not match the basis size")
    if method == "mc":
        if budget < 10 ** 3:
            raise ConfigError("Monte-Carlo budget must be at least 1000")
        return _chow_bounded_mc(gprime, basis, budget, seed, tag)
    if method == "quadrature":
        return _chow_bounded_quad(gprime, basis, order), None
    raise ConfigError(f"unknown method {method!r}")


@dataclass
class ReconstructTrace:
    rhos: list = field(default_factory=list)
    rho_stderrs: list = field(default_factory=list)
    gprimes: list = field(default_factory=list)
    case1: bool = False

    @property
    def iterations(self):
        return len(self.rhos)


def reconstruct_ptf(v, eps, n, d, budget=200_000, seed=0, method="mc", order=40):
    """Iterative Chow-matching; returns (classifier, trace).

    The classifier is sign(g'_final) as a sparse PTF (ties at zero resolve to
    +1, so an all-zero polynomial becomes the constant +1 concept).
    """
    if not (0 < eps < 1):
        raise ConfigError("eps must lie in (0,1)")
    v = np.asarray(v, dtype=float)
    basis = enumerate_basis(n, d)
    if v.shape != (len(basis),):
        raise ConfigError("v does not match the basis size")
    cap = ceil(1.0 / eps ** 2)
    gprime = np.zeros(len(basis))
    trace = ReconstructTrace()
    for t in range(cap + 1):
        chi, se = chow_of_bounded(gprime, basis, method=method, budget=budget,
                                  seed=seed, tag=t, order=order)
        resid = v - chi
        rho = float(np.linalg.norm(resid))
        se_rho = float(np.linalg.norm(se)) if se is not None else 0.0
        trace.rhos.append(rho)
        trace.rho_stderrs.append(se_rho)
        trace.gprimes.append(gprime.copy())
        if rho <= 3.0 * eps + 2.0 * se_rho:
            trace.case1 = True
            break
        if t == cap:
            break
        gprime = gprime + 0.5 * resid
    return _sign_classifier(gprime, basis), trace


def _sign_classifier(gprime, basis):
    nz = np.nonzero(gprime)[0]
    if nz.size == 0:
        return SparsePTF(basis.n, basis.d, [0], {0: 1.0})
    support = sorted({c for j in nz for c, e in enumerate(basis.indices[j]) if e}) or [0]
    return SparsePTF(basis.n, basis.d, support, {int(j): float(gprime[j]) for j in nz})


def potential_diag(f_star, gprime, budget=100_000, seed=0):
    """Monte-Carlo estimate (value, stderr) of E[(f - g)(f - 2g' + g)] with
    g = P1(g'); equals 1 exactly at g' = 0."""
    if budget < 10 ** 3:
        raise ConfigError("budget must be at least 1000")
    basis = f_star.basis
    gprime = np.asarray(gprime, dtype=float)
    if gprime.shape != (len(basis),):
        raise ConfigError("coefficient vector does not match the concept's basis")

    def part(c, a, b):
        g = rngmod.stream(seed, "potential", c)
        X = g.standard_normal((b - a, f_star.n))
        F = eval_features(basis, X)
        raw = F @ gprime
        gp = p1_clamp(raw)
        fx = f_star.labels(X).astype(float)
        vals = (fx - gp) * (fx - 2.0 * raw + gp)
        return np.array([vals.sum(), (vals ** 2).sum()])

    parts = rngmod.map_chunks(part, budget)
    s1, s2 = rngmod.sum_chunks(parts)
    mean = s1 / budget
    var = max(s2 / budget - mean ** 2, 0.0)
    return float(mean), float(sqrt(var / budget))
