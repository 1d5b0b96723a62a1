"""Orthonormal Hermite feature basis of degree <= d on R^n.

Basis elements are products of normalized probabilists' Hermite polynomials,
He_a(x) = prod_i He_{a_i}(x_i) / sqrt(a_i!), indexed by multi-indices of
total degree <= d. Under x ~ N(0, I_n) the family is orthonormal and the
first element is the constant 1.
"""

from math import comb, sqrt

import numpy as np

from .errors import ConfigError


def hermite_1d(deg, x):
    """Normalized probabilists' Hermite polynomial He_deg at x.

    Uses the stable three-term recurrence
    h_{m+1}(x) = (x*h_m(x) - sqrt(m)*h_{m-1}(x)) / sqrt(m+1),
    which avoids factorial overflow and cancellation at large |x|.
    Accepts scalars or arrays.
    """
    if deg < 0:
        raise ConfigError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for m in range(deg):
        prev, cur = cur, (x * cur - sqrt(m) * prev) / sqrt(m + 1)
    return cur if cur.ndim else float(cur)


def hermite_table(X, d):
    """Univariate values for all degrees 0..d: shape X.shape + (d+1,)."""
    X = np.asarray(X, dtype=float)
    T = np.empty(X.shape + (d + 1,))
    T[..., 0] = 1.0
    if d >= 1:
        T[..., 1] = X
    for m in range(1, d):
        T[..., m + 1] = (X * T[..., m] - sqrt(m) * T[..., m - 1]) / sqrt(m + 1)
    return T


def _degree_block(n, total):
    # exponent vectors with the given total degree, lexicographically descending
    if n == 1:
        yield (total,)
        return
    for e in range(total, -1, -1):
        for rest in _degree_block(n - 1, total - e):
            yield (e,) + rest


class MultiIndexBasis:
    """Graded-lex ordered multi-index basis: degree-major, then lex-descending
    exponent tuples. Immutable after construction and safe to share."""

    def __init__(self, n, d):
        if n < 1 or d < 1:
            raise ConfigError("basis requires n >= 1 and d >= 1")
        self.n = n
        self.d = d
        indices = []
        for t in range(d + 1):
            indices.extend(_degree_block(n, t))
        self.indices = tuple(indices)
        self.size = len(indices)
        assert self.size == comb(n + d, d)
        self._pos = {mi: j for j, mi in enumerate(indices)}
        # per-element nonzero (coordinate, exponent) pairs, for cheap products
        self._terms = tuple(
            tuple((c, e) for c, e in enumerate(mi) if e) for mi in indices
        )

    def index_of(self, multi_index):
        return self._pos[tuple(multi_index)]

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"MultiIndexBasis(n={self.n}, d={self.d}, M={self.size})"


def enumerate_basis(n, d):
    """The orthonormal Hermite basis of degree <= d on R^n, graded-lex order."""
    return MultiIndexBasis(n, d)


def eval_features(basis, X, cols=None):
    """Feature matrix m(x) for a batch: (N, n) -> (N, M) or (N, len(cols)).

    Univariate Hermite values are tabulated once per coordinate and degree,
    then each selected basis element is a product of table columns.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != basis.n:
        raise ConfigError(f"expected {basis.n} coordinates, got {X.shape[1]}")
    T = hermite_table(X, basis.d)
    sel = range(basis.size) if cols is None else cols
    F = np.empty((X.shape[0], len(sel) if cols is not None else basis.size))
    for out_j, j in enumerate(sel):
        col = np.ones(X.shape[0])
        for c, e in basis._terms[j]:
            col = col * T[:, c, e]
        F[:, out_j] = col
    return F


def eval_feature_vector(basis, x):
    """Feature vector m(x) of one sample, length M."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != basis.n:
        raise ConfigError(f"expected an n-vector with n={basis.n}")
    return eval_features(basis, x[None, :])[0]


def sup_norm_feature(basis, x):
    """The sup norm of the feature vector, max_j |m_j(x)|."""
    return float(np.max(np.abs(eval_feature_vector(basis, x))))
