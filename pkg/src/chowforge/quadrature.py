"""Quadrature for Gaussian expectations of sign(polynomial) * Hermite basis.

The integrand sign(q(x)) * He_a(x) is discontinuous, so fixed-order
polynomial rules stall at coarse accuracy. Instead the innermost support
coordinate is integrated exactly: the section q(t) is a univariate Hermite
series whose real roots split the line into constant-sign intervals, and on
each interval int He_j(t) phi(t) dt has the closed form
-(1/sqrt(j)) He_{j-1}(t) phi(t) (Phi(t) for j = 0). Outer coordinates use
adaptive integration for two-dimensional supports and tensor Gauss-Hermite
with a step-doubling check for larger ones.
"""

from math import inf, sqrt

import numpy as np
from numpy.polynomial import hermite_e
from scipy.integrate import quad_vec
from scipy.special import ndtr

from .errors import ConfigError
from .hermite import enumerate_basis, hermite_1d, hermite_table

GRID_LIMIT = 10**7


def _phi(z):
    return np.exp(-0.5 * z * z) / sqrt(2 * np.pi)


def _unnormalize(series):
    # normalized-basis coeffs -> plain probabilists' series for numpy helpers
    fact = 1.0
    out = np.array(series, dtype=float)
    for j in range(len(out)):
        if j:
            fact *= j
        out[j] /= sqrt(fact)
    return out


def interval_integrals(a, b, dmax):
    """I_j = int_a^b He_j(t) phi(t) dt for j = 0..dmax, exactly."""
    out = np.empty(dmax + 1)
    out[0] = (1.0 if b == inf else ndtr(b)) - (0.0 if a == -inf else ndtr(a))
    pa = 0.0 if a == -inf else _phi(a)
    pb = 0.0 if b == inf else _phi(b)
    for j in range(1, dmax + 1):
        ha = 0.0 if a == -inf else hermite_1d(j - 1, a)
        hb = 0.0 if b == inf else hermite_1d(j - 1, b)
        out[j] = (ha * pa - hb * pb) / sqrt(j)
    return out


def signed_integrals(series, dmax):
    """int sign(p(t)) He_j(t) phi(t) dt for j = 0..dmax, p given as
    normalized-Hermite series coefficients; exact up to root finding."""
    bu = _unnormalize(series)
    scale = np.max(np.abs(bu))
    if scale < 1e-300:
        out = np.zeros(dmax + 1)
        out[0] = 1.0  # sign(0) := +1
        return out
    # trim negligible leading coefficients before building the companion matrix
    keep = len(bu)
    while keep > 1 and abs(bu[keep - 1]) < 1e-13 * scale:
        keep -= 1
    bu = bu[:keep]
    if keep == 1:
        s = 1.0 if bu[0] >= 0 else -1.0
        return s * interval_integrals(-inf, inf, dmax)
    roots = hermite_e.hermeroots(bu)
    roots = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    pts = [-inf] + [float(r) for r in roots] + [inf]
    out = np.zeros(dmax + 1)
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if a == -inf:
            mid = 0.0 if b == inf else b - 1.0
        elif b == inf:
            mid = a + 1.0
        else:
            if b - a < 1e-13:
                continue
            mid = 0.5 * (a + b)
        s = 1.0 if hermite_e.hermeval(mid, bu) >= 0 else -1.0
        out += s * interval_integrals(a, b, dmax)
    return out


def chow_quadrature(n, d, support, coeff_items, order=80, tol=1e-8):
    """Chow entries of sign(q(x_support)) on support-restricted multi-indices.

    coeff_items: list of (full multi-index tuple, value). Returns
    (full_M_vector, converged flag); a False flag means the internal
    step-doubling check disagreed and the caller should fall back to
    Monte Carlo.
    """
    support = tuple(sorted(support))
    l = len(support)
    if l > 6:
        raise ConfigError("quadrature supports at most 6 active coordinates")
    if order < 2 or order**l > GRID_LIMIT:
        raise ConfigError(f"quadrature grid {order}^{l} exceeds {GRID_LIMIT:g}")
    full = enumerate_basis(n, d)
    red = enumerate_basis(l, d) if l >= 1 else None
    pos_in_support = {c: i for i, c in enumerate(support)}

    def reduce_mi(mi):
        out = [0] * l
        for c, e in enumerate(mi):
            if e:
                out[pos_in_support[c]] = e
        return tuple(out)

    red_coeffs = np.zeros(red.size)
    for mi, v in coeff_items:
        red_coeffs[red.index_of(reduce_mi(mi))] += v

    if l == 1:
        series = np.zeros(d + 1)
        for j_red, mi in enumerate(red.indices):
            series[mi[0]] += red_coeffs[j_red]
        inner = signed_integrals(series, d)
        red_vals = np.array([inner[mi[0]] for mi in red.indices])
        converged = True
    elif l == 2:
        red_vals, coarse = None, None
        for run_tol in (100 * tol, tol):
            vals = _chow_2d_adaptive(red, red_coeffs, d, run_tol)
            red_vals, coarse = vals, red_vals
        converged = bool(np.max(np.abs(red_vals - coarse)) <= 1e-6)
    else:
        red_vals = _chow_tensor(red, red_coeffs, d, l, order)
        check = _chow_tensor(red, red_coeffs, d, l, 2 * order)
        converged = bool(np.max(np.abs(red_vals - check)) <= 1e-6)
        red_vals = check

    out = np.zeros(full.size)
    for j_red, mi_red in enumerate(red.indices):
        mi_full = [0] * n
        for i, c in enumerate(support):
            mi_full[c] = mi_red[i]
        out[full.index_of(tuple(mi_full))] = red_vals[j_red]
    return out, converged


def _chow_2d_adaptive(red, red_coeffs, d, tol):
    # integrate the outer coordinate adaptively; inner coordinate is exact
    mis = red.indices

    def f(z):
        Ho = np.array([hermite_1d(j, z) for j in range(d + 1)])
        series = np.zeros(d + 1)
        for j_red, (a0, a1) in enumerate(mis):
            series[a1] += red_coeffs[j_red] * Ho[a0]
        inner = signed_integrals(series, d)
        return _phi(z) * np.array([Ho[a0] * inner[a1] for a0, a1 in mis])

    vals, _err = quad_vec(f, -inf, inf, epsabs=tol, epsrel=tol, limit=400)
    return vals


def _chow_tensor(red, red_coeffs, d, l, order):
    # tensor Gauss-Hermite over the first l-1 coordinates, exact inner
    nodes, weights = hermite_e.hermegauss(order)
    weights = weights / sqrt(2 * np.pi)
    grids = np.meshgrid(*([nodes] * (l - 1)), indexing="ij")
    W = np.ones(grids[0].shape)
    for g in np.meshgrid(*([weights] * (l - 1)), indexing="ij"):
        W = W * g
    Z = np.stack([g.ravel() for g in grids], axis=1)
    W = W.ravel()
    T = hermite_table(Z, d)  # (nodes, l-1, d+1)
    mis = red.indices
    # outer-product factor per reduced element, vectorized over nodes
    P = np.ones((Z.shape[0], red.size))
    for j_red, mi in enumerate(mis):
        for c in range(l - 1):
            if mi[c]:
                P[:, j_red] *= T[:, c, mi[c]]
    B = np.zeros((Z.shape[0], d + 1))
    for j_red, mi in enumerate(mis):
        B[:, mi[-1]] += red_coeffs[j_red] * P[:, j_red]
    I = np.empty((Z.shape[0], d + 1))
    for t in range(Z.shape[0]):
        I[t] = signed_integrals(B[t], d)
    vals = np.empty(red.size)
    for j_red, mi in enumerate(mis):
        vals[j_red] = float(np.sum(W * P[:, j_red] * I[:, mi[-1]]))
    return vals
