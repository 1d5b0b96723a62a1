"""Robust sparse Chow-vector estimation.

Pipeline: prune samples to the feature sup-norm ball of radius gamma, then
loop — certify when the empirical second-moment deviation, restricted to its
largest entries, has small Frobenius norm; otherwise score every sample with
the degree-2d filter polynomial p2 and remove the worst tail. The output is
the hard-thresholded empirical Chow vector of whatever survives.

All per-sample computation runs over fixed 4096-sample chunks with a fixed
reduction order, so results are bit-identical regardless of thread count.
Inside the phase loop the Gram matrix is maintained by rank-one downdates and
p2 values by an exact linear recurrence, which keeps per-phase cost at O(N)
even when thousands of single-sample fallback phases execute.
"""

from dataclasses import dataclass, field
from math import ceil, log, sqrt

import numpy as np

from . import rng as rngmod
from .concepts import chow_support_bound
from .errors import AllSamplesPruned, ConfigError, EstimationError
from .hermite import enumerate_basis, eval_features

# dense M x M accumulation below this; streaming top-entry selection above
DENSE_LIMIT = 4096

MODES = ("theory", "calibrated")


@dataclass
class EstimatorConfig:
    n: int
    d: int
    K: int
    eps: float = 0.1
    delta: float = 0.1
    eta: float = 0.0
    c0: float = 2.0
    C1: float = 1.0
    C2: float = 1.0
    c: float = 0.5
    mode: str = "theory"
    kappa_override: float = None
    gamma_override: float = None
    mc_budget: int = 200_000
    quad_order: int = 80

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.K < 1 or self.K > self.n:
            raise ConfigError("need n >= 1, d >= 1, 1 <= K <= n")
        if not (0 < self.eps < 1 and 0 < self.delta < 1):
            raise ConfigError("eps and delta must lie in (0,1)")
        if not (0 < self.c <= 0.5):
            raise ConfigError("c must lie in (0, 1/2]")
        if not (0 <= self.eta <= 0.5 - self.c):
            raise ConfigError("eta must lie in [0, 1/2 - c]")
        if self.c0 <= 1:
            raise ConfigError("c0 must exceed 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")

    @property
    def k(self):
        return chow_support_bound(self.K, self.d)


def rho2(config):
    return config.C2 * config.d ** 0.75 * (config.c0 * config.d) ** config.d


def kappa(config):
    """Certification threshold for the restricted Frobenius norm."""
    if config.mode == "calibrated":
        if config.kappa_override is None:
            raise ConfigError("calibrated mode needs a kappa override; run calibrate()")
        return float(config.kappa_override)
    if config.kappa_override is not None:
        return float(config.kappa_override)
    eta_term = 0.0
    if config.eta > 0:
        eta_term = (
            rho2(config)
            * (config.c0 * log(1.0 / config.eta) + config.c0 * config.d) ** config.d
            * config.eta
        )
    return 28.0 / config.c ** 2 * (eta_term + config.eps)


def gamma_radius(config, N, delta_gamma=None):
    """Prune radius: clean samples have sup-norm feature value below it whp."""
    if config.mode == "calibrated":
        if config.gamma_override is None:
            raise ConfigError("calibrated mode needs a gamma override; run calibrate()")
        return float(config.gamma_override)
    if config.gamma_override is not None:
        return float(config.gamma_override)
    if delta_gamma is None:
        delta_gamma = config.eps ** 2 * config.delta / (64.0 * rho2(config) ** 2)
    arg = N * (config.n + 1) ** config.d / delta_gamma
    if arg <= 1.0:
        raise ConfigError("non-positive log in gamma_radius; increase N or shrink delta_gamma")
    return (config.c0 * log(arg)) ** (config.d / 2.0)


def beta_prime(tau, d, rho, c0=2.0):
    """Tail-mass diagnostic used only for reporting theory-mode slack."""
    if not (0 < tau < 1):
        raise ConfigError("tau must lie in (0,1)")
    return 2.0 * rho * (c0 * log(1.0 / tau) + c0 * d / 2.0) ** (d / 2.0) * tau


def _features_chunked(X, basis):
    N = X.shape[0]
    out = np.empty((N, len(basis)), dtype=float)

    def fill(c, a, b):
        out[a:b] = eval_features(basis, X[a:b])
        return None

    rngmod.map_chunks(fill, N)
    return out


def prune(samples, gamma, d):
    """Keep exactly the samples with sup-norm feature value <= gamma."""
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    basis = enumerate_basis(samples.n, d)
    N = len(samples)
    sup = np.empty(N)

    def fill(c, a, b):
        sup[a:b] = np.abs(eval_features(basis, samples.X[a:b])).max(axis=1)
        return None

    rngmod.map_chunks(fill, N)
    keep = np.nonzero(sup <= gamma)[0]
    if keep.size == 0:
        raise AllSamplesPruned(f"no sample has sup-norm feature <= {gamma}")
    return samples.subset(keep)


def empirical_chow(samples, d):
    """(1/N) * sum of y * m(x) over the set."""
    if len(samples) == 0:
        raise ConfigError("empirical Chow vector of an empty set")
    basis = enumerate_basis(samples.n, d)
    yf = samples.y.astype(float)

    def part(c, a, b):
        return eval_features(basis, samples.X[a:b]).T @ yf[a:b]

    parts = rngmod.map_chunks(part, len(samples))
    return rngmod.sum_chunks(parts) / len(samples)


@dataclass
class RestrictedMatrix:
    """Symmetric sparse view (Sigma - I)_U, stored by its upper triangle.

    Entries are kept in lexicographic (i, j) order with i <= j; symmetric
    partners are implicit, so norms count off-diagonal entries twice.
    """

    ii: np.ndarray
    jj: np.ndarray
    vals: np.ndarray
    m_dim: int

    def __post_init__(self):
        self.ii = np.asarray(self.ii, dtype=np.int64)
        self.jj = np.asarray(self.jj, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=float)
        if not (self.ii.shape == self.jj.shape == self.vals.shape):
            raise ConfigError("ii, jj, vals must have equal length")
        if np.any(self.ii > self.jj):
            raise ConfigError("entries must be upper-triangular (i <= j)")

    @property
    def diag_mask(self):
        return self.ii == self.jj

    def sym_size(self):
        """Number of entries of the full symmetric index set U."""
        off = int(np.count_nonzero(~self.diag_mask))
        return len(self.vals) + off

    def frobenius(self):
        dm = self.diag_mask
        return sqrt(float(np.sum(self.vals[dm] ** 2) + 2.0 * np.sum(self.vals[~dm] ** 2)))

    def normalized(self):
        f = self.frobenius()
        if f == 0.0:
            raise ConfigError("cannot normalize an all-zero restricted matrix")
        return RestrictedMatrix(self.ii, self.jj, self.vals / f, self.m_dim)

    def signature(self):
        return self.ii.tobytes() + self.jj.tobytes()

    def as_dict(self):
        out = {}
        for i, j, v in zip(self.ii, self.jj, self.vals):
            out[(int(i), int(j))] = float(v)
            out[(int(j), int(i))] = float(v)
        return out


def restricted_frobenius(restricted):
    return restricted.frobenius()


def _select_restricted(sigma_minus_i, k):
    """Top-2k diagonal and top-(2k^2 - k) above-diagonal entries by magnitude,
    ties broken by (i, j) order."""
    M = sigma_minus_i.shape[0]
    diag = np.diagonal(sigma_minus_i)
    dsel = np.argsort(-np.abs(diag), kind="stable")[: min(2 * k, M)]
    iu_i, iu_j = np.triu_indices(M, 1)
    off = sigma_minus_i[iu_i, iu_j]
    osel = np.argsort(-np.abs(off), kind="stable")[: min(2 * k * k - k, off.size)]
    ii = np.concatenate([dsel, iu_i[osel]])
    jj = np.concatenate([dsel, iu_j[osel]])
    vals = np.concatenate([diag[dsel], off[osel]])
    order = np.lexsort((jj, ii))
    return RestrictedMatrix(ii[order], jj[order], vals[order], M)


def _gram_chunked(F):
    def part(c, a, b):
        block = F[a:b]
        return block.T @ block

    parts = rngmod.map_chunks(part, F.shape[0])
    return rngmod.sum_chunks(parts)


def _covariance_streaming(samples, basis, k, block=512):
    """Column-block scan for large M: per-block top candidates (boundary ties
    included), then a global re-selection. Memory O(M * block)."""
    M = len(basis)
    N = len(samples)
    n_diag = min(2 * k, M)
    n_off = min(2 * k * k - k, M * (M - 1) // 2)
    diag_all = np.empty(M)
    cand_i, cand_j, cand_v = [], [], []
    for j0 in range(0, M, block):
        j1 = min(j0 + block, M)
        cols = np.arange(j0, j1)

        def part(c, a, b):
            full = eval_features(basis, samples.X[a:b])
            return full.T @ full[:, j0:j1]

        G = rngmod.sum_chunks(rngmod.map_chunks(part, N)) / N
        G[j0:j1, :] -= np.eye(j1 - j0)
        diag_all[j0:j1] = np.diagonal(G, offset=-j0)
        bi, bj = np.nonzero(np.arange(M)[:, None] < cols[None, :])
        v = G[bi, bj]
        if v.size > n_off:
            thresh = np.partition(np.abs(v), v.size - n_off)[v.size - n_off]
            keep = np.abs(v) >= thresh
            bi, bj, v = bi[keep], bj[keep], v[keep]
        cand_i.append(bi)
        cand_j.append(bj + j0)
        cand_v.append(v)
    dsel = np.argsort(-np.abs(diag_all), kind="stable")[:n_diag]
    ci = np.concatenate(cand_i)
    cj = np.concatenate(cand_j)
    cv = np.concatenate(cand_v)
    order = np.lexsort((cj, ci))
    ci, cj, cv = ci[order], cj[order], cv[order]
    osel = np.argsort(-np.abs(cv), kind="stable")[: min(n_off, cv.size)]
    ii = np.concatenate([dsel, ci[osel]])
    jj = np.concatenate([dsel, cj[osel]])
    vals = np.concatenate([diag_all[dsel], cv[osel]])
    final = np.lexsort((jj, ii))
    return RestrictedMatrix(ii[final], jj[final], vals[final], M)


def covariance_restricted(samples, k, d):
    """(Sigma - I) restricted to its largest entries: top 2k diagonal plus
    top 2k^2 - k above-diagonal, symmetrized."""
    if len(samples) == 0:
        raise ConfigError("covariance of an empty set")
    if k < 1:
        raise ConfigError("k must be >= 1")
    basis = enumerate_basis(samples.n, d)
    M = len(basis)
    if M > DENSE_LIMIT:
        return _covariance_streaming(samples, basis, k)
    F = _features_chunked(samples.X, basis)
    sigma = _gram_chunked(F) / len(samples)
    sigma[np.diag_indices(M)] -= 1.0
    return _select_restricted(sigma, k)


def hard_threshold(v, k):
    """Keep the k largest-magnitude coordinates (ties to the lower index)."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    v = np.asarray(v, dtype=float)
    if k >= v.size:
        return v.copy()
    keep = np.argsort(-np.abs(v), kind="stable")[:k]
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


def _pair_columns(F, restricted):
    """q_ij(x) = m_i(x) m_j(x) - [i == j] for every entry of the upper set,
    as an (N, |upper|) array in entry order."""
    cols = np.empty((F.shape[0], len(restricted.vals)))
    for t, (i, j) in enumerate(zip(restricted.ii, restricted.jj)):
        np.multiply(F[:, i], F[:, j], out=cols[:, t])
        if i == j:
            cols[:, t] -= 1.0
    return cols


def _p2_from_features(F, restricted):
    """<A, m m^T - I> for every row of F, accumulated pair by pair in entry
    order (deterministic, no BLAS reduction)."""
    p2 = np.zeros(F.shape[0])
    buf = np.empty(F.shape[0])
    for i, j, v in zip(restricted.ii, restricted.jj, restricted.vals):
        np.multiply(F[:, i], F[:, j], out=buf)
        if i == j:
            buf -= 1.0
            p2 += v * buf
        else:
            p2 += (2.0 * v) * buf
    return p2


def p2_eval(A, x, basis):
    """Filter polynomial at a single point, touching only the components that
    appear in the restricted index set."""
    comps = np.union1d(A.ii, A.jj)
    feats = eval_features(basis, np.asarray(x, dtype=float)[None, :], cols=comps)[0]
    pos = {int(c): t for t, c in enumerate(comps)}
    total = 0.0
    for i, j, v in zip(A.ii, A.jj, A.vals):
        q = feats[pos[int(i)]] * feats[pos[int(j)]]
        if i == j:
            total += v * (q - 1.0)
        else:
            total += 2.0 * v * q
    return float(total)


def _tail_rhs(t, rho2_val, eps, k, gamma, c0, d):
    return 6.0 * np.exp(-((t / rho2_val) ** (1.0 / d)) / c0) + 3.0 * eps / (k * gamma ** 2)


def _select_threshold(absp2, k, gamma, rho2_val, eps, c0, d):
    """Largest candidate t in (0, 4k*gamma^2) meeting the tail condition whose
    removal set {|p2| > t} is non-empty; None means fallback."""
    N = absp2.size
    upper = 4.0 * k * gamma ** 2
    add = 3.0 * eps / (k * gamma ** 2)
    if add >= 1.0:
        return None
    # below t_floor the deviation term alone exceeds any empirical tail
    t_floor = rho2_val * (c0 * log(6.0 / (1.0 - add))) ** d
    live = absp2[(absp2 > max(t_floor, 0.0)) & (absp2 < upper)]
    if live.size == 0:
        return None
    cands = np.unique(live)[::-1]
    sorted_desc = np.sort(absp2)[::-1]
    for t in cands:
        n_ge = np.searchsorted(-sorted_desc, -t, side="right")
        if n_ge / N >= _tail_rhs(t, rho2_val, eps, k, gamma, c0, d):
            if np.any(absp2 > t):
                return float(t)
    return None


@dataclass
class FilterReport:
    found_threshold: float
    fallback: bool
    removed_idx: np.ndarray

    @property
    def n_removed(self):
        return int(self.removed_idx.size)


def sparse_filter(samples, restricted, basis, k, gamma, rho2_val, eps, c0):
    """One filtering step: score with p2 under the normalized restricted
    deviation and drop the tail above the chosen threshold (or the single
    worst sample when no threshold qualifies)."""
    N = len(samples)
    if N == 0:
        raise ConfigError("cannot filter an empty set")
    fro = restricted.frobenius()
    if fro == 0.0:
        report = FilterReport(None, True, np.array([0]))
        keep = np.setdiff1d(np.arange(N), report.removed_idx)
        return samples.subset(keep), report
    A = restricted.normalized()
    comps = np.union1d(A.ii, A.jj)
    pos = {int(c): t for t, c in enumerate(comps)}
    p2 = np.zeros(N)

    def accumulate(c, a, b):
        feats = eval_features(basis, samples.X[a:b], cols=comps)
        local = np.zeros(b - a)
        buf = np.empty(b - a)
        for i, j, v in zip(A.ii, A.jj, A.vals):
            np.multiply(feats[:, pos[int(i)]], feats[:, pos[int(j)]], out=buf)
            if i == j:
                buf -= 1.0
                local += v * buf
            else:
                local += (2.0 * v) * buf
        p2[a:b] = local
        return None

    rngmod.map_chunks(accumulate, N)
    absp2 = np.abs(p2)
    t = _select_threshold(absp2, k, gamma, rho2_val, eps, c0, basis.d)
    if t is None:
        removed = np.array([int(np.argmax(absp2))])
        report = FilterReport(None, True, removed)
    else:
        removed = np.nonzero(absp2 > t)[0]
        report = FilterReport(t, False, removed)
    keep = np.setdiff1d(np.arange(N), removed)
    return samples.subset(keep), report


@dataclass
class PhaseLog:
    phase: int
    n_before: int
    frobenius: float
    kappa: float
    certified: bool
    found_threshold: float
    fallback: bool
    removed: int
    removed_corrupted: int
    removed_clean: int
    n_after: int

    def to_json_dict(self):
        return {
            "phase": self.phase,
            "n_before": self.n_before,
            "frobenius": self.frobenius,
            "kappa": self.kappa,
            "certified": self.certified,
            "found_threshold": self.found_threshold,
            "fallback": self.fallback,
            "removed": self.removed,
            "removed_corrupted": self.removed_corrupted,
            "removed_clean": self.removed_clean,
            "n_after": self.n_after,
        }


@dataclass
class ChowEstimate:
    u: np.ndarray
    k: int
    phases: list
    terminated_by: str
    gamma: float
    kappa: float
    l_max: int
    n_input: int
    n_pruned: int
    pruned_corrupted: int
    pruned_clean: int
    surviving_idx: np.ndarray = field(repr=False)

    def to_json_dict(self):
        nz = np.nonzero(self.u)[0]
        return {
            "u": [{"index": int(i), "value": float(self.u[i])} for i in nz],
            "m_dim": int(self.u.size),
            "k": self.k,
            "phases": [p.to_json_dict() for p in self.phases],
            "terminated_by": self.terminated_by,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "l_max": self.l_max,
            "n_input": self.n_input,
            "n_pruned": self.n_pruned,
            "pruned_corrupted": self.pruned_corrupted,
            "pruned_clean": self.pruned_clean,
        }


class _PhaseEngine:
    """Per-phase state: downdated Gram matrix, alive mask, and p2 values kept
    current through an exact linear recurrence while the restricted index set
    is stable. Rebuilds from cached features whenever the index set changes or
    a phase removed too many samples for the recurrence to pay off."""

    def __init__(self, F):
        self.F = F
        self.N = F.shape[0]
        self.alive = np.ones(self.N, dtype=bool)
        self.n_alive = self.N
        self.G = _gram_chunked(F)
        self.p2 = None
        self.sig = None
        self.pending = None  # rows removed by the previous phase
        self.r_cache = {}

    def restricted(self, k):
        M = self.F.shape[1]
        sigma = self.G / self.n_alive
        sigma[np.diag_indices(M)] -= 1.0
        return _select_restricted(sigma, k)

    def _r_vector(self, restricted, row):
        key = self.F[row].tobytes()
        r = self.r_cache.get(key)
        if r is None:
            f = self.F[row]
            r = np.zeros(self.N)
            buf = np.empty(self.N)
            for i, j in zip(restricted.ii, restricted.jj):
                q_rm = f[i] * f[j] - (1.0 if i == j else 0.0)
                np.multiply(self.F[:, i], self.F[:, j], out=buf)
                if i == j:
                    buf -= 1.0
                    r += q_rm * buf
                else:
                    r += (2.0 * q_rm) * buf
            if len(self.r_cache) >= 4:
                self.r_cache.pop(next(iter(self.r_cache)))
            self.r_cache[key] = r
        return r

    def p2_values(self, restricted):
        sig = restricted.signature()
        if self.p2 is not None and sig == self.sig and self.pending is not None \
                and len(self.pending) <= 2:
            n_old = self.n_alive + len(self.pending)
            correction = np.zeros(self.N)
            for row in self.pending:
                correction += self._r_vector(restricted, row)
            self.p2 = (n_old * self.p2 - correction) / self.n_alive
        else:
            self.p2 = _p2_from_features(self.F, restricted)
            if sig != self.sig:
                self.r_cache.clear()
            self.sig = sig
        self.pending = None
        return self.p2

    def remove(self, rows):
        block = self.F[rows]
        self.G -= block.T @ block
        self.alive[rows] = False
        self.n_alive -= len(rows)
        self.pending = rows

    def masked_chow(self, y):
        w = np.where(self.alive, y.astype(float), 0.0)

        def part(c, a, b):
            return self.F[a:b].T @ w[a:b]

        parts = rngmod.map_chunks(part, self.N)
        return rngmod.sum_chunks(parts) / self.n_alive


def estimate_chow(corrupted, config):
    """Full robust estimation loop on an adversarially corrupted sample."""
    if len(corrupted) == 0:
        raise ConfigError("empty input sample")
    if corrupted.X.shape[1] != config.n:
        raise ConfigError("sample dimension does not match config.n")
    k = config.k
    kappa_val = kappa(config)
    gamma_val = gamma_radius(config, len(corrupted))
    l_max = min(int(ceil(4.0 * config.eta * k * gamma_val ** 2 / config.eps)) + 1,
                len(corrupted))
    basis = enumerate_basis(config.n, config.d)

    sup = np.empty(len(corrupted))

    def fill(c, a, b):
        sup[a:b] = np.abs(eval_features(basis, corrupted.X[a:b])).max(axis=1)
        return None

    rngmod.map_chunks(fill, len(corrupted))
    kept = np.nonzero(sup <= gamma_val)[0]
    if kept.size == 0:
        raise AllSamplesPruned(f"no sample has sup-norm feature <= {gamma_val}")
    pruned = corrupted.subset(kept)
    dropped = corrupted.corrupted[np.setdiff1d(np.arange(len(corrupted)), kept)]
    pruned_corrupted = int(dropped.sum())
    pruned_clean = int(dropped.size - pruned_corrupted)

    if len(basis) > DENSE_LIMIT:
        return _estimate_chow_streaming(pruned, kept, len(corrupted), config, basis, k,
                                        kappa_val, gamma_val, l_max, pruned_corrupted,
                                        pruned_clean)

    F = _features_chunked(pruned.X, basis)
    engine = _PhaseEngine(F)
    mask = pruned.corrupted
    rho2_val = rho2(config)
    phases = []
    terminated_by = "phase_cap"

    for phase in range(1, l_max + 1):
        restricted = engine.restricted(k)
        fro = restricted.frobenius()
        n_before = engine.n_alive
        if fro <= kappa_val:
            phases.append(PhaseLog(phase, n_before, fro, kappa_val, True, None, False,
                                   0, 0, 0, n_before))
            terminated_by = "certified"
            break
        p2 = engine.p2_values(restricted)
        absp2 = np.where(engine.alive, np.abs(p2), -1.0) / fro
        alive_vals = absp2[engine.alive]
        t = _select_threshold(alive_vals, k, gamma_val, rho2_val, config.eps,
                              config.c0, config.d)
        if t is None:
            rows = np.array([int(np.argmax(absp2))])
            fallback = True
        else:
            rows = np.nonzero(engine.alive & (absp2 > t))[0]
            fallback = False
        engine.remove(rows)
        if engine.n_alive == 0:
            raise EstimationError("filtering removed every sample")
        rm_corr = int(mask[rows].sum())
        phases.append(PhaseLog(phase, n_before, fro, kappa_val, False, t, fallback,
                               len(rows), rm_corr, len(rows) - rm_corr, engine.n_alive))

    u = hard_threshold(engine.masked_chow(pruned.y), k)
    return ChowEstimate(u, k, phases, terminated_by, gamma_val, kappa_val, l_max,
                        len(corrupted), len(pruned), pruned_corrupted, pruned_clean,
                        kept[engine.alive])


def _estimate_chow_streaming(pruned, kept, n_input, config, basis, k, kappa_val,
                             gamma_val, l_max, pruned_corrupted, pruned_clean):
    # large-M path: per-phase recomputation via the standalone operations
    current = pruned
    current_idx = kept.copy()  # positions in the input set
    rho2_val = rho2(config)
    phases = []
    terminated_by = "phase_cap"
    for phase in range(1, l_max + 1):
        restricted = covariance_restricted(current, k, config.d)
        fro = restricted.frobenius()
        n_before = len(current)
        if fro <= kappa_val:
            phases.append(PhaseLog(phase, n_before, fro, kappa_val, True, None, False,
                                   0, 0, 0, n_before))
            terminated_by = "certified"
            break
        filtered, report = sparse_filter(current, restricted, basis, k, gamma_val,
                                         rho2_val, config.eps, config.c0)
        rm_corr = int(current.corrupted[report.removed_idx].sum())
        if len(filtered) == 0:
            raise EstimationError("filtering removed every sample")
        keep = np.setdiff1d(np.arange(len(current)), report.removed_idx)
        current_idx = current_idx[keep]
        phases.append(PhaseLog(phase, n_before, fro, kappa_val, False,
                               report.found_threshold, report.fallback,
                               report.n_removed, rm_corr,
                               report.n_removed - rm_corr, len(filtered)))
        current = filtered
    u = hard_threshold(empirical_chow(current, config.d), k)
    return ChowEstimate(u, k, phases, terminated_by, gamma_val, kappa_val, l_max,
                        n_input, len(pruned), pruned_corrupted, pruned_clean,
                        current_idx)


def calibrate(config, N, seed, rounds=20, quantile=0.99):
    """Empirical kappa and gamma at the run's shape, from clean bootstraps.

    kappa is the `quantile` of the restricted Frobenius norm over `rounds`
    fresh clean draws of size N; gamma is 1.2x the largest sup-norm feature
    value seen in any of them.
    """
    if rounds < 2:
        raise ConfigError("need at least 2 calibration rounds")
    basis = enumerate_basis(config.n, config.d)
    k = config.k
    fros = np.empty(rounds)
    sup_max = 0.0
    for r in range(rounds):
        X = rngmod.gaussian_matrix(N, config.n, seed, "calibrate", r)
        F = _features_chunked(X, basis)
        M = len(basis)
        if M > DENSE_LIMIT:
            from .samples import LabeledSampleSet
            ss = LabeledSampleSet(X, np.ones(N, dtype=np.int8), np.zeros(N, dtype=bool))
            restricted = _covariance_streaming(ss, basis, k)
        else:
            sigma = _gram_chunked(F) / N
            sigma[np.diag_indices(M)] -= 1.0
            restricted = _select_restricted(sigma, k)
        fros[r] = restricted.frobenius()
        sup_max = max(sup_max, float(np.abs(F).max()))
    return float(np.quantile(fros, quantile)), 1.2 * sup_max
