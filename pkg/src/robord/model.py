"""Category probabilities, estimation objectives and score functions.

Probabilities are carried as log-probabilities throughout. Row sums use
``math.fsum`` so every objective is exactly invariant to row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from robord import links
from robord.links import LinkKind

# Log-probabilities are floored here before logs, powers and ratios. Tail
# probabilities are exact in log space, so the floor only binds for tied
# cutpoints or |delta - x'beta| in the hundreds; a floor like 1e-12 would cap
# an outlier's log-likelihood loss and hide the decay of p**alpha.
LOG_PROB_FLOOR = -1.0e5


@dataclass(frozen=True)
class Params:
    """Regression coefficients ``beta`` and interior cutpoints ``delta``."""

    beta: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        delta = np.atleast_1d(np.asarray(self.delta, dtype=float)).copy()
        if beta.ndim != 1 or delta.ndim != 1:
            raise ValueError("beta and delta must be vectors")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(delta))):
            raise ValueError("parameters must be finite")
        if delta.size < 1:
            raise ValueError("need at least one cutpoint (M >= 2)")
        if np.any(np.diff(delta) <= 0):
            raise ValueError(f"cutpoints must be strictly increasing, got {delta.tolist()}")
        beta.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta)

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def n_categories(self) -> int:
        return self.delta.size + 1

    @property
    def dim(self) -> int:
        return self.beta.size + self.delta.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.beta, self.delta])

    @classmethod
    def from_vector(cls, theta, p: int) -> "Params":
        theta = np.asarray(theta, dtype=float)
        return cls(theta[:p], theta[p:])

    def names(self) -> list[str]:
        return param_names(self.p, self.n_categories)


def param_names(p: int, n_categories: int) -> list[str]:
    return [f"beta{k + 1}" for k in range(p)] + [f"delta{l + 1}" for l in range(n_categories - 1)]


@dataclass(frozen=True)
class Dataset:
    """Ordinal responses ``y`` in 1..M and covariates ``X`` (no intercept column)."""

    y: np.ndarray
    X: np.ndarray
    n_categories: int
    feature_names: tuple = field(default=())

    def __post_init__(self):
        y = np.asarray(self.y)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2:
            raise ValueError("y must be a vector and X a matrix")
        if y.size < 1 or X.shape[1] < 1:
            raise ValueError("need n >= 1 rows and p >= 1 covariates")
        if X.shape[0] != y.size:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.size}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite values")
        M = int(self.n_categories)
        if M < 2:
            raise ValueError("need at least 2 categories")
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValueError("y must be integer valued")
        y = y.astype(np.int64)
        if y.min() < 1 or y.max() > M:
            raise ValueError(f"y values must lie in 1..{M}")
        y.setflags(write=False)
        X = X.copy()
        X.setflags(write=False)
        names = tuple(self.feature_names) or tuple(f"x{k + 1}" for k in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length does not match X")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "n_categories", M)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.y[rows], self.X[rows], self.n_categories, self.feature_names)


@dataclass(frozen=True)
class Method:
    """Estimation method: ``ml``, ``dp`` (tuning alpha) or ``gamma`` (tuning gamma)."""

    kind: str = "ml"
    tuning: float | None = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in ("ml", "dp", "gamma"):
            raise ValueError(f"unknown method {self.kind!r}")
        tuning = self.tuning
        if kind == "ml":
            tuning = None
        else:
            if tuning is None or not (0.0 < float(tuning) <= 1.0):
                raise ValueError(f"{kind} tuning must lie in (0, 1], got {tuning!r}")
            tuning = float(tuning)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "tuning", tuning)

    @classmethod
    def ml(cls) -> "Method":
        return cls("ml")

    @classmethod
    def dp(cls, alpha: float) -> "Method":
        return cls("dp", alpha)

    @classmethod
    def gamma(cls, gamma: float) -> "Method":
        return cls("gamma", gamma)

    @property
    def label(self) -> str:
        if self.kind == "ml":
            return "ML"
        name = "DP" if self.kind == "dp" else "gamma"
        return f"{name}({self.tuning:g})"


# ---------------------------------------------------------------------------
# vectorised kernels on raw arrays


def _cut_args(beta, delta, X):
    """u[i, l] = delta_l - x_i'beta for l = 0..M with delta_0 = -inf, delta_M = +inf."""
    eta = np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)
    cuts = np.concatenate(([-np.inf], np.asarray(delta, dtype=float), [np.inf]))
    return cuts[None, :] - eta[:, None]


def _log_interval_prob(link: LinkKind, a, b):
    """log(G(b) - G(a)) elementwise, using the upper tail when a > 0."""
    upper = a > 0
    with np.errstate(invalid="ignore"):
        lsa = links.logsf(link, a)
        lsb = links.logsf(link, b)
        lca = links.logcdf(link, a)
        lcb = links.logcdf(link, b)
        via_sf = lsa + links.log1mexp(np.minimum(lsb - lsa, 0.0))
        via_cdf = lcb + links.log1mexp(np.minimum(lca - lcb, 0.0))
    out = np.where(upper, via_sf, via_cdf)
    # a == b (tied cutpoints) gives exp(0) - 1 = 0 -> -inf; nan from inf - inf too
    out = np.where(np.isnan(out), -np.inf, out)
    return np.maximum(out, LOG_PROB_FLOOR)


def _log_probs_from_interior(link: LinkKind, v):
    """Log category probabilities from interior arguments v[i, l] = delta_{l+1} - x_i'beta.

    Same result as ``_log_interval_prob`` on the sentinel-padded arguments, but
    the link is only evaluated at finite points, once per cutpoint.
    """
    n = v.shape[0]
    lc = links._logcdf_raw(link, v)
    ls = links._logsf_raw(link, v)
    zeros = np.zeros((n, 1))
    ninf = np.full((n, 1), -np.inf)
    lc_all = np.hstack([ninf, lc, zeros])  # log G at delta_0..delta_M
    ls_all = np.hstack([zeros, ls, ninf])  # log (1 - G)
    lca, lcb = lc_all[:, :-1], lc_all[:, 1:]
    lsa, lsb = ls_all[:, :-1], ls_all[:, 1:]
    with np.errstate(invalid="ignore"):
        via_sf = lsa + links.log1mexp(np.minimum(lsb - lsa, 0.0))
        via_cdf = lcb + links.log1mexp(np.minimum(lca - lcb, 0.0))
    upper = np.hstack([np.zeros((n, 1), dtype=bool), v > 0])
    out = np.where(upper, via_sf, via_cdf)
    out = np.where(np.isnan(out), -np.inf, out)
    return np.maximum(out, LOG_PROB_FLOOR)


def log_prob_matrix(beta, delta, link: LinkKind, X) -> np.ndarray:
    """(n, M) matrix of floored log category probabilities."""
    eta = np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)
    v = np.asarray(delta, dtype=float)[None, :] - eta[:, None]
    return _log_probs_from_interior(link, v)


def score_tensor(beta, delta, link: LinkKind, X):
    """Scores for every possible response.

    Returns ``(logp, S)`` where ``logp`` is (n, M) and ``S[i, m]`` is the
    (p + M - 1)-vector d log f(m + 1 | x_i) / d theta.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    u = _cut_args(beta, delta, X)
    M = u.shape[1] - 1
    logp = _log_probs_from_interior(link, u[:, 1:-1])
    logg = links.logpdf(link, u)  # (n, M+1); -inf at sentinels
    # ratio[i, m, l] = g(u[i, l]) / p[i, m]
    ratio_hi = np.exp(logg[:, 1:] - logp)  # g(b_m) / p_m
    ratio_lo = np.exp(logg[:, :-1] - logp)  # g(a_m) / p_m
    S = np.zeros((n, M, p + M - 1))
    S[:, :, :p] = -(ratio_hi - ratio_lo)[:, :, None] * X[:, None, :]
    for m in range(M):
        if m < M - 1:
            S[:, m, p + m] += ratio_hi[:, m]  # l = m+1 (1-indexed) matches y = l
        if m > 0:
            S[:, m, p + m - 1] -= ratio_lo[:, m]  # l = m matches y = l + 1
    return logp, S


def _observed(mat, y):
    return mat[np.arange(mat.shape[0]), np.asarray(y) - 1]


def _logmeanexp(v) -> float:
    v = np.asarray(v, dtype=float).ravel()
    top = float(np.max(v))
    if not np.isfinite(top):
        return top
    return math.log(math.fsum(np.exp(v - top).tolist())) + top - math.log(v.size)


def _check_tuning(name: str, value: float):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def nll_raw(beta, delta, link, X, y) -> float:
    logp = log_prob_matrix(beta, delta, link, X)
    return -math.fsum(_observed(logp, y).tolist())


def dp_raw(beta, delta, link, X, y, alpha: float) -> float:
    logp = log_prob_matrix(beta, delta, link, X)
    n = logp.shape[0]
    first = math.fsum(np.exp(alpha * _observed(logp, y)).tolist()) / n
    second = math.fsum(np.exp((1.0 + alpha) * logp).ravel().tolist()) / n
    return -first / alpha + second / (1.0 + alpha)


def gamma_raw(beta, delta, link, X, y, gamma: float) -> float:
    logp = log_prob_matrix(beta, delta, link, X)
    first = _logmeanexp(gamma * _observed(logp, y))
    # the per-row mean over categories is folded into the global log-mean-exp
    second = _logmeanexp((1.0 + gamma) * logp) + math.log(logp.shape[1])
    return -first / gamma + second / (1.0 + gamma)


# ---------------------------------------------------------------------------
# public API


def category_prob(params: Params, link, x, m: int) -> float:
    """P(y = m | x; theta) = G(delta_m - x'beta) - G(delta_{m-1} - x'beta)."""
    link = LinkKind.parse(link)
    M = params.n_categories
    if not (1 <= int(m) <= M):
        raise ValueError(f"category {m} outside 1..{M}")
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    logp = log_prob_matrix(params.beta, params.delta, link, x)
    return float(np.exp(logp[0, int(m) - 1]))


def category_probs(params: Params, link, X) -> np.ndarray:
    """(n, M) matrix of category probabilities for each row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.exp(log_prob_matrix(params.beta, params.delta, LinkKind.parse(link), X))


def _check_shapes(params: Params, data: Dataset):
    if params.p != data.p:
        raise ValueError(f"params have p={params.p} but data has p={data.p}")
    if params.n_categories != data.n_categories:
        raise ValueError(f"params have M={params.n_categories} but data has M={data.n_categories}")


def neg_log_lik(params: Params, link, data: Dataset) -> float:
    _check_shapes(params, data)
    return nll_raw(params.beta, params.delta, LinkKind.parse(link), data.X, data.y)


def dp_objective(params: Params, link, data: Dataset, alpha: float) -> float:
    """Empirical density-power cross entropy with tuning ``alpha``."""
    _check_tuning("alpha", alpha)
    _check_shapes(params, data)
    return dp_raw(params.beta, params.delta, LinkKind.parse(link), data.X, data.y, float(alpha))


def gamma_objective(params: Params, link, data: Dataset, gamma: float) -> float:
    """Empirical gamma cross entropy with tuning ``gamma``."""
    _check_tuning("gamma", gamma)
    _check_shapes(params, data)
    return gamma_raw(params.beta, params.delta, LinkKind.parse(link), data.X, data.y, float(gamma))


def objective(method: Method, params: Params, link, data: Dataset) -> float:
    if method.kind == "ml":
        return neg_log_lik(params, link, data)
    if method.kind == "dp":
        return dp_objective(params, link, data, method.tuning)
    return gamma_objective(params, link, data, method.tuning)


def objective_raw(method: Method, beta, delta, link, X, y) -> float:
    if method.kind == "ml":
        return nll_raw(beta, delta, link, X, y)
    if method.kind == "dp":
        return dp_raw(beta, delta, link, X, y, method.tuning)
    return gamma_raw(beta, delta, link, X, y, method.tuning)


def score(params: Params, link, x, y: int) -> np.ndarray:
    """Gradient of log f(y | x; theta), beta block first then delta block."""
    M = params.n_categories
    if not (1 <= int(y) <= M):
        raise ValueError(f"category {y} outside 1..{M}")
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    _, S = score_tensor(params.beta, params.delta, LinkKind.parse(link), x)
    return S[0, int(y) - 1].copy()
