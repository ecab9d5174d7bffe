"""Psi-functions, sandwich covariance, Wald tests and influence diagnostics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from robord import links
from robord.estimate import FitResult
from robord.links import LinkKind
from robord.model import Dataset, Method, Params, score_tensor

_MAX_CONDITION = 1e12


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


def psi_matrix(method: Method, beta, delta, link, X, y) -> np.ndarray:
    """Rows are psi(y_i | x_i; theta) for the given method, shape (n, p + M - 1)."""
    link = LinkKind.parse(link)
    logp, S = score_tensor(beta, delta, link, X)
    idx = np.arange(logp.shape[0])
    yi = np.asarray(y, dtype=int) - 1
    s_obs = S[idx, yi]
    if method.kind == "ml":
        return s_obs
    t = method.tuning
    w_all = np.exp((1.0 + t) * logp)  # f_m^(1+t)
    B = np.einsum("im,imd->id", w_all, S)  # E_{y|x}[f^t s]
    w_obs = np.exp(t * logp[idx, yi])[:, None]  # f_y^t
    if method.kind == "dp":
        return w_obs * s_obs - B
    A = w_all.sum(axis=1)[:, None]  # E_{y|x}[f^t]
    return w_obs * (s_obs * A - B)


def psi(method: Method, params: Params, link, x, y: int) -> np.ndarray:
    """Estimating function of ``method`` at a single observation (beta block first)."""
    M = params.n_categories
    if not (1 <= int(y) <= M):
        raise ValueError(f"category {y} outside 1..{M}")
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    return psi_matrix(method, params.beta, params.delta, link, x, [int(y)])[0]


def mean_psi(method: Method, params: Params, link, data: Dataset) -> np.ndarray:
    return psi_matrix(method, params.beta, params.delta, link, data.X, data.y).mean(axis=0)


# ---------------------------------------------------------------------------
# sandwich


@dataclass(frozen=True)
class SandwichCov:
    M_hat: np.ndarray
    Q_hat: np.ndarray
    V_hat: np.ndarray
    n: int
    names: tuple
    info_equality_gap: float | None = None

    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.V_hat) / self.n)


def psi_jacobian(method: Method, params: Params, link, data: Dataset, fd_step: float = 1e-5) -> np.ndarray:
    """d mean(psi) / d theta by central differences; column j is the j-th partial."""
    theta = params.to_vector()
    p = params.p
    d = theta.size
    J = np.empty((d, d))
    for j in range(d):
        h = fd_step * max(1.0, abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        f_up = psi_matrix(method, up[:p], up[p:], link, data.X, data.y).mean(axis=0)
        f_dn = psi_matrix(method, dn[:p], dn[p:], link, data.X, data.y).mean(axis=0)
        J[:, j] = (f_up - f_dn) / (2.0 * h)
    return J


def sandwich(method: Method, fit: FitResult, data: Dataset, fd_step: float = 1e-5) -> SandwichCov:
    """M^-1 Q M^-T with M = -mean Jacobian of psi and Q = mean psi psi'."""
    if not fit.converged:
        raise ValueError("sandwich covariance requires a converged fit")
    params = fit.params
    d = params.dim
    if data.n <= d:
        raise ValueError(f"need n > {d} observations for {d} parameters, got n={data.n}")
    link = fit.link
    M_hat = -psi_jacobian(method, params, link, data, fd_step)
    Psi = psi_matrix(method, params.beta, params.delta, link, data.X, data.y)
    Q_hat = Psi.T @ Psi / data.n
    cond = np.linalg.cond(M_hat)
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise SingularCovarianceError(
            f"M-hat is numerically singular (condition number {cond:.3g}); "
            "use more data or a smaller model"
        )
    M_inv = np.linalg.inv(M_hat)
    V_hat = M_inv @ Q_hat @ M_inv.T
    gap = float(np.max(np.abs(M_hat - Q_hat))) if method.kind == "ml" else None
    return SandwichCov(M_hat, Q_hat, V_hat, data.n, tuple(params.names()), gap)


@dataclass(frozen=True)
class WaldRow:
    name: str
    estimate: float
    std_error: float
    z: float
    p_value: float


@dataclass(frozen=True)
class WaldResult:
    rows: tuple

    def as_dicts(self) -> list[dict]:
        return [r.__dict__.copy() for r in self.rows]


def two_sided_p(z: float) -> float:
    return min(1.0, 2.0 * links.sf(LinkKind.PROBIT, abs(z)))


def wald(fit: FitResult, cov: SandwichCov, data: Dataset) -> WaldResult:
    """z = beta_k / sqrt(sigma_k^2 / n) for H0: beta_k = 0, one row per coefficient."""
    beta = fit.params.beta
    rows = []
    for k, name in enumerate(data.feature_names):
        se = math.sqrt(max(cov.V_hat[k, k], 0.0) / cov.n)
        if se == 0.0 or not math.isfinite(se):
            raise ValueError(f"standard error of {name} is {se}; Wald statistic undefined")
        z = float(beta[k]) / se
        rows.append(WaldRow(name, float(beta[k]), se, z, two_sided_p(z)))
    return WaldResult(tuple(rows))


# ---------------------------------------------------------------------------
# influence profiles


@dataclass(frozen=True)
class InfluenceProfile:
    grid: np.ndarray
    values: np.ndarray  # (len(grid), p + M - 1)
    names: tuple
    method: Method
    link: LinkKind
    y: int
    params: Params
    covariate: int = 0

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def rows(self):
        for i, x in enumerate(self.grid):
            for j, name in enumerate(self.names):
                yield float(x), name, self.method.label, float(self.values[i, j])

    def to_csv(self, fh=None) -> str | None:
        own = fh is None
        fh = fh or io.StringIO()
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "parameter", "method", "psi"])
        for x, name, label, value in self.rows():
            writer.writerow([repr(x), name, label, repr(value)])
        return fh.getvalue() if own else None


def influence_profile(
    method: Method, params: Params, link, y: int, grid, k: int = 0
) -> InfluenceProfile:
    """Evaluate psi along ``grid`` in covariate ``k`` with the other covariates at 0."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or not np.all(np.isfinite(grid)):
        raise ValueError("grid must be a finite vector")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if not (0 <= k < params.p):
        raise ValueError(f"covariate index {k} outside 0..{params.p - 1}")
    X = np.zeros((grid.size, params.p))
    X[:, k] = grid
    ys = np.full(grid.size, int(y))
    values = psi_matrix(method, params.beta, params.delta, link, X, ys)
    return InfluenceProfile(
        grid, values, tuple(params.names()), method, LinkKind.parse(link), int(y), params, k
    )


def figure1_params() -> Params:
    """One covariate with beta = 1 and four categories cut at (-1.5, 0.5, 1.5)."""
    return Params([1.0], [-1.5, 0.5, 1.5])


# ---------------------------------------------------------------------------
# tail-condition probe

_SLOPE_TOL = 0.05


def tail_quantities(link, alpha: float, u) -> dict:
    """g(u)^alpha * u, |d log g / du| and |u d log g / du| at the points ``u``."""
    link = LinkKind.parse(link)
    u = np.asarray(u, dtype=float)
    h = 1e-5 * np.maximum(1.0, np.abs(u))
    with np.errstate(over="ignore", invalid="ignore"):
        dlog = (links.logpdf(link, u + h) - links.logpdf(link, u - h)) / (2.0 * h)
        dlog = np.where(np.isfinite(dlog), dlog, links.dlogpdf(link, u))
        g_alpha_u = np.exp(alpha * links.logpdf(link, u)) * u
    return {
        "g_alpha_u": g_alpha_u,
        "abs_dlog_g": np.abs(dlog),
        "abs_u_dlog_g": np.abs(u * dlog),
    }


def classify_tail(u_abs, values) -> str:
    """'vanishing', 'bounded' or 'diverging' from the log-log slope over the last quarter."""
    v = np.abs(np.asarray(values, dtype=float))
    if v[-1] == 0.0 or v[-1] < 1e-300:
        return "vanishing"
    q = int(0.75 * (len(v) - 1))
    if v[q] == 0.0:
        return "diverging"
    slope = (math.log(v[-1]) - math.log(v[q])) / (math.log(u_abs[-1]) - math.log(u_abs[q]))
    if slope < -_SLOPE_TOL:
        return "vanishing"
    if slope > _SLOPE_TOL:
        return "diverging"
    return "bounded"


@dataclass(frozen=True)
class ProbeReport:
    link: LinkKind
    alpha: float
    grid: np.ndarray  # positive magnitudes; both tails are evaluated
    values: dict  # (tail, quantity) -> array over grid
    classes: dict  # (tail, quantity) -> class label
    ml_beta_bounded: bool
    ml_delta_bounded: bool
    redescendent: bool

    def to_dict(self) -> dict:
        return {
            "link": self.link.value,
            "alpha": self.alpha,
            "ml_beta_bounded": self.ml_beta_bounded,
            "ml_delta_bounded": self.ml_delta_bounded,
            "divergence_redescendent": self.redescendent,
            "tails": {
                tail: {
                    q: {
                        "class": self.classes[(tail, q)],
                        "u": [float(s * u) for u in self.grid],
                        "value": [float(v) for v in self.values[(tail, q)]],
                    }
                    for q in ("g_alpha_u", "abs_dlog_g", "abs_u_dlog_g")
                }
                for tail, s in (("+", 1.0), ("-", -1.0))
            },
        }


def condition_probe(link, alpha: float, u_max: float = 50.0, n_points: int = 200) -> ProbeReport:
    """Classify a link against the boundedness and redescendence tail conditions."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not u_max > 1.0:
        raise ValueError("u_max must exceed 1")
    link = LinkKind.parse(link)
    grid = np.geomspace(1.0, u_max, n_points)
    values, classes = {}, {}
    for tail, sign in (("+", 1.0), ("-", -1.0)):
        q = tail_quantities(link, alpha, sign * grid)
        for name, arr in q.items():
            values[(tail, name)] = arr
            classes[(tail, name)] = classify_tail(grid, arr)

    def finite_limit(name):
        return all(classes[(t, name)] != "diverging" for t in "+-")

    return ProbeReport(
        link=link,
        alpha=float(alpha),
        grid=grid,
        values=values,
        classes=classes,
        ml_beta_bounded=finite_limit("abs_u_dlog_g"),
        ml_delta_bounded=finite_limit("abs_dlog_g"),
        redescendent=all(classes[(t, "g_alpha_u")] == "vanishing" for t in "+-"),
    )
