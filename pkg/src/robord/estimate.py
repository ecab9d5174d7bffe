"""Cutpoint reparameterisation, starting values and Nelder-Mead fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from robord import links
from robord.links import LinkKind
from robord.model import Dataset, Method, Params, objective, objective_raw

# Simplex restarts from the incumbent after a run stops; Nelder-Mead in
# 5-10 dimensions often collapses early and a fresh simplex recovers.
_MAX_POLISH = 8
_SIMPLEX_STEP = 0.5


class FitError(RuntimeError):
    """Raised when fitting cannot start or produces an invalid result."""


@dataclass(frozen=True)
class UnconstrainedParams:
    """``delta_tilde[0]`` is the first cutpoint; later entries are signed
    square roots of successive cutpoint gaps."""

    beta: np.ndarray
    delta_tilde: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.beta, float), np.asarray(self.delta_tilde, float)])


def _delta_from_tilde(dt: np.ndarray) -> np.ndarray:
    dt = np.asarray(dt, dtype=float)
    out = np.empty_like(dt)
    out[0] = dt[0]
    if dt.size > 1:
        out[1:] = dt[0] + np.cumsum(dt[1:] ** 2)
    return out


def to_constrained(u: UnconstrainedParams) -> Params:
    return Params(np.asarray(u.beta, float), _delta_from_tilde(u.delta_tilde))


def from_constrained(params: Params) -> UnconstrainedParams:
    delta = np.asarray(params.delta, dtype=float)
    gaps = np.diff(delta)
    if np.any(gaps <= 0):
        raise ValueError(f"cutpoints must be strictly increasing, got {delta.tolist()}")
    return UnconstrainedParams(params.beta.copy(), np.concatenate([delta[:1], np.sqrt(gaps)]))


def init_params(data: Dataset, link) -> Params:
    """beta = 0 and cutpoints at link quantiles of cumulative category shares."""
    link = LinkKind.parse(link)
    counts = np.bincount(data.y, minlength=data.n_categories + 1)[1:]
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise FitError(
            f"category {int(empty[0]) + 1} has no observations; "
            "cutpoints are not identified (zero cell)"
        )
    cum = np.cumsum(counts)[:-1] / data.n
    return Params(np.zeros(data.p), links.quantile(link, cum))


@dataclass(frozen=True)
class FitConfig:
    method: Method = field(default_factory=Method.ml)
    link: LinkKind = LinkKind.PROBIT
    max_iters: int = 20000
    obj_tol: float = 1e-10
    n_restarts: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "link", LinkKind.parse(self.link))
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.obj_tol > 0:
            raise ValueError("obj_tol must be positive")
        if self.n_restarts < 0:
            raise ValueError("n_restarts must be >= 0")


@dataclass(frozen=True)
class FitResult:
    params: Params
    objective: float
    converged: bool
    iterations: int
    method: Method
    link: LinkKind
    n_evals: int = 0
    history: tuple = ()
    start_objectives: tuple = ()


def _run_simplex(fun, z0, max_iters, obj_tol):
    """Nelder-Mead with polishing restarts.

    Returns ``(z, f, converged, iterations, evaluations, history)`` where
    ``history`` is the best objective seen after each simplex iteration.
    """
    z = np.asarray(z0, dtype=float)
    fz = fun(z)
    best_seen = [fz]
    history = [fz]
    iters = evals = 0
    converged = False
    dim = z.size

    def tracked(x):
        val = fun(x)
        if val < best_seen[0]:
            best_seen[0] = val
        return val

    def record(_xk):
        history.append(best_seen[0])

    for _ in range(_MAX_POLISH):
        budget = max_iters - iters
        if budget <= 0:
            break
        simplex = np.vstack([z, z + _SIMPLEX_STEP * np.eye(dim)])
        res = optimize.minimize(
            tracked,
            z,
            method="Nelder-Mead",
            callback=record,
            options={
                "maxiter": budget,
                "maxfev": 50 * budget,
                "xatol": np.inf,
                "fatol": obj_tol,
                "initial_simplex": simplex,
                "adaptive": dim > 4,
            },
        )
        iters += int(res.nit)
        evals += int(res.nfev)
        improved = fz - float(res.fun)
        if float(res.fun) <= fz:
            z, fz = np.asarray(res.x, dtype=float), float(res.fun)
        converged = res.status == 0
        if not converged or improved <= obj_tol:
            break
    return z, fz, converged, iters, evals, history


def fit(data: Dataset, cfg: FitConfig | None = None) -> FitResult:
    """Minimise the configured objective over the unconstrained cutpoint scale."""
    cfg = cfg or FitConfig()
    start = init_params(data, cfg.link)
    p = data.p
    X, y, link, method = data.X, data.y, cfg.link, cfg.method

    def fun(z):
        delta = _delta_from_tilde(z[p:])
        val = objective_raw(method, z[:p], delta, link, X, y)
        return val if math.isfinite(val) else math.inf

    z0 = from_constrained(start).to_vector()
    if not math.isfinite(fun(z0)):
        raise FitError(f"objective is not finite at the starting values ({method.label}, {link.value})")

    rng = np.random.default_rng(cfg.seed)
    starts = [z0] + [z0 + rng.uniform(-0.5, 0.5, size=z0.size) for _ in range(cfg.n_restarts)]
    best = None
    start_values = []
    for s in starts:
        run = _run_simplex(fun, s, cfg.max_iters, cfg.obj_tol)
        start_values.append(run[1])
        if best is None or run[1] < best[1]:
            best = run
    z, fz, converged, iters, evals, history = best
    beta = z[:p].copy()
    delta = _delta_from_tilde(z[p:])
    try:
        params = Params(beta, delta)
    except ValueError as exc:
        raise FitError(f"fit ended on tied cutpoints: {exc}") from exc
    obj = objective(method, params, link, data)
    return FitResult(
        params=params,
        objective=obj,
        converged=bool(converged),
        iterations=iters,
        method=method,
        link=link,
        n_evals=evals,
        history=tuple(history),
        start_objectives=tuple(start_values),
    )
