"""Contamination simulation study: data generation, replication loop, Bias/MSE/CCR."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from robord.estimate import FitConfig, FitError, fit
from robord.links import LinkKind
from robord.model import Dataset, Method, Params, category_probs, param_names

log = logging.getLogger(__name__)

ERROR_LINK = {"normal": LinkKind.PROBIT, "logistic": LinkKind.LOGIT, "gumbel": LinkKind.LOGLOG}

# True values of the three-covariate design, one set of cutpoints per error law.
TRUE_BETA = (2.5, 1.2, 0.7)
TRUE_DELTA = {
    "normal": (-3.0, -0.7, 1.6, 3.9),
    "logistic": (-3.3, -0.8, 1.7, 4.2),
    "gumbel": (-2.9, 1.0, 2.9, 4.8),
}

_MAX_FAILURE_RATE = 0.05
FEATURES = ("x", "d", "x:d")

# stream roles within a replication
_DATA, _CONTAMINATION = 0, 1


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimScenario:
    error_dist: str = "normal"
    link: LinkKind | None = None
    n: int = 200
    true_beta: tuple = TRUE_BETA
    true_delta: tuple | None = None
    outlier_frac: float = 0.0
    outlier_mean: float = 20.0
    outlier_sd: float = 1.0
    S: int = 100
    seed: int = 0
    d_prob: float = 0.25

    def __post_init__(self):
        dist = self.error_dist.lower()
        if dist not in ERROR_LINK:
            raise ValueError(f"unknown error distribution {self.error_dist!r}")
        object.__setattr__(self, "error_dist", dist)
        link = ERROR_LINK[dist] if self.link is None else LinkKind.parse(self.link)
        object.__setattr__(self, "link", link)
        delta = TRUE_DELTA[dist] if self.true_delta is None else self.true_delta
        delta = tuple(float(v) for v in delta)
        if any(b <= a for a, b in zip(delta, delta[1:])):
            raise ValueError("true_delta must be strictly increasing")
        object.__setattr__(self, "true_delta", delta)
        object.__setattr__(self, "true_beta", tuple(float(v) for v in self.true_beta))
        if len(self.true_beta) != 3:
            raise ValueError("the simulation design has exactly three coefficients")
        if not (0.0 <= self.outlier_frac < 1.0):
            raise ValueError("outlier_frac must lie in [0, 1)")
        if self.n < 1 or self.S < 1:
            raise ValueError("n and S must be positive")

    @property
    def n_categories(self) -> int:
        return len(self.true_delta) + 1

    @property
    def truth(self) -> np.ndarray:
        return np.array(self.true_beta + self.true_delta)

    @property
    def n_outliers(self) -> int:
        return n_contaminated(self.outlier_frac, self.n)


def n_contaminated(frac: float, n: int) -> int:
    # round half up
    return int(math.floor(frac * n + 0.5))


def stream(seed: int, replication: int, role: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replication), int(role)]))


def draw_errors(dist: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if dist == "normal":
        return rng.standard_normal(size)
    if dist == "logistic":
        return rng.logistic(0.0, 1.0, size)
    # Gumbel (maximum) with CDF exp(-exp(-u)), the log-log link's error law
    return rng.gumbel(0.0, 1.0, size)


def bin_latent(z, delta) -> np.ndarray:
    """Category m such that delta_{m-1} < z <= delta_m (1-based)."""
    return np.searchsorted(np.asarray(delta, dtype=float), np.asarray(z, dtype=float), side="left") + 1


def design_matrix(x, d) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    return np.column_stack([x, d, x * d])


def _draw(scn: SimScenario, rng) -> Dataset:
    x = rng.standard_normal(scn.n)
    d = (rng.random(scn.n) < scn.d_prob).astype(float)
    X = design_matrix(x, d)
    z = X @ np.asarray(scn.true_beta) + draw_errors(scn.error_dist, scn.n, rng)
    return Dataset(bin_latent(z, scn.true_delta), X, scn.n_categories, FEATURES)


def gen_dataset(scn: SimScenario, rng: np.random.Generator) -> tuple[Dataset, Dataset]:
    """A training draw and an independent outlier-free validation draw of equal size."""
    return _draw(scn, rng), _draw(scn, rng)


def contaminate(data: Dataset, frac: float, mean: float, sd: float, rng: np.random.Generator,
                return_rows: bool = False):
    """Replace ``x`` (column 0) in round(frac * n) random rows by N(mean, sd^2) draws.

    The interaction column ``x:d`` is recomputed; ``y`` and ``d`` are untouched.
    """
    if not (0.0 <= frac < 1.0):
        raise ValueError("frac must lie in [0, 1)")
    k = n_contaminated(frac, data.n)
    X = np.array(data.X)
    rows = np.sort(rng.choice(data.n, size=k, replace=False)) if k else np.array([], dtype=int)
    if k:
        X[rows, 0] = mean + sd * rng.standard_normal(k)
        X[rows, 2] = X[rows, 0] * X[rows, 1]
    out = Dataset(data.y, X, data.n_categories, data.feature_names)
    return (out, rows) if return_rows else out


def predict_modal(params: Params, link, x) -> int | np.ndarray:
    """Most probable category; ties go to the smaller index (np.argmax keeps the first)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    probs = category_probs(params, link, np.atleast_2d(x))
    pred = np.argmax(probs, axis=1) + 1
    return int(pred[0]) if single else pred


@dataclass(frozen=True)
class SimMetrics:
    label: str
    method: Method
    link: LinkKind
    names: tuple
    bias: np.ndarray
    mse: np.ndarray
    ccr: float
    n_ok: int
    n_failed: int
    estimates: np.ndarray = field(repr=False, default=None)

    @property
    def abs_bias(self) -> np.ndarray:
        # the published tables report bias magnitudes
        return np.abs(self.bias)

    def get(self, name: str) -> tuple[float, float]:
        j = self.names.index(name)
        return float(self.bias[j]), float(self.mse[j])


@dataclass(frozen=True)
class StudyResult:
    scenario: SimScenario
    metrics: tuple

    def by_label(self, label: str) -> SimMetrics:
        for m in self.metrics:
            if m.label == label:
                return m
        raise KeyError(label)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "tuning", "link", "parameter", "bias", "mse", "ccr"])
        for m in self.metrics:
            tuning = "" if m.method.tuning is None else f"{m.method.tuning:g}"
            for j, name in enumerate(m.names):
                writer.writerow([m.method.kind, tuning, m.link.value, name,
                                 f"{m.bias[j]:.6f}", f"{m.mse[j]:.6f}", ""])
            writer.writerow([m.method.kind, tuning, m.link.value, "CCR", "", "", f"{m.ccr:.6f}"])


def method_label(method: Method, cfg: FitConfig, scn_link: LinkKind) -> str:
    if cfg.link is scn_link:
        return method.label
    return f"{method.label}+{cfg.link.value}"


def replicate(scn: SimScenario, methods, s: int):
    """One replication: returns per method either (theta_hat, ccr) or an error string."""
    rng = stream(scn.seed, s, _DATA)
    data, valid = gen_dataset(scn, rng)
    if scn.outlier_frac > 0:
        data = contaminate(data, scn.outlier_frac, scn.outlier_mean, scn.outlier_sd,
                           stream(scn.seed, s, _CONTAMINATION))
    out = []
    for method, cfg in methods:
        cfg = replace(cfg, method=method)
        try:
            res = fit(data, cfg)
        except (FitError, ValueError, FloatingPointError) as exc:
            out.append(f"{type(exc).__name__}: {exc}")
            continue
        if not res.converged:
            out.append("not converged")
            continue
        pred = predict_modal(res.params, cfg.link, valid.X)
        out.append((res.params.to_vector(), float(np.mean(pred == valid.y))))
    return out


def _replicate_star(args):
    return replicate(*args)


def worker_count() -> int:
    cap = os.environ.get("ROBORD_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_study(scn: SimScenario, methods, workers: int | None = None) -> StudyResult:
    """Run ``scn.S`` replications fitting each (Method, FitConfig) pair.

    Replication ``s`` draws from streams keyed by (seed, s, role), so results do
    not depend on execution order or worker count.
    """
    methods = [(m, replace(c, method=m)) for m, c in methods]
    workers = worker_count() if workers is None else workers
    jobs = [(scn, methods, s) for s in range(scn.S)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate_star, jobs, chunksize=max(1, scn.S // (4 * workers))))
    else:
        results = [replicate(*job) for job in jobs]

    truth = scn.truth
    names = tuple(param_names(3, scn.n_categories))
    metrics = []
    for j, (method, cfg) in enumerate(methods):
        label = method_label(method, cfg, scn.link)
        ok = [r[j] for r in results if not isinstance(r[j], str)]
        failed = [(s, r[j]) for s, r in enumerate(results) if isinstance(r[j], str)]
        if failed:
            log.warning("%s: %d/%d replications failed (first: s=%d, %s)",
                        label, len(failed), scn.S, failed[0][0], failed[0][1])
        if len(failed) > _MAX_FAILURE_RATE * scn.S:
            raise SimulationError(
                f"{label}: {len(failed)} of {scn.S} replications failed; "
                f"first failure at s={failed[0][0]}: {failed[0][1]}"
            )
        est = np.array([t for t, _ in ok])
        err = est - truth
        metrics.append(SimMetrics(
            label=label,
            method=method,
            link=cfg.link,
            names=names,
            bias=err.mean(axis=0),
            mse=(err ** 2).mean(axis=0),
            ccr=float(np.mean([c for _, c in ok])),
            n_ok=len(ok),
            n_failed=len(failed),
            estimates=est,
        ))
    return StudyResult(scn, tuple(metrics))


# ---------------------------------------------------------------------------
# scenario files


def parse_methods(entries, default_link: LinkKind, fit_opts: dict | None = None):
    fit_opts = dict(fit_opts or {})
    out = []
    for e in entries:
        kind = e.get("method", "ml")
        method = Method(kind, e.get("tuning"))
        cfg = FitConfig(method=method, link=LinkKind.parse(e.get("link", default_link)), **fit_opts)
        out.append((method, cfg))
    return out


def load_scenario(path) -> tuple[SimScenario, list]:
    """Read a scenario JSON file; returns the scenario and its (Method, FitConfig) list."""
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    return scenario_from_dict(spec)


def scenario_from_dict(spec: dict):
    spec = dict(spec)
    methods = spec.pop("methods", [{"method": "ml"}])
    fit_opts = spec.pop("fit", {})
    known = {f for f in SimScenario.__dataclass_fields__}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    scn = SimScenario(**spec)
    return scn, parse_methods(methods, scn.link, fit_opts)
