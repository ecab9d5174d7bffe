"""Generalized residuals and the parameter Distance sensitivity metric."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from robord import links
from robord.estimate import FitResult
from robord.links import LinkKind
from robord.model import Dataset, Params, _cut_args, log_prob_matrix


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    band95: tuple
    band99: tuple
    flagged: np.ndarray  # row indices outside the 95% band

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "residual", "lo95", "hi95", "lo99", "hi99", "flagged"])
        flagged = set(self.flagged.tolist())
        for i, r in enumerate(self.residuals):
            writer.writerow([i + 1, repr(float(r)), repr(self.band95[0]), repr(self.band95[1]),
                             repr(self.band99[0]), repr(self.band99[1]), int(i in flagged)])


def residual_values(params: Params, link, data: Dataset) -> np.ndarray:
    """E[eps | delta_{y-1} < x'beta + eps <= delta_y] under the fitted link.

    r_i = (g(a_i) - g(b_i)) / (G(b_i) - G(a_i)) with a_i, b_i the observed
    interval's bounds minus x_i'beta; exact for the probit link.
    """
    link = LinkKind.parse(link)
    u = _cut_args(params.beta, params.delta, data.X)
    idx = np.arange(data.n)
    yi = data.y - 1
    a, b = u[idx, yi], u[idx, yi + 1]
    logp = log_prob_matrix(params.beta, params.delta, link, data.X)[idx, yi]
    return np.exp(links.logpdf(link, a) - logp) - np.exp(links.logpdf(link, b) - logp)


def generalized_residuals(fit: FitResult, data: Dataset) -> ResidualReport:
    r = residual_values(fit.params, fit.link, data)
    band95 = tuple(float(v) for v in np.percentile(r, [2.5, 97.5]))
    band99 = tuple(float(v) for v in np.percentile(r, [0.5, 99.5]))
    flagged = np.flatnonzero((r < band95[0]) | (r > band95[1]))
    return ResidualReport(r, band95, band99, flagged)


def distance(params_a: Params, params_b: Params) -> tuple[float, float]:
    """Mean squared difference of coefficients and, separately, of cutpoints."""
    if params_a.p != params_b.p or params_a.n_categories != params_b.n_categories:
        raise ValueError(
            f"dimension mismatch: (p={params_a.p}, M={params_a.n_categories}) vs "
            f"(p={params_b.p}, M={params_b.n_categories})"
        )
    coef = float(np.sum((params_a.beta - params_b.beta) ** 2) / params_a.p)
    cut = float(np.sum((params_a.delta - params_b.delta) ** 2) / params_a.delta.size)
    return coef, cut
