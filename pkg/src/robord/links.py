"""Cumulative-link families: CDF, density and quantile with infinite sentinels.

All functions accept scalars or arrays and are evaluated in log space where
possible so that tail probabilities far below double-precision underflow still
produce usable ratios (e.g. density / probability for the score).
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import special

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG_PI = np.log(np.pi)


class LinkKind(str, enum.Enum):
    PROBIT = "probit"
    LOGIT = "logit"
    LOGLOG = "loglog"
    CLOGLOG = "cloglog"
    CAUCHIT = "cauchit"

    @classmethod
    def parse(cls, name: "str | LinkKind") -> "LinkKind":
        if isinstance(name, LinkKind):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown link {name!r}; expected one of: {valid}") from None

    @property
    def symmetric(self) -> bool:
        return self in (LinkKind.PROBIT, LinkKind.LOGIT, LinkKind.CAUCHIT)


def log1mexp(x):
    """log(1 - exp(x)) for x <= 0, accurate on both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            x > -np.log(2.0),
            np.log(-np.expm1(np.minimum(x, 0.0))),
            np.log1p(-np.exp(np.minimum(x, 0.0))),
        )
    return out


def _finite_eval(u, fn, at_neg_inf, at_pos_inf):
    # Evaluate fn only on finite entries; sentinels are filled explicitly.
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    finite = np.isfinite(u)
    if finite.all():
        out[...] = fn(u)
    else:
        if finite.any():
            out[finite] = fn(u[finite])
        out[u == -np.inf] = at_neg_inf
        out[u == np.inf] = at_pos_inf
        out[np.isnan(u)] = np.nan
    return out


def _logcdf_raw(kind: LinkKind, u):
    if kind is LinkKind.PROBIT:
        return special.log_ndtr(u)
    if kind is LinkKind.LOGIT:
        return -np.logaddexp(0.0, -u)
    if kind is LinkKind.LOGLOG:
        with np.errstate(over="ignore"):
            return -np.exp(-u)
    if kind is LinkKind.CLOGLOG:
        return log1mexp(-np.exp(u))
    return np.log(np.arctan2(1.0, -u)) - _LOG_PI


def _logsf_raw(kind: LinkKind, u):
    if kind is LinkKind.PROBIT:
        return special.log_ndtr(-u)
    if kind is LinkKind.LOGIT:
        return -np.logaddexp(0.0, u)
    if kind is LinkKind.LOGLOG:
        with np.errstate(over="ignore"):
            return log1mexp(-np.exp(-u))
    if kind is LinkKind.CLOGLOG:
        with np.errstate(over="ignore"):
            return -np.exp(u)
    return np.log(np.arctan2(1.0, u)) - _LOG_PI


def _logpdf_raw(kind: LinkKind, u):
    if kind is LinkKind.PROBIT:
        return -0.5 * u * u - _LOG_SQRT_2PI
    if kind is LinkKind.LOGIT:
        return -np.abs(u) - 2.0 * np.log1p(np.exp(-np.abs(u)))
    with np.errstate(over="ignore"):
        if kind is LinkKind.LOGLOG:
            return -u - np.exp(-u)
        if kind is LinkKind.CLOGLOG:
            return u - np.exp(u)
        return -_LOG_PI - np.log1p(u * u)


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def logcdf(kind: LinkKind, u):
    kind = LinkKind.parse(kind)
    out = _finite_eval(u, lambda v: _logcdf_raw(kind, v), -np.inf, 0.0)
    return _scalar_or_array(out, u)


def logsf(kind: LinkKind, u):
    """log(1 - G(u)), computed without cancellation."""
    kind = LinkKind.parse(kind)
    out = _finite_eval(u, lambda v: _logsf_raw(kind, v), 0.0, -np.inf)
    return _scalar_or_array(out, u)


def logpdf(kind: LinkKind, u):
    kind = LinkKind.parse(kind)
    out = _finite_eval(u, lambda v: _logpdf_raw(kind, v), -np.inf, -np.inf)
    return _scalar_or_array(out, u)


def cdf(kind: LinkKind, u):
    """G(u); cdf(-inf) = 0 and cdf(+inf) = 1."""
    return _scalar_or_array(np.exp(logcdf(kind, u)), u)


def sf(kind: LinkKind, u):
    return _scalar_or_array(np.exp(logsf(kind, u)), u)


def pdf(kind: LinkKind, u):
    """g(u); zero at both infinite sentinels."""
    return _scalar_or_array(np.exp(logpdf(kind, u)), u)


def quantile(kind: LinkKind, q):
    """Inverse of G; quantile(0) = -inf and quantile(1) = +inf."""
    kind = LinkKind.parse(kind)
    qa = np.asarray(q, dtype=float)
    if np.any(np.isnan(qa)) or np.any((qa < 0.0) | (qa > 1.0)):
        raise ValueError(f"quantile requires 0 <= q <= 1, got {q!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is LinkKind.PROBIT:
            out = special.ndtri(qa)
        elif kind is LinkKind.LOGIT:
            out = special.logit(qa)
        elif kind is LinkKind.LOGLOG:
            out = -np.log(-np.log(qa))
        elif kind is LinkKind.CLOGLOG:
            out = np.log(-np.log1p(-qa))
        else:
            out = np.tan(np.pi * (qa - 0.5))
    out = np.where(qa == 0.0, -np.inf, np.where(qa == 1.0, np.inf, out))
    return _scalar_or_array(out, q)


def dlogpdf(kind: LinkKind, u):
    """Derivative of log g(u), closed form."""
    kind = LinkKind.parse(kind)
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore"):
        if kind is LinkKind.PROBIT:
            out = -u
        elif kind is LinkKind.LOGIT:
            out = 1.0 - 2.0 * special.expit(u)
        elif kind is LinkKind.LOGLOG:
            out = -1.0 + np.exp(-u)
        elif kind is LinkKind.CLOGLOG:
            out = 1.0 - np.exp(u)
        else:
            out = -2.0 * u / (1.0 + u * u)
    return _scalar_or_array(out, u)
