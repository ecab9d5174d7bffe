"""Command-line front end: ``robord {fit,simulate,influence,residuals,probe}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile

import numpy as np

from robord.data import DataError, load_csv, load_spec
from robord.diagnostics import generalized_residuals
from robord.estimate import FitConfig, FitError, fit
from robord.inference import (
    SingularCovarianceError,
    condition_probe,
    figure1_params,
    influence_profile,
    sandwich,
    wald,
)
from robord.links import LinkKind
from robord.model import Method, Params
from robord.sim import SimulationError, load_scenario, run_study

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

log = logging.getLogger("robord")


class UsageError(Exception):
    pass


class ConvergenceError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def write_output(path: str | None, text: str) -> None:
    """Write to stdout for '-'/None, else atomically via a temp file in the target dir."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".robord-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects start:stop:step, got {text!r}") from None
    if step <= 0 or hi <= lo:
        raise UsageError(f"--grid needs stop > start and step > 0, got {text!r}")
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _method_from_args(args) -> Method:
    tuning = args.tuning
    if tuning is None:
        tuning = args.alpha if args.method == "dp" else args.gamma
    try:
        return Method(args.method, tuning)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_method_args(p, default_method="ml"):
    p.add_argument("--method", choices=["ml", "dp", "gamma"], default=default_method)
    p.add_argument("--tuning", type=float, help="alpha for dp, gamma for gamma")
    p.add_argument("--alpha", type=float, help="alias of --tuning for dp")
    p.add_argument("--gamma", type=float, help="alias of --tuning for gamma")
    p.add_argument("--link", choices=[k.value for k in LinkKind], default="probit")


def _add_fit_args(p):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--spec", required=True, help="JSON column spec")
    _add_method_args(p)
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)


def _fit_from_args(args):
    specs = load_spec(args.spec)
    data, prep = load_csv(args.data, specs)
    method = _method_from_args(args)
    cfg = FitConfig(method=method, link=args.link, max_iters=args.max_iters,
                    n_restarts=args.restarts, seed=args.seed)
    res = fit(data, cfg)
    if not res.converged:
        raise ConvergenceError(f"{method.label} fit did not converge within {args.max_iters} iterations")
    return data, prep, res


def cmd_fit(args) -> int:
    data, prep, res = _fit_from_args(args)
    names = res.params.names()
    names = list(data.feature_names) + names[data.p:]
    out = {
        "method": res.method.kind,
        "tuning": res.method.tuning,
        "link": res.link.value,
        "n": data.n,
        "categories": list(prep.response_levels),
        "params": dict(zip(names, res.params.to_vector().tolist())),
        "objective": res.objective,
        "converged": res.converged,
        "iterations": res.iterations,
        "preprocessing": prep.to_dict(),
    }
    try:
        cov = sandwich(res.method, res, data)
        out["covariance"] = {"names": names, "V_hat": cov.V_hat.tolist(),
                             "std_errors": cov.std_errors().tolist()}
        if cov.info_equality_gap is not None:
            out["covariance"]["info_equality_gap"] = cov.info_equality_gap
        out["wald"] = wald(res, cov, data).as_dicts()
    except (SingularCovarianceError, ValueError) as exc:
        log.warning("covariance unavailable: %s", exc)
        out["covariance"] = None
        out["covariance_error"] = str(exc)
        out["wald"] = None
    write_output(args.out, json.dumps(out, indent=2) + "\n")
    if args.residuals:
        buf = io.StringIO()
        generalized_residuals(res, data).to_csv(buf)
        write_output(args.residuals, buf.getvalue())
    return EXIT_OK


def cmd_residuals(args) -> int:
    data, _, res = _fit_from_args(args)
    buf = io.StringIO()
    generalized_residuals(res, data).to_csv(buf)
    write_output(args.out, buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn, methods = load_scenario(args.scenario)
    if args.replications:
        from dataclasses import replace

        scn = replace(scn, S=args.replications)
    result = run_study(scn, methods, workers=args.workers)
    buf = io.StringIO()
    result.to_csv(buf)
    write_output(args.out, buf.getvalue())
    return EXIT_OK


def cmd_influence(args) -> int:
    method = _method_from_args(args)
    if args.beta is None and args.delta is None:
        params = figure1_params()
    else:
        beta = parse_floats(args.beta or "1")
        delta = parse_floats(args.delta or "-1.5,0.5,1.5")
        try:
            params = Params(beta, delta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not (1 <= args.y <= params.n_categories):
        raise UsageError(f"--y must lie in 1..{params.n_categories}")
    prof = influence_profile(method, params, args.link, args.y, parse_grid(args.grid), args.k)
    write_output(args.out, prof.to_csv())
    return EXIT_OK


def cmd_probe(args) -> int:
    if not (0 < args.alpha <= 1):
        raise UsageError("--alpha must lie in (0, 1]")
    if not args.u_max > 1:
        raise UsageError("--u-max must exceed 1")
    report = condition_probe(args.link, args.alpha, args.u_max, args.points)
    write_output(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robord", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a model to a CSV file")
    _add_fit_args(p)
    p.add_argument("--out", default="-", help="JSON result file (default stdout)")
    p.add_argument("--residuals", help="optional CSV of generalized residuals")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("residuals", help="generalized residuals of a fit")
    _add_fit_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_residuals)

    p = sub.add_parser("simulate", help="run a contamination simulation study")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", default="-", help="metrics CSV (default stdout)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--replications", type=int, default=None, help="override S")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("influence", help="psi-function profile over a covariate grid")
    _add_method_args(p)
    p.add_argument("--y", type=int, default=1)
    p.add_argument("--grid", default="-10:10:0.1")
    p.add_argument("--beta", help="comma-separated coefficients (default 1)")
    p.add_argument("--delta", help="comma-separated cutpoints (default -1.5,0.5,1.5)")
    p.add_argument("--k", type=int, default=0, help="covariate varied along the grid")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("probe", help="tail conditions for boundedness and redescendence")
    p.add_argument("--link", choices=[k.value for k in LinkKind], default="probit")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--u-max", type=float, default=50.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_probe)
    return parser


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--grid -10:10:0.1" as two options; bind such values explicitly
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--grid", "--delta", "--beta") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("robord: a subcommand is required (fit, simulate, influence, residuals, probe)")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FitError, SimulationError, OSError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
