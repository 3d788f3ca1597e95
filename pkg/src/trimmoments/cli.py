"""Command line front end.

Subcommands:

fit       fit one dataset with one trimming scheme, JSON output
are       asymptotic relative efficiency grids, CSV output
simulate  Monte Carlo study (mean ratios and finite-sample REs), CSV
gof       goodness-of-fit table for a damages dataset, CSV

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 estimation
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import asymptotics, gof, simulation
from .estimators import EstimationError, fit_frechet, fit_location_scale
from .models import Family, ParameterVector
from .moments import SchemeError, validate_scheme

__all__ = ["main"]


def _parse_number(tok: str) -> float:
    """Float literal, also accepting simple fractions like 1/30."""
    tok = tok.strip()
    if "/" in tok:
        num, den = tok.split("/", 1)
        return float(num) / float(den)
    return float(tok)


def _parse_scheme(spec: str):
    parts = [_parse_number(p) for p in spec.split(",")]
    if len(parts) != 4:
        raise SchemeError(f"scheme must be 'a1,b1,a2,b2', got {spec!r}")
    return validate_scheme(*parts)


def _parse_grid(spec: str):
    """Either 'start:stop:step' (inclusive stop) or a comma list."""
    if ":" in spec:
        start, stop, step = (_parse_number(p) for p in spec.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count)]
    return [_parse_number(p) for p in spec.split(",")]


def _load_data(path: str, scale: float) -> np.ndarray:
    if path == "hurricane":
        return gof.load_dataset() * scale
    return gof.load_dataset(path) * scale


def _out_stream(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _cmd_fit(args) -> int:
    scale = args.scale
    if args.data == "hurricane" and args.scale is None:
        scale = gof.DATA_SCALE
    scale = 1.0 if scale is None else scale
    data = _load_data(args.data, scale)
    scheme = validate_scheme(_parse_number(args.a1), _parse_number(args.b1),
                             _parse_number(args.a2), _parse_number(args.b2))
    family = Family.parse(args.model)
    if family is Family.FRECHET:
        fit = fit_frechet(data, scheme)
        names = ("beta", "sigma")
    else:
        fit = fit_location_scale(data, scheme, family=family)
        names = ("theta", "sigma")
    try:
        cov = asymptotics.fit_covariance(fit)
        se = [math.sqrt(cov[i, i] / fit.n) for i in range(2)]
    except asymptotics.SingularityError:
        cov, se = None, None
    lbp, ubp = asymptotics.breakdown_points(scheme)
    est = dict(zip(names, fit.estimates))
    if family is Family.FRECHET and scale != 1.0:
        est["sigma_scaled"] = fit.params.sigma / scale
    result = {
        "model": family.value,
        "scheme": {"a1": scheme.a1, "b1": scheme.b1,
                   "a2": scheme.a2, "b2": scheme.b2,
                   "ordering": scheme.tag.value},
        "n": fit.n,
        "estimates": est,
        "branch": fit.branch.value,
        "trimmed_moments": {"t1": fit.t1, "t2": fit.t2},
        "standard_errors": None if se is None else dict(zip(names, se)),
        "covariance": None if cov is None else cov.tolist(),
        "breakdown_points": {"lower": lbp, "upper": ubp},
        "discriminant_negative": bool(fit.discriminant_negative),
    }
    out, close = _out_stream(args.output)
    try:
        json.dump(result, out, indent=2)
        out.write("\n")
    finally:
        if close:
            out.close()
    return 0


def _cmd_are(args) -> int:
    family = Family.parse(args.model)
    schemes = [_parse_scheme(s) for s in args.scheme]
    if not schemes:
        raise SchemeError("at least one --scheme is required")
    if family is Family.FRECHET:
        grid = _parse_grid(args.beta)
        mk = lambda v: ParameterVector(sigma=args.sigma, beta=v)
        pname = "beta"
    else:
        grid = _parse_grid(args.theta)
        mk = lambda v: ParameterVector(theta=v, sigma=args.sigma)
        pname = "theta"
    out, close = _out_stream(args.output)
    try:
        w = csv.writer(out)
        w.writerow(["scheme"] + [f"{pname}={v:g}" for v in grid])
        for scheme in schemes:
            row = [scheme.label()]
            for v in grid:
                r = asymptotics.are(family, mk(v), scheme)
                row.append(f"{r.are:.3f}")
            w.writerow(row)
    finally:
        if close:
            out.close()
    return 0


def _cmd_simulate(args) -> int:
    family = Family.parse(args.model)
    schemes = [_parse_scheme(s) for s in args.scheme]
    if family is Family.FRECHET:
        params = ParameterVector(sigma=args.sigma, beta=args.beta)
    else:
        params = ParameterVector(theta=args.theta, sigma=args.sigma)
    sizes = [int(v) for v in _parse_grid(args.n)]
    out, close = _out_stream(args.output)
    try:
        w = csv.writer(out)
        p1 = "beta" if family is Family.FRECHET else "theta"
        w.writerow(["estimator", "n", f"mean_{p1}_ratio", "mean_sigma_ratio",
                    "re", f"sd_{p1}_ratio", "sd_sigma_ratio", "sd_re",
                    "failures"])
        for n in sizes:
            cfg = simulation.StudyConfig(
                family, params, n, schemes,
                replicates=args.replicates, repetitions=args.repetitions,
                seed=args.seed)
            res = simulation.run_study(cfg)
            for r in res.rows:
                w.writerow([r.label, n,
                            f"{r.mean_ratio_1:.4f}", f"{r.mean_ratio_2:.4f}",
                            f"{r.re:.4f}", f"{r.sd_ratio_1:.4f}",
                            f"{r.sd_ratio_2:.4f}", f"{r.sd_re:.4f}",
                            r.failures])
    finally:
        if close:
            out.close()
    return 0


def _cmd_gof(args) -> int:
    scale = gof.DATA_SCALE if args.scale is None else args.scale
    data = _load_data(args.data, scale)
    schemes = [_parse_scheme(s) for s in args.scheme]
    datasets = [("original", data)]
    if args.modified:
        datasets.append(("modified", gof.modify_dataset(data)))
    out, close = _out_stream(args.output)
    try:
        w = csv.writer(out)
        w.writerow(["dataset", "estimator",
                    "ln_theta", "ln_sigma", "ln_fit", "ln_aic", "ln_bic",
                    "fr_beta", "fr_sigma_scaled", "fr_fit", "fr_aic",
                    "fr_bic"])
        for tag, x in datasets:
            rows = [("MLE", None)] + [(s.label(), s) for s in schemes]
            for label, scheme in rows:
                rl = gof.gof_report(Family.LOGNORMAL, x, scheme, tag)
                rf = gof.gof_report(Family.FRECHET, x, scheme, tag)
                w.writerow([
                    tag, label,
                    f"{rl.params.theta:.2f}", f"{rl.params.sigma:.2f}",
                    f"{rl.fit:.4f}", f"{rl.aic:.0f}", f"{rl.bic:.0f}",
                    f"{rf.params.beta:.2f}",
                    f"{rf.params.sigma / scale:.2f}",
                    f"{rf.fit:.4f}", f"{rf.aic:.0f}", f"{rf.bic:.0f}",
                ])
    finally:
        if close:
            out.close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trimmoments",
        description="Method of trimmed moments estimation and diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit one dataset with one scheme")
    f.add_argument("--model", required=True,
                   choices=["normal", "lognormal", "frechet"])
    f.add_argument("--data", required=True,
                   help="one-column CSV path, or 'hurricane' for the bundled dataset")
    f.add_argument("--a1", required=True)
    f.add_argument("--b1", required=True)
    f.add_argument("--a2", required=True)
    f.add_argument("--b2", required=True)
    f.add_argument("--scale", type=float, default=None,
                   help="multiply data by this before fitting "
                        "(default 1; 1e9 for the bundled dataset)")
    f.add_argument("-o", "--output", default=None)
    f.set_defaults(func=_cmd_fit)

    a = sub.add_parser("are", help="asymptotic relative efficiency grid")
    a.add_argument("--model", required=True,
                   choices=["normal", "lognormal", "frechet"])
    a.add_argument("--sigma", type=float, required=True)
    a.add_argument("--theta", default=None,
                   help="grid 'start:stop:step' or comma list (location-scale)")
    a.add_argument("--beta", default=None,
                   help="grid 'start:stop:step' or comma list (Frechet)")
    a.add_argument("--scheme", action="append", default=[],
                   help="a1,b1,a2,b2 (repeatable)")
    a.add_argument("-o", "--output", default=None)
    a.set_defaults(func=_cmd_are)

    s = sub.add_parser("simulate", help="Monte Carlo efficiency study")
    s.add_argument("--model", required=True,
                   choices=["normal", "lognormal", "frechet"])
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--n", required=True, help="sample sizes, comma list")
    s.add_argument("--replicates", type=int, default=2000)
    s.add_argument("--repetitions", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scheme", action="append", default=[])
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=_cmd_simulate)

    g = sub.add_parser("gof", help="goodness-of-fit table")
    g.add_argument("--data", default="hurricane",
                   help="one-column CSV path (default: bundled dataset)")
    g.add_argument("--scale", type=float, default=None,
                   help="unit scale of the data (default 1e9)")
    g.add_argument("--scheme", action="append", default=[])
    g.add_argument("--modified", action="store_true",
                   help="also report the max*10 modified dataset")
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=_cmd_gof)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EstimationError as exc:
        print(f"estimation failure: {exc}", file=sys.stderr)
        return 3
    except (SchemeError, ValueError, asymptotics.SingularityError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
