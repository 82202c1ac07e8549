"""Command-line front end: config parsing, sweep dispatch, CSV emission.

Subcommands
-----------
mle-curve        scale-MLE growth sweep -> CSV N,sigma_ml,h,q,rho
cubature-curve   integration sweep      -> CSV N,Q,abs_err,sigma_ml,sqrt_V,R_bc,score
geometry         design geometry        -> CSV N,h,q,rho
rates            fitted vs theoretical slopes -> CSV name,slope,theory,r2
eval             single kernel evaluation, printed as a scalar

The sweeps are configured by a flat INI file (sections [kernel],
[function], [experiment]; full schema in the README) with `--set
KEY=VALUE` overrides applied on top; a bare KEY must be unambiguous
across sections, otherwise qualify it as section.key. Numeric columns
are printed with repr, so every value round-trips to the identical
binary double and identical configs produce byte-identical files. Files
are written to a temporary name and renamed into place.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical or I/O
failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import tempfile

import numpy as np

from . import pointsets
from .exceptions import ConfigError, InsufficientDataError, \
    NonPositiveValuesError
from .experiments import (ExperimentConfig, fit_rate, run_cubature_curve,
                          run_mle_curve, theoretical_exponent)
from .kernels import FAMILIES, FunctionExpansion, make_kernel

__all__ = ["main", "parse_and_dispatch", "emit_csv"]

_DESIGN_ALIASES = {
    "uniform": "uniform_grid",
    "uniform_grid": "uniform_grid",
    "vdc": "van_der_corput",
    "van_der_corput": "van_der_corput",
    "cartesian_grid": "cartesian_grid",
    "cartesian_vdc": "cartesian_vdc",
}

# Declared config surface; --set may only touch these.
_SCHEMA = {
    "kernel": ("family", "nu", "lengthscale", "dim", "sigma"),
    "function": ("eta", "lengthscale", "coefficients", "centers", "dim"),
    "experiment": ("design", "n_range", "geometry_resolution",
                   "quadrature_tol", "fit_window"),
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(f"{self.format_usage().rstrip()}\n"
                          f"{self.prog}: error: {message}")


def _fmt(value):
    """Shortest decimal that round-trips; ints stay integral."""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _write_text(text, out_path):
    if out_path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".scalegp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def emit_csv(rows, destination, header, footers=()):
    """Write header + formatted rows + '#' footer lines, atomically.

    ``rows`` is a non-empty list of value tuples matching ``header``.
    """
    if not rows:
        raise ConfigError("refusing to write an empty CSV")
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    lines += [f"# {footer}" for footer in footers]
    _write_text("\n".join(lines) + "\n", destination)


# Config file ----------------------------------------------------------------

def _parse_floats(text, name):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{name}: expected numbers, got {text!r}") from None


def _parse_centers(text, dim):
    points = []
    for tok in text.split(","):
        coords = tok.split()
        if len(coords) != dim:
            raise ConfigError(f"centers: point {tok.strip()!r} has "
                              f"{len(coords)} coordinates, expected {dim}")
        try:
            points.append([float(c) for c in coords])
        except ValueError:
            raise ConfigError(f"centers: expected numbers, got {tok!r}") \
                from None
    return points


def _parse_n_range(text):
    """Comma list of sizes; a:b or a:b:s tokens expand inclusively."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            parts = tok.split(":")
            if len(parts) not in (2, 3):
                raise ConfigError(f"n_range: bad range token {tok!r}")
            try:
                start, stop = int(parts[0]), int(parts[1])
                step = int(parts[2]) if len(parts) == 3 else 1
            except ValueError:
                raise ConfigError(f"n_range: bad range token {tok!r}") \
                    from None
            if step < 1:
                raise ConfigError(f"n_range: step must be >= 1 in {tok!r}")
            out.extend(range(start, stop + 1, step))
        else:
            try:
                out.append(int(tok))
            except ValueError:
                raise ConfigError(f"n_range: expected an integer, "
                                  f"got {tok!r}") from None
    return out


def _load_config(path, overrides):
    if path is None:
        raise ConfigError("this subcommand requires --config PATH")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")

    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        section, dot, bare = key.partition(".")
        if not dot:
            homes = [s for s, keys in _SCHEMA.items() if key in keys]
            if not homes:
                raise ConfigError(f"--set {key}: no such config key")
            if len(homes) > 1:
                raise ConfigError(f"--set {key}: ambiguous, qualify as "
                                  + " or ".join(f"{s}.{key}" for s in homes))
            section, bare = homes[0], key
        if section not in _SCHEMA or bare not in _SCHEMA[section]:
            raise ConfigError(f"--set {key}: no such config key")
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][bare] = value
    return parser


def _get(parser, section, key, convert, default=None, required=False):
    if not parser.has_section(section) or key not in parser[section]:
        if required:
            raise ConfigError(f"config is missing {section}.{key}")
        return default
    raw = parser[section][key]
    try:
        return convert(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None


def _build_experiment(parser):
    family = _get(parser, "kernel", "family", str, required=True)
    if family not in FAMILIES:
        raise ConfigError(f"kernel.family must be one of {sorted(FAMILIES)}, "
                          f"got {family!r}")
    dim = _get(parser, "kernel", "dim", int, default=1)
    try:
        kernel = make_kernel(
            family,
            nu=_get(parser, "kernel", "nu", float),
            lengthscale=_get(parser, "kernel", "lengthscale", float),
            dim=dim,
            sigma=_get(parser, "kernel", "sigma", float, default=1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}") from None

    fdim = _get(parser, "function", "dim", int, default=1)
    centers_raw = _get(parser, "function", "centers", str, required=True)
    try:
        function = FunctionExpansion(
            eta=_get(parser, "function", "eta", float, required=True),
            lengthscale=_get(parser, "function", "lengthscale", float,
                             required=True),
            coefficients=_parse_floats(
                _get(parser, "function", "coefficients", str, required=True),
                "coefficients"),
            centers=_parse_centers(centers_raw, fdim),
            dim=fdim,
        )
    except ValueError as exc:
        raise ConfigError(f"function: {exc}") from None

    design = _get(parser, "experiment", "design", str, required=True)
    if design not in _DESIGN_ALIASES:
        raise ConfigError(f"experiment.design must be one of "
                          f"{sorted(set(_DESIGN_ALIASES))}, got {design!r}")
    try:
        return ExperimentConfig(
            kernel=kernel,
            test_function=function,
            design=_DESIGN_ALIASES[design],
            n_range=_get(parser, "experiment", "n_range", _parse_n_range,
                         required=True),
            geometry_resolution=_get(parser, "experiment",
                                     "geometry_resolution", int),
            quadrature_tol=_get(parser, "experiment", "quadrature_tol", float,
                                default=1e-12),
            fit_window=_get(parser, "experiment", "fit_window", float,
                            default=0.5),
        )
    except ValueError as exc:
        raise ConfigError(f"experiment: {exc}") from None


def _equivalent_nu(kernel):
    """Matern smoothness with the same Sobolev order as the kernel."""
    return kernel.sobolev_order - kernel.dim / 2.0


def _rate_footers(cfg, records, columns):
    footers = []
    for column in columns:
        try:
            slope, intercept, r2 = fit_rate(records, column, cfg.fit_window)
        except (InsufficientDataError, NonPositiveValuesError) as exc:
            footers.append(f"fit {column} unavailable: {exc}")
            continue
        footers.append(f"fit {column} slope={_fmt(slope)} "
                       f"intercept={_fmt(intercept)} r2={_fmt(r2)}")
    theory = theoretical_exponent(_equivalent_nu(cfg.kernel),
                                  cfg.test_function.eta, cfg.dim)
    footers.append(f"theory sigma_ml exponent={_fmt(theory)}")
    return footers


# Subcommands ----------------------------------------------------------------

def _cmd_mle_curve(args):
    cfg = _build_experiment(_load_config(args.config, args.set))
    records = run_mle_curve(cfg, threads=args.threads)
    rows = [(r.N, r.sigma_ml, r.h, r.q, r.rho) for r in records]
    emit_csv(rows, args.out, ["N", "sigma_ml", "h", "q", "rho"],
             _rate_footers(cfg, records, ["sigma_ml"]))


def _cmd_cubature_curve(args):
    cfg = _build_experiment(_load_config(args.config, args.set))
    records = run_cubature_curve(cfg, threads=args.threads)
    rows = [(r.N, r.q_value, r.abs_int_error, r.sigma_ml, r.sqrt_V,
             r.sigma_ml * r.sqrt_V, r.score) for r in records]
    emit_csv(rows, args.out,
             ["N", "Q", "abs_err", "sigma_ml", "sqrt_V", "R_bc", "score"],
             _rate_footers(cfg, records, ["score", "sigma_ml"]))


def _cmd_geometry(args):
    if args.design is not None:
        if args.n is None:
            raise ConfigError("geometry --design also needs --n")
        if args.design not in _DESIGN_ALIASES:
            raise ConfigError(f"--design must be one of "
                              f"{sorted(set(_DESIGN_ALIASES))}")
        design, sizes = _DESIGN_ALIASES[args.design], [args.n]
        resolution = args.resolution
    else:
        parser = _load_config(args.config, args.set)
        design = _get(parser, "experiment", "design", str, required=True)
        if design not in _DESIGN_ALIASES:
            raise ConfigError(f"experiment.design must be one of "
                              f"{sorted(set(_DESIGN_ALIASES))}")
        design = _DESIGN_ALIASES[design]
        sizes = _parse_n_range(_get(parser, "experiment", "n_range", str,
                                    required=True))
        resolution = args.resolution or _get(parser, "experiment",
                                             "geometry_resolution", int)

    rows = []
    for n in sizes:
        if design == "uniform_grid":
            X = pointsets.uniform_grid(n)
        elif design == "van_der_corput":
            X = pointsets.van_der_corput(n)
        else:
            axis = pointsets.uniform_grid(n) if design == "cartesian_grid" \
                else pointsets.van_der_corput(n)
            X = pointsets.cartesian_product(axis, 2)
        geo = pointsets.geometry(X, resolution=resolution)
        rows.append((len(X), geo.fill_distance, geo.separation_radius,
                     geo.mesh_ratio))
    emit_csv(rows, args.out, ["N", "h", "q", "rho"])


def _cmd_rates(args):
    cfg = _build_experiment(_load_config(args.config, args.set))
    if isinstance(cfg.kernel, FAMILIES["matern"]):
        records = run_mle_curve(cfg, threads=args.threads)
    else:
        records = run_cubature_curve(cfg, threads=args.threads)
    slope, _, r2 = fit_rate(records, "sigma_ml", cfg.fit_window)
    theory = theoretical_exponent(_equivalent_nu(cfg.kernel),
                                  cfg.test_function.eta, cfg.dim)
    emit_csv([("sigma_ml", slope, theory, r2)], args.out,
             ["name", "slope", "theory", "r2"])


def _parse_point(text, dim):
    coords = _parse_floats(text, "point")
    if len(coords) != dim:
        raise ConfigError(f"point {text!r} has {len(coords)} coordinates, "
                          f"expected {dim}")
    return coords


def _cmd_eval(args):
    try:
        kernel = make_kernel(args.kernel, nu=args.nu, lengthscale=args.l,
                             dim=args.dim, sigma=args.sigma)
        value = kernel(_parse_point(args.x, args.dim),
                       _parse_point(args.y, args.dim))
    except ValueError as exc:
        raise ConfigError(f"eval: {exc}") from None
    _write_text(f"{value:.9g}\n", args.out)


def _make_parser():
    parser = _Parser(prog="scalegp",
                     description="GP interpolation and cubature sweeps with "
                                 "closed-form scale MLE")
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="INI experiment description")
    common.add_argument("--out", metavar="PATH",
                        help="output file (default: stdout)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[],
                        help="override a config key (repeatable); bare keys "
                             "must be unambiguous, else use section.key")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for sweeps (default 1)")

    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True

    p = sub.add_parser("mle-curve", parents=[common],
                       help="scale-MLE growth curve")
    p.set_defaults(handler=_cmd_mle_curve)

    p = sub.add_parser("cubature-curve", parents=[common],
                       help="integration error/score curve")
    p.set_defaults(handler=_cmd_cubature_curve)

    p = sub.add_parser("geometry", parents=[common],
                       help="fill distance, separation radius, mesh ratio")
    p.add_argument("--design", choices=sorted(set(_DESIGN_ALIASES)))
    p.add_argument("--n", type=int, help="design size (per axis if Cartesian)")
    p.add_argument("--resolution", type=int,
                   help="fill-distance lattice resolution per axis")
    p.set_defaults(handler=_cmd_geometry)

    p = sub.add_parser("rates", parents=[common],
                       help="fitted slope vs theoretical exponent")
    p.set_defaults(handler=_cmd_rates)

    p = sub.add_parser("eval", parents=[common],
                       help="evaluate K(x, y) once")
    p.add_argument("--kernel", required=True, choices=sorted(FAMILIES))
    p.add_argument("--nu", type=float)
    p.add_argument("--l", type=float, help="lengthscale (Matern only)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--x", required=True, help="first point; d=2 as 'x1 x2'")
    p.add_argument("--y", required=True, help="second point")
    p.set_defaults(handler=_cmd_eval)
    return parser


def parse_and_dispatch(argv=None):
    """Run one CLI invocation and return its exit code."""
    try:
        args = _make_parser().parse_args(argv)
        args.handler(args)
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"scalegp: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        # FactorizationError, QuadratureError, DegenerateScoreError:
        # the configuration parsed but the numbers did not cooperate.
        print(f"scalegp: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"scalegp: i/o failure: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    return parse_and_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
