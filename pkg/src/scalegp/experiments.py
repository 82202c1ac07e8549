"""Deterministic sweeps over nested designs: rate curves and slope fits.

A sweep fits the GP afresh for every N in a range of design sizes and
records the maximum-likelihood scale, interpolation and integration
errors, predictive widths, standard scores and the design geometry. The
headline theory being exercised: for a Matern kernel of smoothness nu on
quasi-uniform designs and a test function of exact smoothness beta =
2 eta + d/2,

    sigma_ml ~ N^((nu - 2 eta)+ / d - 1/2),

so the log-log slope of the sigma_ml column against N is the observable
to compare with ``theoretical_exponent``. Everything here is
deterministic: designs, lattices and test functions carry no randomness,
so identical configs reproduce identical records bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from . import pointsets
from .cubature import cubature, make_embedding
from .exceptions import (FactorizationError, InsufficientDataError,
                         NonPositiveValuesError, QuadratureError)
from .gp import MLScaleGP
from .kernels import FunctionExpansion, Kernel, Matern

__all__ = ["ExperimentConfig", "CurveRecord", "theoretical_exponent",
           "smoothness_of_expansion", "true_integral", "run_mle_curve",
           "run_cubature_curve", "fit_rate"]

DESIGNS = ("uniform_grid", "van_der_corput", "cartesian_grid", "cartesian_vdc")

# Records below this count make a log-log line fit meaningless.
_MIN_WINDOW_RECORDS = 5
# Query block size for lattice predictions; bounds the cross-Gram memory.
_PREDICT_CHUNK = 4096


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully deterministic description of one sweep.

    ``n_range`` is the per-axis point count: the Cartesian designs square
    it, so the recorded N is n^2 there. ``geometry_resolution`` is the
    per-axis lattice resolution used both for the fill-distance search and
    for the sup-error lattice; None picks 512 (d=1) or 256 (d=2).
    ``fit_window`` is the tail fraction of records used by ``fit_rate``.
    """

    kernel: Kernel
    test_function: FunctionExpansion
    design: str
    n_range: Sequence[int]
    geometry_resolution: Optional[int] = None
    quadrature_tol: float = 1e-12
    fit_window: float = 0.5

    def __post_init__(self):
        if not isinstance(self.kernel, Kernel):
            raise ValueError("kernel must be a Kernel instance")
        if not isinstance(self.test_function, FunctionExpansion):
            raise ValueError("test_function must be a FunctionExpansion")
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}; "
                             f"expected one of {DESIGNS}")
        ns = tuple(int(n) for n in self.n_range)
        if len(ns) == 0 or any(n < 2 for n in ns):
            raise ValueError("n_range must be non-empty with all N >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_range must be strictly increasing")
        object.__setattr__(self, "n_range", ns)
        if self.geometry_resolution is not None \
                and (not isinstance(self.geometry_resolution, (int, np.integer))
                     or self.geometry_resolution < 64):
            raise ValueError("geometry_resolution must be an integer >= 64")
        if not (np.isfinite(self.quadrature_tol) and self.quadrature_tol > 0):
            raise ValueError("quadrature_tol must be positive")
        if not (0.0 < self.fit_window <= 1.0):
            raise ValueError("fit_window must lie in (0, 1]")
        if self.kernel.dim != self.dim:
            raise ValueError(f"design {self.design} is {self.dim}-d but the "
                             f"kernel has dim={self.kernel.dim}")
        if self.test_function.dim != self.dim:
            raise ValueError(f"design {self.design} is {self.dim}-d but the "
                             f"test function has dim={self.test_function.dim}")

    @property
    def dim(self):
        return 2 if self.design.startswith("cartesian") else 1

    @property
    def resolution(self):
        if self.geometry_resolution is not None:
            return int(self.geometry_resolution)
        return 512 if self.dim == 1 else 256


@dataclass(frozen=True)
class CurveRecord:
    """One sweep row; fields a given sweep does not produce stay None.

    ``q_value`` is the posterior integral mean Q (named to avoid clashing
    with the separation radius q).
    """

    N: int
    sigma_ml: float
    sup_error: Optional[float] = None
    abs_int_error: Optional[float] = None
    sqrt_V: Optional[float] = None
    score: Optional[float] = None
    h: Optional[float] = None
    q: Optional[float] = None
    rho: Optional[float] = None
    q_value: Optional[float] = None


def theoretical_exponent(nu, eta, d):
    """Predicted log-log rate (nu - 2 eta)+ / d - 1/2 of the scale MLE."""
    if not (np.isfinite(nu) and nu > 0) or not (np.isfinite(eta) and eta > 0):
        raise ValueError("nu and eta must be positive")
    if d not in (1, 2):
        raise ValueError(f"d must be 1 or 2, got {d}")
    return max(nu - 2.0 * eta, 0.0) / d - 0.5


def smoothness_of_expansion(f):
    """Exact Fourier-decay smoothness beta = 2 eta + d/2 of an expansion."""
    if not isinstance(f, FunctionExpansion):
        raise ValueError("f must be a FunctionExpansion")
    return 2.0 * f.eta + f.dim / 2.0


def true_integral(f, tol=1e-12):
    """int_0^1 f(x) dx by adaptive quadrature, split at the centers.

    Expansions in rough Matern kernels have derivative kinks at their
    centers; handing those to the integrator as explicit breakpoints is
    what lets it reach tol there.
    """
    if f.dim != 1:
        raise ValueError("true_integral supports d=1 expansions only")
    breakpoints = sorted(set(f.centers[:, 0].tolist()) - {0.0, 1.0})
    value, abserr = quad(lambda x: f(x), 0.0, 1.0, points=breakpoints,
                         limit=200, epsabs=tol, epsrel=tol)
    if abserr > 100.0 * tol:
        raise QuadratureError(
            f"true integral reached {abserr:.3e}, wanted {tol:.3e}")
    return value


def _build_design(design, n):
    if design == "uniform_grid":
        return pointsets.uniform_grid(n)
    if design == "van_der_corput":
        return pointsets.van_der_corput(n)
    axis = pointsets.uniform_grid(n) if design == "cartesian_grid" \
        else pointsets.van_der_corput(n)
    return pointsets.cartesian_product(axis, 2)


def _sup_lattice(dim, resolution):
    axis = np.linspace(0.0, 1.0, resolution)
    if dim == 1:
        return axis.reshape(-1, 1)
    return np.stack([np.repeat(axis, resolution),
                     np.tile(axis, resolution)], axis=1)


def _sup_error(gp, lattice, f_lattice):
    worst = 0.0
    for start in range(0, lattice.shape[0], _PREDICT_CHUNK):
        block = lattice[start:start + _PREDICT_CHUNK]
        pred = np.atleast_1d(gp.predict(block))
        worst = max(worst, float(np.abs(f_lattice[start:start + block.shape[0]]
                                        - pred).max()))
    return worst


def _fit_for(cfg, n):
    X = _build_design(cfg.design, n)
    y = np.atleast_1d(cfg.test_function(X.points))
    try:
        gp = MLScaleGP(cfg.kernel).fit(X, y)
    except FactorizationError as exc:
        raise FactorizationError(f"design size N={len(X)}: {exc}") from exc
    geo = pointsets.geometry(X, resolution=cfg.resolution)
    return X, gp, geo


def _run(worker, cfg, threads):
    if threads is None or threads <= 1:
        records = [worker(n) for n in cfg.n_range]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            records = list(pool.map(worker, cfg.n_range))
    return sorted(records, key=lambda r: r.N)


def run_mle_curve(cfg, threads=1):
    """Scale-MLE growth curve: one record per design size.

    Each record carries sigma_ml, the sup interpolation error over the
    shared evaluation lattice, and the design geometry. Kernel must be
    Matern (the rate theory is stated for Sobolev-equivalent kernels).
    """
    if not isinstance(cfg.kernel, Matern):
        raise ValueError("run_mle_curve requires a Matern kernel")
    lattice = _sup_lattice(cfg.dim, cfg.resolution)
    f_lattice = np.atleast_1d(cfg.test_function(lattice))

    def worker(n):
        X, gp, geo = _fit_for(cfg, n)
        return CurveRecord(
            N=len(X),
            sigma_ml=gp.sigma_ml_,
            sup_error=_sup_error(gp, lattice, f_lattice),
            h=geo.fill_distance,
            q=geo.separation_radius,
            rho=geo.mesh_ratio,
        )

    return _run(worker, cfg, threads)


def run_cubature_curve(cfg, threads=1):
    """Integration curve for the released integrated BM kernel on vdC points.

    Each record carries the posterior integral mean, its error against the
    cached adaptive-quadrature truth, the unit-scale width sqrt(V) and the
    standard score.
    """
    if cfg.kernel.family != "released_ibm":
        raise ValueError("run_cubature_curve requires the released_ibm kernel")
    if cfg.design != "van_der_corput":
        raise ValueError("run_cubature_curve requires the van_der_corput design")
    emb = make_embedding(cfg.kernel)
    truth = true_integral(cfg.test_function, tol=cfg.quadrature_tol)

    def worker(n):
        X, gp, geo = _fit_for(cfg, n)
        result = cubature(gp, emb, true_integral=truth)
        return CurveRecord(
            N=len(X),
            sigma_ml=gp.sigma_ml_,
            abs_int_error=abs(truth - result.Q),
            sqrt_V=math.sqrt(result.V),
            score=result.score,
            h=geo.fill_distance,
            q=geo.separation_radius,
            rho=geo.mesh_ratio,
            q_value=result.Q,
        )

    return _run(worker, cfg, threads)


def fit_rate(records, column, window=0.5):
    """Least-squares slope of log(column) against log(N) over the tail.

    ``window`` is the fraction of records (by count, latest N first) used.
    Returns (slope, intercept, r2). Raises InsufficientDataError below 5
    usable records and NonPositiveValuesError when the column is missing
    or non-positive anywhere in the window (log of such values is
    undefined; a vanished error or score is a degenerate curve, not a
    rate).
    """
    if not (0.0 < window <= 1.0):
        raise ValueError(f"window must lie in (0, 1], got {window}")
    records = sorted(records, key=lambda r: r.N)
    keep = int(math.ceil(window * len(records)))
    tail = records[len(records) - keep:]
    if len(tail) < _MIN_WINDOW_RECORDS:
        raise InsufficientDataError(
            f"slope fit needs >= {_MIN_WINDOW_RECORDS} records in the "
            f"window, got {len(tail)}")
    try:
        values = [getattr(r, column) for r in tail]
    except AttributeError:
        raise ValueError(f"unknown record column {column!r}") from None
    if any(v is None or not np.isfinite(v) or v <= 0.0 for v in values):
        raise NonPositiveValuesError(
            f"column {column!r} must be positive over the window")

    x = np.log(np.array([r.N for r in tail], dtype=float))
    y = np.log(np.array(values))
    if np.all(y == y[0]):
        # An exactly constant column has slope 0 and an undefined R^2
        # (0/0); pin it rather than divide round-off by round-off.
        return 0.0, float(y[0]), 1.0
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = y - y.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 - float(residual @ residual) / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)
