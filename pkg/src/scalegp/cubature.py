"""Bayesian cubature of unweighted Lebesgue integrals on [0,1]^d.

Pushing the conditioned GP through the integral I(f) = int f(x) dx gives a
Gaussian posterior for the integral whose mean and unit-scale variance are

    Q = z' K_X^{-1} f_X,    V = E - z' K_X^{-1} z,

with the kernel mean z_i = int K(x_i, y) dy and the initial energy
E = int int K(x, y) dx dy. Both integrals ship in closed form for the
Brownian-motion kernels; the Matern family has no elementary antiderivative
and uses composite Gauss-Legendre panels, doubled until two successive
refinements agree.

For the Brownian-motion kernel on equispaced points n/N the cubature mean
collapses to the composite trapezoidal rule and V = 1/(12 N^2) exactly;
``trapezoid_reference`` provides that classical rule as an independent
comparison path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_triangular

from .exceptions import (DegenerateScoreError, FactorizationError,
                         KernelMismatchError, QuadratureError)
from .gp import _SCORE_EPS, _VARIANCE_CLAMP
from .kernels import FAMILIES, Kernel, Matern

__all__ = ["Embedding", "CubatureResult", "make_embedding", "cubature",
           "trapezoid_reference", "underconfidence_diagnostic"]

CLOSED_FORM = "closed_form"
NUMERIC_QUADRATURE = "numeric_quadrature"

# Gauss-Legendre nodes per panel. High enough that smooth pieces converge
# in one or two doublings; kinks are handled by splitting, not by order.
_GL_NODES = 16
_MAX_DOUBLINGS = 15


@dataclass(frozen=True)
class Embedding:
    """Kernel mean x -> int K(x,y) dy and initial energy int int K.

    Everything is at unit scale (sigma = 1); the scale enters cubature
    results only through sigma_ml. ``kernel`` records the unit-scale
    kernel the embedding was built from so that cubature can refuse a
    mismatched fit. Integration is against the unweighted Lebesgue
    measure on [0,1]^d.
    """

    kernel_mean: Callable[..., float]
    initial_energy: float
    method: str
    tol: float
    kernel: Kernel

    def __post_init__(self):
        if self.initial_energy <= 0.0:
            raise ValueError("initial_energy must be positive, got "
                             f"{self.initial_energy}")


@dataclass(frozen=True)
class CubatureResult:
    """Posterior integral mean Q, unit-scale variance V, width and score.

    R_bc = sigma_ml * sqrt(V) is the unscaled credible width of the
    integral; ``score`` is |I - Q| / R_bc against the supplied true
    integral, or None when no truth was given.
    """

    Q: float
    V: float
    R_bc: float
    score: Optional[float]


# Closed forms --------------------------------------------------------------

def _scalar(p):
    x = np.asarray(p, dtype=float).reshape(-1)
    if x.shape[0] != 1:
        raise ValueError(f"expected a single 1-d point, got shape {x.shape}")
    return float(x[0])


def _bm_kernel_mean(p):
    """int_0^1 min(x, y) dy = x - x^2/2."""
    x = _scalar(p)
    return x - 0.5 * x * x


def _released_ibm_kernel_mean(p):
    """int_0^1 (1 + xy + min^3/3 + |x-y| min^2/2) dy.

    Integrating the min/|x-y| terms piecewise over y < x and y > x gives
    the quartic 1 + x/2 + x^2/4 - x^3/6 + x^4/24.
    """
    x = _scalar(p)
    return 1.0 + x * (0.5 + x * (0.25 + x * (-1.0 / 6.0 + x / 24.0)))


# The double integrals of the corresponding closed forms:
# int_0^1 (x - x^2/2) dx and int_0^1 ribm_mean(x) dx.
_BM_INITIAL_ENERGY = 1.0 / 3.0
_RELEASED_IBM_INITIAL_ENERGY = 13.0 / 10.0

_CLOSED_FORMS = {
    "brownian_motion": (_bm_kernel_mean, _BM_INITIAL_ENERGY),
    "released_ibm": (_released_ibm_kernel_mean, _RELEASED_IBM_INITIAL_ENERGY),
}


# Composite Gauss-Legendre with doubling ------------------------------------

def _gl_rule(panels, a, b):
    """Nodes and weights of a composite rule with the given panel count."""
    nodes, weights = leggauss(_GL_NODES)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def _integrate_1d(f, a, b, tol):
    """Integral of a vectorized integrand, doubling panels until stable."""
    if b - a <= 0.0:
        return 0.0
    previous = None
    panels = 1
    for _ in range(_MAX_DOUBLINGS):
        x, w = _gl_rule(panels, a, b)
        value = float(w @ np.asarray(f(x), dtype=float))
        if previous is not None and abs(value - previous) <= tol:
            return value
        previous = value
        panels *= 2
    raise QuadratureError(
        f"quadrature on [{a}, {b}] did not stabilize to {tol} "
        f"within {panels} panels")


def _integrate_2d(f, rect, tol):
    """Tensor-product version of ``_integrate_1d`` over a rectangle."""
    (a1, b1), (a2, b2) = rect
    if b1 - a1 <= 0.0 or b2 - a2 <= 0.0:
        return 0.0
    previous = None
    panels = 1
    for _ in range(_MAX_DOUBLINGS):
        x1, w1 = _gl_rule(panels, a1, b1)
        x2, w2 = _gl_rule(panels, a2, b2)
        grid = np.stack([np.repeat(x1, x2.shape[0]),
                         np.tile(x2, x1.shape[0])], axis=1)
        w = np.outer(w1, w2).ravel()
        value = float(w @ np.asarray(f(grid), dtype=float))
        if previous is not None and abs(value - previous) <= tol:
            return value
        previous = value
        panels *= 2
    raise QuadratureError(
        f"quadrature on {rect} did not stabilize to {tol}")


def _numeric_kernel_mean(kernel, tol):
    """int K(x, y) dy by panels split at the diagonal kink y = x."""
    if kernel.dim == 1:
        def kernel_mean(p):
            x = _scalar(p)
            row = np.array([[x]])

            def slice_(y):
                return kernel.unit_gram(row, y.reshape(-1, 1))[0]

            return (_integrate_1d(slice_, 0.0, x, tol / 2.0)
                    + _integrate_1d(slice_, x, 1.0, tol / 2.0))
        return kernel_mean

    def kernel_mean(p):
        x = np.asarray(p, dtype=float).reshape(2)
        row = x.reshape(1, 2)

        def slice_(pts):
            return kernel.unit_gram(row, pts)[0]

        total = 0.0
        for seg1 in ((0.0, x[0]), (x[0], 1.0)):
            for seg2 in ((0.0, x[1]), (x[1], 1.0)):
                total += _integrate_2d(slice_, (seg1, seg2), tol / 4.0)
        return total
    return kernel_mean


def _numeric_initial_energy(kernel, tol):
    """int int K(x, y) dx dy, exploiting stationarity when available."""
    if isinstance(kernel, Matern):
        # For stationary K the double integral collapses onto the
        # distribution of the difference: in d=1,
        #   E = 2 int_0^1 (1 - t) phi(t) dt,
        # and in d=2 the product of triangular densities,
        #   E = 4 int_0^1 int_0^1 (1 - t1)(1 - t2) phi(||t||) dt.
        origin = np.zeros((1, kernel.dim))
        if kernel.dim == 1:
            def f(t):
                phi = kernel.unit_gram(origin, t.reshape(-1, 1))[0]
                return 2.0 * (1.0 - t) * phi
            return _integrate_1d(f, 0.0, 1.0, tol)

        def f(pts):
            phi = kernel.unit_gram(origin, pts)[0]
            return 4.0 * (1.0 - pts[:, 0]) * (1.0 - pts[:, 1]) * phi
        return _integrate_2d(f, ((0.0, 1.0), (0.0, 1.0)), tol)

    # Non-stationary 1-d kernels: integrate the (already numeric-safe)
    # kernel mean. The inner tolerance is tightened so the outer doubling
    # test is not chasing inner quadrature noise.
    mean = _numeric_kernel_mean(kernel, tol / 100.0)

    def f(x):
        return np.array([mean(v) for v in x])
    return _integrate_1d(f, 0.0, 1.0, tol)


def make_embedding(kernel, tol=1e-9, method=None):
    """Build the kernel mean embedding for a kernel at unit scale.

    The Brownian-motion families default to their closed forms; the Matern
    family has none and defaults to panel quadrature. Forcing
    ``method="numeric_quadrature"`` on a closed-form family is supported
    so the two routes can be compared.
    """
    if not isinstance(kernel, Kernel) or kernel.family not in FAMILIES:
        raise ValueError(f"unsupported kernel {kernel!r}")
    if method is None:
        method = NUMERIC_QUADRATURE if kernel.family == "matern" else CLOSED_FORM
    if method not in (CLOSED_FORM, NUMERIC_QUADRATURE):
        raise ValueError(f"unknown embedding method {method!r}")
    if kernel.dim > 2:
        raise ValueError("embeddings are available for d <= 2 only")

    if method == CLOSED_FORM:
        if kernel.family not in _CLOSED_FORMS:
            raise ValueError(f"{kernel.family} has no closed-form embedding; "
                             "use numeric_quadrature")
        kernel_mean, energy = _CLOSED_FORMS[kernel.family]
        return Embedding(kernel_mean, energy, CLOSED_FORM, 0.0, kernel)

    if not (np.isfinite(tol) and tol > 0.0):
        raise ValueError(f"tol must be positive, got {tol}")
    kernel_mean = _numeric_kernel_mean(kernel, tol)
    energy = _numeric_initial_energy(kernel, tol)
    return Embedding(kernel_mean, energy, NUMERIC_QUADRATURE, tol, kernel)


# Cubature ------------------------------------------------------------------

def cubature(fit, emb, true_integral=None):
    """Posterior for int f dx from a conditioned GP and a matching embedding.

    Q = sum_i w_i z_i with w = K_X^{-1} f_X, V = E - z' K_X^{-1} z clamped
    at zero, R_bc = sigma_ml sqrt(V). When ``true_integral`` is given the
    standard score |I - Q| / R_bc is attached, with 0/0 = 1 below the
    1e-14 threshold and DegenerateScoreError when only the width vanishes.
    """
    if not hasattr(fit, "chol_"):
        raise ValueError("fit must be a fitted MLScaleGP")
    if not emb.kernel.unit_equals(fit.kernel):
        raise KernelMismatchError(
            "embedding was built for a different kernel than the fit: "
            f"{emb.kernel!r} vs {fit.kernel!r}")

    z = np.array([emb.kernel_mean(row) for row in fit.X_], dtype=float)
    Q = math.fsum((fit.weights_ * z).tolist())
    half = solve_triangular(fit.chol_, z, lower=True)
    V = emb.initial_energy - math.fsum((half * half).tolist())
    if V < _VARIANCE_CLAMP:
        raise FactorizationError(
            f"cubature variance {V:.3e} is negative beyond round-off")
    V = max(V, 0.0)
    R_bc = fit.sigma_ml_ * math.sqrt(V)

    score = None
    if true_integral is not None:
        true_integral = float(true_integral)
        if not math.isfinite(true_integral):
            raise ValueError("true_integral must be finite")
        num = abs(true_integral - Q)
        if R_bc < _SCORE_EPS:
            if num >= _SCORE_EPS:
                raise DegenerateScoreError(
                    f"integral score {num:.3e}/{R_bc:.3e}: zero width "
                    "against a non-zero error")
            score = 1.0
        else:
            score = num / R_bc
    return CubatureResult(Q, V, R_bc, score)


def trapezoid_reference(f, N):
    """Composite trapezoidal rule on x_n = n/N, n = 0..N.

    The comparison target for Brownian-motion cubature: on those designs
    (with f(0) = 0 absorbing the pinned origin) the posterior mean Q is
    this rule exactly.
    """
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    values = [float(f(n / N)) for n in range(N + 1)]
    values[0] *= 0.5
    values[-1] *= 0.5
    return math.fsum(values) / N


def underconfidence_diagnostic(fit, resolution):
    """sqrt(N) times the L2 norm of the unit-scale predictive deviation.

    The integral of P_X(x, x) over [0,1]^d is approximated by the midpoint
    rule on a ``resolution``-per-axis lattice. For quasi-uniform designs
    under a kernel of order alpha > d this decays, which is the
    underconfidence side of the scale-MLE story.
    """
    if not hasattr(fit, "chol_"):
        raise ValueError("fit must be a fitted MLScaleGP")
    if not isinstance(resolution, (int, np.integer)) or resolution < 64:
        raise ValueError(f"resolution must be an integer >= 64, "
                         f"got {resolution!r}")
    resolution = int(resolution)
    dim = fit.X_.shape[1]
    mids = (np.arange(resolution) + 0.5) / resolution
    if dim == 1:
        pts = mids.reshape(-1, 1)
    else:
        pts = np.stack([np.repeat(mids, resolution),
                        np.tile(mids, resolution)], axis=1)

    total = 0.0
    chunk = 8192
    for start in range(0, pts.shape[0], chunk):
        block = np.atleast_1d(fit.unit_variance(pts[start:start + chunk]))
        total += math.fsum(block.tolist())
    integral = total / pts.shape[0]
    return math.sqrt(fit.n_samples_ * integral)
