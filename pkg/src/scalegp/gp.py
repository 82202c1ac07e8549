"""Noiseless Gaussian-process conditioning with closed-form scale MLE.

Observing f exactly on X = {x_1, ..., x_N} conditions the prior
GP(0, sigma^2 K) to a posterior whose mean

    s(x) = k_X(x)' K_X^{-1} f_X

interpolates the data and does not depend on sigma, and whose covariance

    sigma^2 P_X(x, y),   P_X(x, y) = K(x, y) - k_X(x)' K_X^{-1} k_X(y)

does not depend on f. The scale maximizing the marginal likelihood is
available in closed form,

    sigma_ml = sqrt(f_X' K_X^{-1} f_X / N),

computed here with two triangular solves against the unit-scale Gram
factor; no iterative optimization is involved. sigma_ml equals
N^{-1/2} times the RKHS norm of the interpolant, which is what makes the
MLE-scaled credible widths sigma_ml * sqrt(P_X(x,x)) track the actual
interpolation error.

Factorization is unpivoted Cholesky without jitter: a failure means the
model as posed is numerically singular, and silently regularizing it would
change the noiseless model everything downstream assumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import specfun
from .exceptions import DegenerateScoreError, FactorizationError
from .kernels import Kernel
from .validation import check_vector

__all__ = ["MLScaleGP", "CredibleInterval"]

# Negative conditional variances above this magnitude are round-off and
# clamp to zero; anything larger means the factorization is unusable.
_VARIANCE_CLAMP = -1e-8
# Absolute threshold of the 0/0 = 1 convention for standard scores.
_SCORE_EPS = 1e-14


@dataclass(frozen=True)
class CredibleInterval:
    """Central credible interval center +- half_width at the given level.

    ``psi`` is the standard normal quantile F^{-1}(1 - a/2) for
    level = 1 - a; half_width = psi * sigma_ml * sqrt(P_X(x,x)).
    """

    center: float
    half_width: float
    level: float
    psi: float


def _fsum_sq(c):
    """Compensated sum of squares; the last dot of a quadratic form."""
    return math.fsum((c * c).tolist())


class MLScaleGP(BaseEstimator):
    """Noiseless GP interpolant with maximum-likelihood scale.

    Parameters
    ----------
    kernel : Kernel
        Prior covariance family. Conditioning uses the unit-scale Gram
        matrix throughout; the kernel's own sigma enters only the
        ``variance`` accessor, while credible widths and scores use the
        fitted ``sigma_ml_``.

    Attributes (after fit)
    ----------------------
    X_ : ndarray of shape (N, d)
        Design points.
    y_ : ndarray of shape (N,)
        Observed values f(x_i).
    chol_ : ndarray of shape (N, N)
        Lower Cholesky factor of the unit-scale Gram matrix.
    weights_ : ndarray of shape (N,)
        Solution of K_X w = f_X at unit scale.
    quad_form_ : float
        f_X' K_X^{-1} f_X >= 0.
    sigma_ml_ : float
        sqrt(quad_form_ / N).
    log_det_ : float
        log det K_X at unit scale.

    Examples
    --------
    >>> from scalegp.kernels import BrownianMotion
    >>> gp = MLScaleGP(BrownianMotion()).fit([0.5, 1.0], [1.0, 2.0])
    >>> gp.quad_form_, gp.sigma_ml_
    (4.0, 1.4142135623730951)
    """

    def __init__(self, kernel):
        self.kernel = kernel

    def fit(self, X, y):
        """Condition on exact observations y at points X.

        Raises FactorizationError when the Gram matrix is not positive
        definite to machine precision (coincident or near-coincident
        points, or a kernel evaluated far below its resolvable scale).
        """
        if not isinstance(self.kernel, Kernel):
            raise ValueError("kernel must be a Kernel instance, "
                             f"got {type(self.kernel).__name__}")
        X = self.kernel._check_points(X)
        if X.shape[0] < 1:
            raise ValueError("fit requires at least one point")
        y = check_vector(y, n=X.shape[0], name="y")

        gram = self.kernel.unit_gram(X)
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"unit-scale Gram matrix of {X.shape[0]} points is not "
                f"positive definite: {exc}") from None

        half = solve_triangular(chol, y, lower=True)
        weights = solve_triangular(chol, half, lower=True, trans="T")

        self.X_ = X
        self.y_ = y
        self.n_samples_ = X.shape[0]
        self.chol_ = chol
        self.weights_ = weights
        self.quad_form_ = _fsum_sq(half)
        self.sigma_ml_ = math.sqrt(self.quad_form_ / self.n_samples_)
        self.log_det_ = 2.0 * math.fsum(np.log(np.diag(chol)).tolist())
        # Bitwise row index of the design; conditional variance at a point
        # that is literally a design point is zero by exact cancellation in
        # the mathematics, so it is pinned to zero rather than left to
        # round-off (whose sign is arbitrary).
        self._row_index = {row.tobytes() for row in X}
        return self

    # Queries ---------------------------------------------------------------

    def _cross(self, X):
        """Unit-scale k_X(x) columns for each query row; checked input."""
        X = self.kernel._check_points(X)
        return X, self.kernel.unit_gram(self.X_, X)

    def predict(self, X, return_std=False):
        """Conditional mean at X; optionally the MLE-scaled standard deviation.

        The mean is scale-free. The optional std is
        sigma_ml_ * sqrt(P_X(x,x)), the half-width unit of the credible
        intervals, not the prior-sigma posterior deviation (see
        ``variance`` for that).
        """
        check_is_fitted(self)
        X, cross = self._cross(X)
        mean = cross.T @ self.weights_
        if X.shape[0] == 1:
            mean = float(mean[0])
        if not return_std:
            return mean
        var1 = self.unit_variance(X)
        std = self.sigma_ml_ * np.sqrt(var1)
        return mean, float(std) if np.isscalar(var1) else std

    def unit_variance(self, X):
        """Conditional variance P_X(x,x) of the unit-scale kernel.

        Exactly zero at design points (bitwise match); elsewhere negative
        round-off above -1e-8 clamps to zero and anything below raises
        FactorizationError.
        """
        check_is_fitted(self)
        X, cross = self._cross(X)
        half = solve_triangular(self.chol_, cross, lower=True)
        var = self.kernel.unit_diag(X) - np.einsum("ij,ij->j", half, half)
        hit = np.fromiter((row.tobytes() in self._row_index for row in X),
                          dtype=bool, count=X.shape[0])
        var[hit] = 0.0
        if var.min() < _VARIANCE_CLAMP:
            raise FactorizationError(
                f"conditional variance {var.min():.3e} is negative beyond "
                "round-off; the factorization is not trustworthy")
        np.maximum(var, 0.0, out=var)
        if X.shape[0] == 1:
            return float(var[0])
        return var

    def variance(self, X):
        """Posterior variance sigma^2 P_X(x,x) at the kernel's own scale."""
        return self.kernel.sigma ** 2 * self.unit_variance(X)

    def log_marginal_likelihood(self, sigma=None):
        """Log marginal likelihood of the data under scale sigma.

        -1/2 (quad_form/sigma^2 + N log sigma^2 + log det K_X + N log 2pi),
        maximized over sigma at sigma_ml_. Defaults to sigma_ml_, which
        requires a nonzero observation vector.
        """
        check_is_fitted(self)
        if sigma is None:
            sigma = self.sigma_ml_
        if not np.isfinite(sigma) or sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}; "
                             "a zero observation vector has no MLE scale")
        return -0.5 * (self.quad_form_ / sigma ** 2
                       + self.n_samples_ * math.log(sigma ** 2)
                       + self.log_det_
                       + self.n_samples_ * math.log(2.0 * math.pi))

    def credible_interval(self, X, a=0.05):
        """Central 1-a credible interval(s) at X.

        half_width = psi_a * sigma_ml_ * sqrt(P_X(x,x)) with
        psi_a = F^{-1}(1 - a/2); zero half-width at design points is
        legitimate (the model is certain there).
        """
        check_is_fitted(self)
        if not 0.0 < a < 1.0:
            raise ValueError(f"a must lie in (0, 1), got {a}")
        psi = specfun.inv_norm_cdf(1.0 - a / 2.0)
        mean = self.predict(X)
        var1 = self.unit_variance(X)
        if np.isscalar(mean):
            return CredibleInterval(mean, psi * self.sigma_ml_
                                    * math.sqrt(var1), 1.0 - a, psi)
        width = psi * self.sigma_ml_ * np.sqrt(var1)
        return [CredibleInterval(float(m), float(w), 1.0 - a, psi)
                for m, w in zip(mean, width)]

    def standard_score(self, X, f_true):
        """|f_true - mean| / (sigma_ml_ * sqrt(P_X(x,x))), with 0/0 = 1.

        Both numerator and denominator below 1e-14 return 1 (the model is
        exactly right where it is exactly certain, as at design points).
        A denominator below 1e-14 against a larger numerator has no
        defined value and raises DegenerateScoreError.
        """
        check_is_fitted(self)
        mean = self.predict(X)
        var1 = self.unit_variance(X)
        scalar = np.isscalar(mean)
        mean = np.atleast_1d(mean)
        var1 = np.atleast_1d(var1)
        f_true = np.broadcast_to(np.asarray(f_true, dtype=float),
                                 mean.shape).astype(float)
        if not np.all(np.isfinite(f_true)):
            raise ValueError("f_true must be finite")

        num = np.abs(f_true - mean)
        den = self.sigma_ml_ * np.sqrt(var1)
        tiny = den < _SCORE_EPS
        bad = tiny & (num >= _SCORE_EPS)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DegenerateScoreError(
                f"standard score {num[i]:.3e}/{den[i]:.3e} at query {i}: "
                "zero predictive width against a non-zero error")
        score = np.ones_like(num)
        np.divide(num, den, out=score, where=~tiny)
        if scalar:
            return float(score[0])
        return score

    # RKHS views ------------------------------------------------------------

    def rkhs_norm_of_mean(self):
        """RKHS norm of the interpolant, sqrt(quad_form_) = sqrt(N) sigma_ml_."""
        check_is_fitted(self)
        return math.sqrt(self.quad_form_)

    def rkhs_error(self, f):
        """RKHS distance ||f - s|| for a matching expansion f.

        The interpolant is the RKHS-orthogonal projection of f onto
        span{K(., x_i)}, so ||f - s||^2 = ||f||^2 - ||s||^2; the difference
        is clamped at zero against round-off.
        """
        check_is_fitted(self)
        norm_sq = f.rkhs_norm_sq(self._unit_kernel())
        return math.sqrt(max(0.0, norm_sq - self.quad_form_))

    def _unit_kernel(self):
        """The fitted kernel at sigma = 1 (RKHS norms live at unit scale)."""
        if self.kernel.sigma == 1.0:
            return self.kernel
        params = self.kernel.get_params()
        params["sigma"] = 1.0
        return type(self.kernel)(**params)
