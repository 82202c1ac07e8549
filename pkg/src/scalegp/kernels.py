"""Positive-definite kernel families and finite kernel expansions.

Three families are shipped, each on the domain Omega = [0,1]^d:

* ``Matern(nu, lengthscale)``: the stationary Matern kernel

      K(x, y) = sigma^2 * 2^(1-nu)/Gamma(nu) * u^nu * K_nu(u),
      u = sqrt(2 nu) ||x - y|| / lengthscale,

  whose reproducing kernel Hilbert space is norm-equivalent to the Sobolev
  space of order alpha = nu + d/2.
* ``BrownianMotion``: K(x, y) = sigma^2 * min(x, y) on [0,1], order 1.
* ``ReleasedIBM``: once-integrated Brownian motion with released (free)
  initial value and slope,

      K(x, y) = sigma^2 * (1 + xy + min(x,y)^3/3 + |x-y| min(x,y)^2/2),

  whose RKHS is the full second-order Sobolev space on [0,1], order 2.

All families carry a scale parameter sigma with K_sigma = sigma^2 K_1; the
scaled value is always produced by a single multiplication of the unit-scale
value, so scaling is exact in floating point. The unit-scale matrices that
the GP layer factorizes are available separately.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator

from . import specfun
from .exceptions import KernelMismatchError
from .validation import check_points, check_positive, check_unit_cube, check_vector

__all__ = ["Kernel", "Matern", "BrownianMotion", "ReleasedIBM",
           "FunctionExpansion", "make_kernel", "FAMILIES"]

# Below this scaled distance the general Matern path switches to its limit
# value: u^nu * K_nu(u) is 0 * inf at u = 0 and cancels catastrophically
# nearby.
_MATERN_LIMIT_THRESHOLD = 1e-8
# Half-integer detection tolerance for the closed-form fast path.
_HALF_INTEGER_TOL = 1e-12


def _matern_unit_half_integer(u, n):
    """Unit Matern for nu = n + 1/2 as exp(-u) times a degree-n polynomial."""
    u = np.asarray(u, dtype=float)
    # Coefficients of the polynomial in (2u), highest power first. Each is
    # the exact rational n!(n+i)! / ((2n)! i! (n-i)!) rounded once; the
    # constant term is exactly 1, so K(x, x) = 1 holds bitwise.
    coeffs = [
        float(Fraction(math.factorial(n) * math.factorial(n + i),
                       math.factorial(2 * n) * math.factorial(i)
                       * math.factorial(n - i)))
        for i in range(n + 1)
    ]
    return np.exp(-u) * np.polyval(coeffs, 2.0 * u)


def _matern_unit_general(u, nu):
    """Unit Matern through the Bessel form, with the r = 0 limit branch."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    far = u >= _MATERN_LIMIT_THRESHOLD
    if np.any(far):
        uf = u[far]
        const = 2.0 ** (1.0 - nu) / specfun.gamma(nu)
        out[far] = const * uf ** nu * specfun._kv(nu, uf)
    return out


def _matern_unit(u, nu):
    """Unit-scale Matern value as a function of u = sqrt(2 nu) r / l."""
    half = nu - 0.5
    n = int(round(half))
    if n >= 0 and abs(half - n) < _HALF_INTEGER_TOL:
        return _matern_unit_half_integer(u, n)
    return _matern_unit_general(u, nu)


class Kernel(BaseEstimator):
    """Base class: scale handling, Gram assembly and scalar evaluation.

    Subclasses implement ``_unit_cross`` (unit-scale cross-covariance
    matrix) and ``_unit_diag``, set the class attributes ``family`` and
    ``requires_unit_cube``, and expose ``sobolev_order``.
    """

    family = None
    requires_unit_cube = False

    def _check_points(self, X, name="X"):
        X = check_points(X, dim=self.dim, name=name)
        if self.requires_unit_cube:
            check_unit_cube(X, name=name)
        return X

    def __call__(self, x, y):
        """Kernel value K(x, y) including the sigma^2 factor."""
        x = self._check_points(x, name="x")
        y = self._check_points(y, name="y")
        if x.shape[0] != 1 or y.shape[0] != 1:
            raise ValueError("scalar evaluation takes single points; use gram()")
        return self.sigma * self.sigma * float(self._unit_cross(x, y)[0, 0])

    def gram(self, X, Y=None):
        """Covariance matrix including the sigma^2 factor."""
        return self.sigma * self.sigma * self.unit_gram(X, Y)

    def unit_gram(self, X, Y=None):
        """Covariance matrix of the unit-scale (sigma = 1) kernel."""
        X = self._check_points(X)
        Y = X if Y is None else self._check_points(Y, name="Y")
        return self._unit_cross(X, Y)

    def unit_diag(self, X):
        """Diagonal K(x, x) of the unit-scale kernel, one value per row."""
        X = self._check_points(X)
        return self._unit_diag(X)

    # Subclass surface ----------------------------------------------------
    def _unit_cross(self, X, Y):
        raise NotImplementedError

    def _unit_diag(self, X):
        raise NotImplementedError

    @property
    def sobolev_order(self):
        """Smoothness order of the reproducing kernel Hilbert space."""
        raise NotImplementedError

    def unit_equals(self, other):
        """Whether two kernels define the same unit-scale function."""
        if type(self) is not type(other):
            return False
        mine = {k: v for k, v in self.get_params().items() if k != "sigma"}
        theirs = {k: v for k, v in other.get_params().items() if k != "sigma"}
        return mine == theirs


class Matern(Kernel):
    """Matern kernel with smoothness ``nu`` and lengthscale ``lengthscale``.

    Half-integer orders take the closed-form exponential-polynomial path;
    other orders evaluate the Bessel form. Sobolev order is nu + dim/2.

    Parameters
    ----------
    nu : float > 0
        Smoothness parameter.
    lengthscale : float > 0
    dim : int, 1 or 2
        Ambient dimension of the points.
    sigma : float > 0, default 1.0
        Scale parameter; K_sigma = sigma^2 K_1.
    """

    family = "matern"
    requires_unit_cube = False

    def __init__(self, nu=1.5, lengthscale=1.0, dim=1, sigma=1.0):
        self.nu = check_positive(nu, "nu")
        self.lengthscale = check_positive(lengthscale, "lengthscale")
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        self.dim = int(dim)
        self.sigma = check_positive(sigma, "sigma")

    def _unit_cross(self, X, Y):
        u = math.sqrt(2.0 * self.nu) / self.lengthscale * cdist(X, Y)
        return _matern_unit(u, self.nu)

    def _unit_diag(self, X):
        return np.ones(X.shape[0])

    @property
    def sobolev_order(self):
        return self.nu + self.dim / 2.0


class BrownianMotion(Kernel):
    """Brownian motion kernel K(x, y) = min(x, y) on [0,1].

    The sample paths start pinned at zero, so the Gram matrix of any set
    containing the point 0 is singular and the fit will refuse it. Sobolev
    order 1.
    """

    family = "brownian_motion"
    requires_unit_cube = True
    dim = 1

    def __init__(self, sigma=1.0):
        self.sigma = check_positive(sigma, "sigma")

    def _unit_cross(self, X, Y):
        return np.minimum.outer(X[:, 0], Y[:, 0])

    def _unit_diag(self, X):
        return X[:, 0].copy()

    @property
    def sobolev_order(self):
        return 1.0


class ReleasedIBM(Kernel):
    """Integrated Brownian motion on [0,1] with released value and slope.

    K(x, y) = 1 + xy + min(x,y)^3/3 + |x - y| min(x,y)^2/2. The RKHS is the
    second-order Sobolev space on [0,1]; Sobolev order 2.
    """

    family = "released_ibm"
    requires_unit_cube = True
    dim = 1

    def __init__(self, sigma=1.0):
        self.sigma = check_positive(sigma, "sigma")

    def _unit_cross(self, X, Y):
        x = X[:, 0]
        y = Y[:, 0]
        mn = np.minimum.outer(x, y)
        gap = np.abs(np.subtract.outer(x, y))
        return 1.0 + np.outer(x, y) + mn ** 3 / 3.0 + gap * mn ** 2 / 2.0

    def _unit_diag(self, X):
        x = X[:, 0]
        return 1.0 + x * x + x ** 3 / 3.0

    @property
    def sobolev_order(self):
        return 2.0


FAMILIES = {
    "matern": Matern,
    "brownian_motion": BrownianMotion,
    "released_ibm": ReleasedIBM,
}


def make_kernel(family, nu=None, lengthscale=None, dim=1, sigma=1.0):
    """Construct a kernel from its family name and parameters.

    ``nu`` and ``lengthscale`` apply to the Matern family only; passing
    them for the Brownian families is an error, as is omitting them for
    Matern.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; "
                         f"expected one of {sorted(FAMILIES)}")
    if family == "matern":
        if nu is None or lengthscale is None:
            raise ValueError("matern kernels require nu and lengthscale")
        return Matern(nu=nu, lengthscale=lengthscale, dim=dim, sigma=sigma)
    if nu is not None or lengthscale is not None:
        raise ValueError(f"{family} takes no nu/lengthscale parameters")
    if dim != 1:
        raise ValueError(f"{family} is defined on [0,1] only (dim=1)")
    return FAMILIES[family](sigma=sigma)


class FunctionExpansion:
    """Finite expansion f(x) = sum_i a_i K_(eta,l)(x, z_i) in a Matern kernel.

    The expansion lies in the RKHS of its own kernel with exactly computable
    norm ||f||^2 = a' K_zz a, and has Fourier-decay smoothness 2 eta + d/2.

    Parameters
    ----------
    eta : float > 0
        Smoothness of the generating Matern kernel.
    lengthscale : float > 0
    coefficients : array-like of shape (m,)
    centers : array-like of shape (m, dim)
        Distinct points in [0,1]^dim.
    dim : int, 1 or 2
    """

    def __init__(self, eta, lengthscale, coefficients, centers, dim=1):
        self.eta = check_positive(eta, "eta")
        self.lengthscale = check_positive(lengthscale, "lengthscale")
        self.dim = int(dim)
        self.coefficients = check_vector(coefficients, name="coefficients")
        self.centers = check_unit_cube(
            check_points(centers, dim=self.dim, name="centers"), name="centers")
        if self.coefficients.shape[0] != self.centers.shape[0]:
            raise ValueError("coefficients and centers must have equal length")
        if self.coefficients.shape[0] < 1:
            raise ValueError("expansion needs at least one term")
        if self.centers.shape[0] > 1:
            diff = cdist(self.centers, self.centers)
            np.fill_diagonal(diff, np.inf)
            if diff.min() == 0.0:
                raise ValueError("centers must be distinct")
        self._kernel = Matern(nu=self.eta, lengthscale=self.lengthscale,
                              dim=self.dim)

    def __call__(self, X):
        """Evaluate the expansion at one point or an array of points."""
        X = check_points(X, dim=self.dim, name="X")
        values = self._kernel.unit_gram(X, self.centers) @ self.coefficients
        if values.shape[0] == 1:
            return float(values[0])
        return values

    def _check_matching(self, kernel):
        # The RKHS norm below is meaningful only for the expansion's own
        # unit-scale kernel.
        if not isinstance(kernel, Matern):
            raise KernelMismatchError(
                f"expansion kernel is matern, got {kernel.family}")
        if kernel.sigma != 1.0:
            raise KernelMismatchError("RKHS norms are defined at unit scale; "
                                      f"kernel has sigma={kernel.sigma}")
        if not kernel.unit_equals(self._kernel):
            raise KernelMismatchError(
                "kernel parameters do not match the expansion: "
                f"(nu={kernel.nu}, lengthscale={kernel.lengthscale}, "
                f"dim={kernel.dim}) vs (eta={self.eta}, "
                f"lengthscale={self.lengthscale}, dim={self.dim})")

    def rkhs_norm_sq(self, kernel):
        """Squared RKHS norm a' K_zz a in the matching kernel's space."""
        self._check_matching(kernel)
        gram = self._kernel.unit_gram(self.centers)
        value = float(self.coefficients @ gram @ self.coefficients)
        # The quadratic form is nonnegative; round-off may dip below zero
        # for near-singular center sets.
        return max(value, 0.0)

    def rkhs_norm(self, kernel):
        """RKHS norm sqrt(a' K_zz a); zero iff all coefficients vanish."""
        return math.sqrt(self.rkhs_norm_sq(kernel))
