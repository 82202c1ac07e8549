"""Noiseless GP interpolation and cubature with closed-form scale MLE.

The pieces, bottom up: ``specfun`` (Gamma, Bessel K_nu, normal quantile),
``kernels`` (Matern and Brownian-motion families plus kernel expansions),
``pointsets`` (grids, van der Corput sequences, fill/separation geometry),
``gp`` (conditioning, the scale MLE, credible intervals and scores),
``cubature`` (kernel mean embeddings and integral posteriors) and
``experiments`` (deterministic rate sweeps). ``cli`` exposes the sweeps
as the ``scalegp`` command.
"""

from .cubature import (CubatureResult, Embedding, cubature, make_embedding,
                       trapezoid_reference, underconfidence_diagnostic)
from .exceptions import (ConfigError, DegenerateScoreError,
                         FactorizationError, InsufficientDataError,
                         KernelMismatchError, NonPositiveValuesError,
                         QuadratureError)
from .experiments import (CurveRecord, ExperimentConfig, fit_rate,
                          run_cubature_curve, run_mle_curve,
                          smoothness_of_expansion, theoretical_exponent,
                          true_integral)
from .gp import CredibleInterval, MLScaleGP
from .kernels import (FAMILIES, BrownianMotion, FunctionExpansion, Kernel,
                      Matern, ReleasedIBM, make_kernel)
from .pointsets import (Geometry, PointSet, cartesian_product, geometry,
                        uniform_grid, van_der_corput)

__version__ = "0.1.0"

__all__ = [
    "BrownianMotion", "ConfigError", "CredibleInterval", "CubatureResult",
    "CurveRecord", "DegenerateScoreError", "Embedding", "ExperimentConfig",
    "FAMILIES", "FactorizationError", "FunctionExpansion", "Geometry",
    "InsufficientDataError", "Kernel", "KernelMismatchError", "MLScaleGP",
    "Matern", "NonPositiveValuesError", "PointSet", "QuadratureError",
    "ReleasedIBM", "cartesian_product", "cubature", "fit_rate", "geometry",
    "make_embedding", "make_kernel", "run_cubature_curve", "run_mle_curve",
    "smoothness_of_expansion", "theoretical_exponent",
    "trapezoid_reference", "true_integral", "underconfidence_diagnostic",
    "uniform_grid", "van_der_corput",
]
