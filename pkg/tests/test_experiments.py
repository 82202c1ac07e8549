"""Sweep harness: configs, curves, rate exponents and slope fits."""

import math

import numpy as np
import pytest

from scalegp.exceptions import (FactorizationError, InsufficientDataError,
                                NonPositiveValuesError)
from scalegp.experiments import (CurveRecord, ExperimentConfig, fit_rate,
                                 run_cubature_curve, run_mle_curve,
                                 smoothness_of_expansion, theoretical_exponent,
                                 true_integral)
from scalegp.kernels import FunctionExpansion, Matern, ReleasedIBM


def expansion_1d(eta=0.5, coefficients=(1.0, 0.5, 0.2)):
    return FunctionExpansion(eta=eta, lengthscale=0.2,
                             coefficients=list(coefficients),
                             centers=[0.2, 0.55, 0.78])


def mle_config(**overrides):
    kwargs = dict(kernel=Matern(nu=2.0, lengthscale=0.2),
                  test_function=expansion_1d(),
                  design="uniform_grid",
                  n_range=tuple(range(10, 41, 5)))
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def test_theoretical_exponent_values():
    assert theoretical_exponent(2.0, 0.5, 1) == 0.5
    assert theoretical_exponent(0.5, 0.5, 1) == -0.5
    assert theoretical_exponent(3.0, 0.75, 2) == 0.25


def test_theoretical_exponent_validation():
    with pytest.raises(ValueError):
        theoretical_exponent(-1.0, 0.5, 1)
    with pytest.raises(ValueError):
        theoretical_exponent(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        theoretical_exponent(1.0, 0.5, 3)


def test_smoothness_of_expansion():
    assert smoothness_of_expansion(expansion_1d(eta=0.5)) == 1.5
    assert smoothness_of_expansion(expansion_1d(eta=0.25)) == 1.0
    f2 = FunctionExpansion(eta=0.75, lengthscale=0.8, coefficients=[1.0],
                           centers=[[0.5, 0.5]], dim=2)
    assert smoothness_of_expansion(f2) == 2.5
    with pytest.raises(ValueError):
        smoothness_of_expansion(lambda x: x)


def test_true_integral_against_closed_form():
    # eta = 1/2 in d=1 is the exponential kernel, whose translates have
    # the elementary integral l (2 - e^(-z/l) - e^(-(1-z)/l)).
    f = expansion_1d()
    ell = 0.2
    expected = math.fsum(
        a * ell * (2.0 - math.exp(-z / ell) - math.exp(-(1.0 - z) / ell))
        for a, z in zip([1.0, 0.5, 0.2], [0.2, 0.55, 0.78]))
    assert true_integral(f) == pytest.approx(expected, abs=1e-10)


def test_true_integral_rejects_2d():
    f2 = FunctionExpansion(eta=0.75, lengthscale=0.8, coefficients=[1.0],
                           centers=[[0.5, 0.5]], dim=2)
    with pytest.raises(ValueError):
        true_integral(f2)


def test_config_validation():
    with pytest.raises(ValueError):
        mle_config(design="halton")
    with pytest.raises(ValueError):
        mle_config(n_range=(10, 10))
    with pytest.raises(ValueError):
        mle_config(n_range=(1, 5))
    with pytest.raises(ValueError):
        mle_config(n_range=())
    with pytest.raises(ValueError):
        mle_config(fit_window=0.0)
    with pytest.raises(ValueError):
        mle_config(geometry_resolution=32)
    with pytest.raises(ValueError):
        mle_config(kernel="matern")
    with pytest.raises(ValueError):
        mle_config(design="cartesian_grid")  # d=2 design, d=1 kernel


def test_config_dim_and_resolution_defaults():
    cfg = mle_config()
    assert cfg.dim == 1
    assert cfg.resolution == 512
    f2 = FunctionExpansion(eta=0.75, lengthscale=0.8, coefficients=[1.0],
                           centers=[[0.5, 0.5]], dim=2)
    cfg2 = ExperimentConfig(kernel=Matern(nu=1.5, lengthscale=0.8, dim=2),
                            test_function=f2, design="cartesian_grid",
                            n_range=(2, 3, 4))
    assert cfg2.dim == 2
    assert cfg2.resolution == 256


def test_run_mle_curve_zero_function():
    cfg = mle_config(test_function=expansion_1d(coefficients=(0.0, 0.0, 0.0)))
    records = run_mle_curve(cfg)
    assert [r.sigma_ml for r in records] == [0.0] * len(records)


def test_run_mle_curve_record_contents():
    cfg = mle_config()
    records = run_mle_curve(cfg)
    assert [r.N for r in records] == list(cfg.n_range)
    for r in records:
        assert r.sigma_ml > 0.0
        assert r.sup_error > 0.0
        assert r.rho == 1.0  # uniform grids are exactly quasi-uniform
        assert r.h == r.q == 0.5 / (r.N - 1)
        assert r.abs_int_error is None and r.score is None


def test_run_mle_curve_cartesian_squares_n():
    f2 = FunctionExpansion(eta=0.75, lengthscale=0.8, coefficients=[1.0],
                           centers=[[0.5, 0.5]], dim=2)
    cfg = ExperimentConfig(kernel=Matern(nu=1.5, lengthscale=0.8, dim=2),
                           test_function=f2, design="cartesian_grid",
                           n_range=(2, 3, 5), geometry_resolution=64)
    records = run_mle_curve(cfg)
    assert [r.N for r in records] == [4, 9, 25]


def test_run_mle_curve_requires_matern():
    cfg = mle_config()
    object.__setattr__(cfg, "kernel", ReleasedIBM())
    with pytest.raises(ValueError):
        run_mle_curve(cfg)


def test_run_mle_curve_deterministic_across_threads():
    cfg = mle_config()
    assert run_mle_curve(cfg, threads=1) == run_mle_curve(cfg, threads=4)


def test_run_mle_curve_annotates_factorization_failure():
    # A very smooth kernel on a dense grid is numerically singular.
    cfg = mle_config(kernel=Matern(nu=6.5, lengthscale=1.0),
                     n_range=(8, 128))
    with pytest.raises(FactorizationError, match="N=128"):
        run_mle_curve(cfg)


def test_run_mle_curve_in_rkhs_ceiling():
    # nu = eta with matching lengthscale: sigma_ml sqrt(N) <= ||f||.
    f = expansion_1d(eta=1.5)
    cfg = mle_config(kernel=Matern(nu=1.5, lengthscale=0.2),
                     test_function=f)
    bound = f.rkhs_norm(Matern(nu=1.5, lengthscale=0.2))
    for r in run_mle_curve(cfg):
        assert r.sigma_ml * math.sqrt(r.N) <= bound + 1e-10


def cubature_config(eta=0.25, coefficients=(1.0, 2.0, 0.5), **overrides):
    f = FunctionExpansion(eta=eta, lengthscale=0.7,
                          coefficients=list(coefficients),
                          centers=[0.125, 0.5, 0.75])
    kwargs = dict(kernel=ReleasedIBM(), test_function=f,
                  design="van_der_corput", n_range=tuple(range(4, 33, 4)))
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def test_run_cubature_curve_records():
    records = run_cubature_curve(cubature_config())
    truth = true_integral(cubature_config().test_function)
    for r in records:
        assert r.sup_error is None
        assert r.sqrt_V > 0.0
        assert r.score >= 0.0
        assert r.abs_int_error == pytest.approx(abs(truth - r.q_value),
                                                rel=1e-12, abs=1e-15)


def test_run_cubature_curve_zero_function_scores_one():
    records = run_cubature_curve(cubature_config(coefficients=(0.0, 0.0, 0.0)))
    assert all(r.score == 1.0 for r in records)
    assert all(r.sigma_ml == 0.0 for r in records)


def test_run_cubature_curve_preconditions():
    with pytest.raises(ValueError):
        run_cubature_curve(cubature_config(design="uniform_grid"))
    cfg = cubature_config()
    object.__setattr__(cfg, "kernel", Matern(nu=1.5, lengthscale=0.2))
    with pytest.raises(ValueError):
        run_cubature_curve(cfg)


def test_run_cubature_curve_deterministic_across_threads():
    cfg = cubature_config()
    assert run_cubature_curve(cfg, threads=1) == run_cubature_curve(cfg, threads=3)


def synthetic_records(ns, values):
    return [CurveRecord(N=n, sigma_ml=v) for n, v in zip(ns, values)]


def test_fit_rate_recovers_power_law():
    ns = list(range(10, 60, 5))
    for p, c in ((0.5, 2.0), (-1.25, 0.3), (0.0, 1.7)):
        records = synthetic_records(ns, [c * n ** p for n in ns])
        slope, intercept, r2 = fit_rate(records, "sigma_ml", window=1.0)
        assert slope == pytest.approx(p, abs=1e-10)
        assert intercept == pytest.approx(math.log(c), abs=1e-9)
        assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_rate_constant_column():
    records = synthetic_records(range(10, 20), [3.0] * 10)
    slope, _, r2 = fit_rate(records, "sigma_ml", window=1.0)
    assert slope == pytest.approx(0.0, abs=1e-14)
    assert r2 == 1.0


def test_fit_rate_uses_only_the_tail_window():
    # First half flat, second half an exact power law: the tail window
    # must see only the latter.
    ns = list(range(1, 21))
    values = [1.0] * 10 + [float(n * n) for n in ns[10:]]
    records = synthetic_records(ns, values)
    slope, _, _ = fit_rate(records, "sigma_ml", window=0.5)
    assert slope == pytest.approx(2.0, abs=1e-10)


def test_fit_rate_sorts_records_by_n():
    ns = [30, 10, 50, 20, 40]
    records = synthetic_records(ns, [float(n) for n in ns])
    slope, _, _ = fit_rate(records, "sigma_ml", window=1.0)
    assert slope == pytest.approx(1.0, abs=1e-12)


def test_fit_rate_errors():
    good = synthetic_records(range(2, 12), [1.0] * 10)
    with pytest.raises(InsufficientDataError):
        fit_rate(good[:4], "sigma_ml", window=1.0)
    with pytest.raises(InsufficientDataError):
        fit_rate(good, "sigma_ml", window=0.3)  # ceil(3) < 5
    with pytest.raises(NonPositiveValuesError):
        fit_rate(synthetic_records(range(2, 12), [1.0] * 9 + [0.0]),
                 "sigma_ml", window=1.0)
    with pytest.raises(NonPositiveValuesError):
        fit_rate(good, "sup_error", window=1.0)  # column is all None
    with pytest.raises(ValueError):
        fit_rate(good, "no_such_column", window=1.0)
    with pytest.raises(ValueError):
        fit_rate(good, "sigma_ml", window=1.5)
