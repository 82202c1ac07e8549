"""CLI surface: subcommands, config handling, CSV contracts, exit codes."""

import textwrap

import pytest

from scalegp.cli import emit_csv, main
from scalegp.exceptions import ConfigError
from scalegp.experiments import ExperimentConfig, run_mle_curve
from scalegp.kernels import FunctionExpansion, Matern

MLE_CONFIG = """\
[kernel]
family = matern
nu = 2.0
lengthscale = 0.2

[function]
eta = 0.5
lengthscale = 0.2
coefficients = 1 0.5 0.2
centers = 0.2, 0.55, 0.78

[experiment]
design = uniform
n_range = 10:40:5
fit_window = 1.0
"""

CUBATURE_CONFIG = """\
[kernel]
family = released_ibm

[function]
eta = 0.25
lengthscale = 0.7
coefficients = 1 2 0.5
centers = 0.125, 0.5, 0.75

[experiment]
design = vdc
n_range = 4:32:4
fit_window = 1.0
"""


@pytest.fixture
def mle_cfg(tmp_path):
    path = tmp_path / "fig1.cfg"
    path.write_text(MLE_CONFIG)
    return str(path)


@pytest.fixture
def cubature_cfg(tmp_path):
    path = tmp_path / "fig3.cfg"
    path.write_text(CUBATURE_CONFIG)
    return str(path)


def test_geometry_known_row(capsys):
    assert main(["geometry", "--design", "vdc", "--n", "3"]) == 0
    out = capsys.readouterr().out
    assert out == "N,h,q,rho\n3,0.5,0.125,4.0\n"


def test_geometry_from_config(mle_cfg, capsys):
    assert main(["geometry", "--config", mle_cfg]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "N,h,q,rho"
    assert len(lines) == 1 + 7  # one row per n_range entry
    assert lines[1].split(",")[0] == "10"


def test_geometry_design_requires_n(capsys):
    assert main(["geometry", "--design", "vdc"]) == 1
    assert "needs --n" in capsys.readouterr().err


def test_eval_matern_exponential(capsys):
    code = main(["eval", "--kernel", "matern", "--nu", "0.5", "--l", "1",
                 "--x", "0", "--y", "1"])
    assert code == 0
    assert capsys.readouterr().out == "0.367879441\n"


def test_eval_brownian_and_2d(capsys):
    assert main(["eval", "--kernel", "brownian_motion",
                 "--x", "0.3", "--y", "0.7"]) == 0
    assert capsys.readouterr().out == "0.3\n"
    assert main(["eval", "--kernel", "matern", "--nu", "1.5", "--l", "0.8",
                 "--dim", "2", "--x", "0.1 0.1", "--y", "0.1 0.1"]) == 0
    assert capsys.readouterr().out == "1\n"


def test_eval_bad_usage(capsys):
    # Matern without nu is a configuration error, not a crash.
    assert main(["eval", "--kernel", "matern", "--x", "0", "--y", "1"]) == 1
    assert "nu" in capsys.readouterr().err
    assert main(["eval", "--kernel", "matern", "--nu", "0.5", "--l", "1",
                 "--x", "0 0.5", "--y", "1"]) == 1


def test_mle_curve_csv_contract(mle_cfg, tmp_path, capsys):
    out = tmp_path / "curve.csv"
    assert main(["mle-curve", "--config", mle_cfg, "--out", str(out)]) == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == "N,sigma_ml,h,q,rho"
    data = [l for l in lines[1:] if not l.startswith("#")]
    footers = [l for l in lines[1:] if l.startswith("#")]
    assert len(data) == 7
    assert any("fit sigma_ml slope=" in f for f in footers)
    assert any("theory sigma_ml exponent=0.5" in f for f in footers)
    assert text.endswith("\n") and "\r" not in text


def test_mle_curve_round_trips_exact_doubles(mle_cfg, tmp_path):
    out = tmp_path / "curve.csv"
    main(["mle-curve", "--config", mle_cfg, "--out", str(out)])
    rows = [l.split(",") for l in out.read_text().splitlines()[1:]
            if not l.startswith("#")]
    cfg = ExperimentConfig(
        kernel=Matern(nu=2.0, lengthscale=0.2),
        test_function=FunctionExpansion(eta=0.5, lengthscale=0.2,
                                        coefficients=[1.0, 0.5, 0.2],
                                        centers=[0.2, 0.55, 0.78]),
        design="uniform_grid", n_range=range(10, 41, 5), fit_window=1.0)
    records = run_mle_curve(cfg)
    assert len(rows) == len(records)
    for row, r in zip(rows, records):
        assert int(row[0]) == r.N
        assert float(row[1]) == r.sigma_ml  # bit-exact round trip
        assert float(row[2]) == r.h
        assert float(row[4]) == r.rho


def test_mle_curve_byte_identical_reruns(mle_cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["mle-curve", "--config", mle_cfg, "--out", str(a)]) == 0
    assert main(["mle-curve", "--config", mle_cfg, "--out", str(b),
                 "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cubature_curve_csv_contract(cubature_cfg, tmp_path):
    out = tmp_path / "fig3.csv"
    assert main(["cubature-curve", "--config", cubature_cfg,
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,Q,abs_err,sigma_ml,sqrt_V,R_bc,score"
    data = [l for l in lines[1:] if not l.startswith("#")]
    assert len(data) == 8
    first = data[0].split(",")
    assert len(first) == 7
    # R_bc = sigma_ml * sqrt_V must round-trip consistently.
    assert float(first[5]) == float(first[3]) * float(first[4])


def test_rates_subcommand(mle_cfg, capsys):
    assert main(["rates", "--config", mle_cfg]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,slope,theory,r2"
    name, slope, theory, r2 = lines[1].split(",")
    assert name == "sigma_ml"
    assert theory == "0.5"
    # The N range here is a smoke-test stub, far from the asymptotic
    # regime; rate accuracy is the acceptance suite's job.
    assert float(slope) == float(slope)
    assert 0.0 <= float(r2) <= 1.0


def test_set_overrides_apply(mle_cfg, capsys):
    assert main(["rates", "--config", mle_cfg, "--set", "nu=3.0"]) == 0
    line = capsys.readouterr().out.splitlines()[1]
    assert line.split(",")[2] == "1.5"  # theory exponent moved with nu


def test_set_bare_key_ambiguity(mle_cfg, capsys):
    # lengthscale lives in both [kernel] and [function].
    assert main(["rates", "--config", mle_cfg,
                 "--set", "lengthscale=0.3"]) == 1
    err = capsys.readouterr().err
    assert "ambiguous" in err
    assert "kernel.lengthscale" in err and "function.lengthscale" in err
    assert main(["rates", "--config", mle_cfg,
                 "--set", "kernel.lengthscale=0.3"]) == 0


def test_set_unknown_key(mle_cfg, capsys):
    assert main(["mle-curve", "--config", mle_cfg,
                 "--set", "jitter=1e-9"]) == 1
    assert "no such config key" in capsys.readouterr().err
    assert main(["mle-curve", "--config", mle_cfg, "--set", "nu"]) == 1


def test_unknown_config_contents(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(MLE_CONFIG + "\n[plotting]\ncolor = red\n")
    assert main(["mle-curve", "--config", str(bad)]) == 1
    assert "unknown config section" in capsys.readouterr().err
    bad.write_text(MLE_CONFIG.replace("fit_window", "window"))
    assert main(["mle-curve", "--config", str(bad)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_missing_config(capsys):
    assert main(["mle-curve"]) == 1
    assert "--config" in capsys.readouterr().err
    assert main(["mle-curve", "--config", "/no/such/file.cfg"]) == 1


def test_bad_n_range_token(mle_cfg, capsys):
    assert main(["mle-curve", "--config", mle_cfg,
                 "--set", "n_range=10:x"]) == 1
    assert "n_range" in capsys.readouterr().err


def test_unknown_subcommand_and_flag(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["geometry", "--frobnicate"]) == 1
    assert main([]) == 1


def test_numerical_failure_exits_2(mle_cfg, tmp_path, capsys):
    # A numerically singular Gram matrix is exit 2, not a traceback.
    out = tmp_path / "never.csv"
    code = main(["mle-curve", "--config", mle_cfg, "--out", str(out),
                 "--set", "nu=6.5", "--set", "kernel.lengthscale=1.0",
                 "--set", "n_range=8,128"])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err
    assert not out.exists()  # nothing half-written


def test_io_failure_exits_2(mle_cfg, capsys):
    code = main(["geometry", "--config", mle_cfg,
                 "--out", "/no/such/dir/geo.csv"])
    assert code == 2
    assert "i/o failure" in capsys.readouterr().err


def test_emit_csv_refuses_empty():
    with pytest.raises(ConfigError):
        emit_csv([], None, ["a", "b"])


def test_emit_csv_formats(tmp_path):
    out = tmp_path / "t.csv"
    emit_csv([(3, 0.1, 1.0)], str(out), ["n", "x", "y"], ["note one"])
    assert out.read_text() == "n,x,y\n3,0.1,1.0\n# note one\n"
