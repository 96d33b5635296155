"""Order-sweep studies, rate fitting, and the command-line front end."""

import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mappedpce import (
    JointDensity,
    NumericalError,
    RLCModel,
    Uniform,
    default_maps,
    fit_decay_slope,
    fit_rate,
    identity_map,
    load_surrogate,
    read_nodes_csv,
    reference_moments,
    run_study,
    runge_model,
)
from mappedpce.cli import main as cli_main

RLC = RLCModel().model()


def _write_config(tmp_path, name="config.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ---------------------------------------------------------------- studies


def test_run_study_rows_and_eval_counts():
    result = run_study(RLC, Uniform(), orders=[2, 5], cv_samples=100, seed=0,
                       reference_nodes=60)
    assert [(r.map_name, r.order) for r in result.rows] == [
        ("identity", 2), ("identity", 5), ("sausage9", 2), ("sausage9", 5),
    ]
    # default projection rule has order+1 nodes per dimension
    assert [r.model_evals for r in result.rows] == [3, 6, 3, 6]
    assert result.map_names() == ["identity", "sausage9"]
    for name in ("identity", "sausage9"):
        rows = result.rows_for(name)
        assert rows[0].e_cv > rows[1].e_cv > 0.0
        # only order 5 falls in the default fit window
        assert math.isnan(result.rates[name])


def test_run_study_fixed_quadrature_size():
    result = run_study(RLC, Uniform(), maps={"identity": identity_map()},
                       orders=[1, 3], cv_samples=50, quad_nodes=8, reference_nodes=40)
    assert [r.model_evals for r in result.rows] == [8, 8]


def test_order_zero_error_matches_sample_variance():
    # with enough quadrature the order-0 surrogate is the mean, so the
    # validation error is the sample variance up to the mean's sampling error
    result = run_study(RLC, Uniform(), maps={"identity": identity_map()},
                       orders=[0], cv_samples=1000, seed=0, quad_nodes=24)
    samples = JointDensity([Uniform()]).sample(1000, 0)
    truth = RLC.evaluate_batch(samples)
    sample_var = float(np.mean(np.abs(truth - truth.mean()) ** 2))
    e0 = result.rows[0].e_cv
    assert abs(e0 - sample_var) / sample_var < 0.01


def test_reference_moments_frozen_values():
    mu, sd = reference_moments(RLC, Uniform())
    assert abs(mu - 0.6588924585484379) < 1e-12
    assert mu.imag == 0.0
    assert abs(sd - 0.20488218063318175) < 1e-12


def test_fit_rate_recovers_geometric_decay():
    orders = np.arange(0, 21)
    errors = 3.0 * 1.7 ** (-2.0 * orders)
    assert abs(fit_rate(orders, errors) - 1.7) < 1e-12

    # garbage outside the window must not matter
    polluted = errors.copy()
    polluted[:4] = 99.0
    polluted[19:] = 99.0
    assert abs(fit_rate(orders, polluted) - 1.7) < 1e-12

    assert abs(fit_rate(orders, 0.2 * 2.5 ** (-2.0 * orders), window=(0, 20)) - 2.5) < 1e-12

    # non-positive entries are dropped, not logged
    gapped = errors.copy()
    gapped[10] = 0.0
    assert abs(fit_rate(orders, gapped) - 1.7) < 1e-12

    assert math.isnan(fit_rate([5], [1e-3]))
    assert math.isnan(fit_rate([5, 6], [0.0, -1.0]))


def test_fit_decay_slope_ignores_roundoff_levels():
    energy = np.exp(-0.9 * np.arange(12))
    assert abs(fit_decay_slope(energy) + 0.9) < 1e-12
    # odd levels collapsed to roundoff must not drag the slope
    floored = energy.copy()
    floored[1::2] = 1e-40
    assert abs(fit_decay_slope(floored) + 0.9) < 1e-12
    assert math.isnan(fit_decay_slope([1.0]))
    assert math.isnan(fit_decay_slope([1.0, 1e-40]))


def test_resonance_and_runge_rates_agree():
    # both models share the pole pair +-0.4i, so the fitted rates match
    maps = {"identity": identity_map()}
    rate_rlc = run_study(RLC, Uniform(), maps=maps, orders=range(0, 21),
                         cv_samples=1000, seed=0).rates["identity"]
    rate_runge = run_study(runge_model(6.25), Uniform(), maps=maps,
                           orders=range(0, 21), cv_samples=1000, seed=0).rates["identity"]
    assert abs(rate_rlc - rate_runge) / rate_runge < 0.10


# ---------------------------------------------------------------- CLI


def test_cli_study_reruns_byte_identical(tmp_path):
    cfg = _write_config(tmp_path, model="rlc", orders="1:8", cv_samples=200)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    plot = tmp_path / "plot.csv"
    assert cli_main(["study", "--config", cfg, "--out", str(out1),
                     "--plot-data", str(plot)]) == 0
    assert cli_main(["study", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    rows = list(csv.reader(out1.open()))
    assert rows[0] == ["order", "map", "e_cv", "mean_err", "std_err",
                       "model_evals", "empirical_rate"]
    assert len(rows) == 17
    assert {r[1] for r in rows[1:]} == {"identity", "sausage9"}
    # the rate column is constant within each map
    for name in ("identity", "sausage9"):
        rates = {r[6] for r in rows[1:] if r[1] == name}
        assert len(rates) == 1

    prows = list(csv.reader(plot.open()))
    assert prows[0] == ["order", "e_cv_identity", "e_cv_sausage9"]
    assert len(prows) == 9
    # mapped expansion is at least as accurate at the top order
    assert float(prows[-1][2]) <= float(prows[-1][1])


def test_cli_flag_overrides(tmp_path):
    cfg = _write_config(tmp_path, model="rlc", orders="1:12", cv_samples=150, seed=3)
    out = tmp_path / "o.csv"
    assert cli_main(["study", "--config", cfg, "--out", str(out),
                     "--orders", "2:4", "--map", "sausage9",
                     "--seed", "7", "--cv-samples", "50"]) == 0
    rows = list(csv.reader(out.open()))
    assert [r[0] for r in rows[1:]] == ["2", "3", "4"]
    assert {r[1] for r in rows[1:]} == {"sausage9"}

    other = tmp_path / "o2.csv"
    assert cli_main(["study", "--config", cfg, "--out", str(other),
                     "--orders", "2:4", "--map", "sausage9",
                     "--seed", "8", "--cv-samples", "50"]) == 0
    reruns = list(csv.reader(other.open()))
    assert [r[2] for r in reruns[1:]] != [r[2] for r in rows[1:]]


def test_cli_project_eval_round_trip(tmp_path):
    cfg = _write_config(tmp_path, model="toy", order=3)
    sur = tmp_path / "toy.json"
    assert cli_main(["project", "--config", cfg, "--out", str(sur)]) == 0

    points = np.array([[0.3, -0.5], [-0.25, 0.75], [0.0, 0.0]])
    pts = tmp_path / "pts.csv"
    pts.write_text("y1,y2\n" + "\n".join(f"{a},{b}" for a, b in points) + "\n")
    out = tmp_path / "vals.csv"
    assert cli_main(["eval", "--surrogate", str(sur), "--points", str(pts),
                     "--out", str(out)]) == 0

    rows = list(csv.reader(out.open()))
    assert rows[0] == ["y1", "y2", "value_real", "value_imag"]
    expect = load_surrogate(str(sur)).evaluate(points)
    for row, value in zip(rows[1:], expect):
        # 17 significant digits round-trip exactly
        assert float(row[2]) == value.real
        assert float(row[3]) == value.imag
    assert abs(expect[0] - 0.15) < 1e-13


def test_cli_project_map_flag_and_metadata(tmp_path):
    cfg = _write_config(tmp_path, model="rlc", order=6)
    sur = tmp_path / "rlc.json"
    assert cli_main(["project", "--config", cfg, "--out", str(sur),
                     "--map", "sausage9"]) == 0
    loaded = load_surrogate(str(sur))
    assert loaded.metadata["map"] == "sausage9"
    assert loaded.basis.is_mapped


def test_cli_sobol_outputs(tmp_path):
    cfg = _write_config(tmp_path, model="toy", order=3)
    sur = tmp_path / "toy.json"
    assert cli_main(["project", "--config", cfg, "--out", str(sur)]) == 0
    sob, mom = tmp_path / "sobol.csv", tmp_path / "moments.csv"
    assert cli_main(["sobol", "--surrogate", str(sur), "--out", str(sob),
                     "--moments", str(mom)]) == 0

    rows = list(csv.reader(sob.open()))
    assert rows[0] == ["dimension", "S_main", "S_total"]
    assert abs(float(rows[1][1]) - 0.75) < 1e-10
    assert abs(float(rows[1][2]) - 1.0) < 1e-10
    assert abs(float(rows[2][1]) - 0.0) < 1e-10
    assert abs(float(rows[2][2]) - 0.25) < 1e-10

    mrows = list(csv.reader(mom.open()))
    by_name = {r[0]: float(r[1]) for r in mrows[1:]}
    assert abs(by_name["variance"] - 4.0 / 9.0) < 1e-12


def test_cli_eval_reads_stdin_writes_stdout(tmp_path, monkeypatch, capsys):
    cfg = _write_config(tmp_path, model="toy", order=2)
    sur = tmp_path / "s.json"
    assert cli_main(["project", "--config", cfg, "--out", str(sur)]) == 0
    monkeypatch.setattr("sys.stdin", io.StringIO("0.5,0.5\n"))
    assert cli_main(["eval", "--surrogate", str(sur)]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["y1", "y2", "value_real", "value_imag"]
    assert abs(float(rows[1][2]) - 0.75) < 1e-12


def test_cli_export_grid_then_tabulated_study(tmp_path):
    values_csv = tmp_path / "values.csv"
    cfg = _write_config(
        tmp_path, "tab.json",
        model={"name": "tabulated", "path": str(values_csv), "dimension": 2},
        maps=["identity"], orders="0:4", quad_nodes=6,
    )
    grid_csv = tmp_path / "grid.csv"
    assert cli_main(["export-grid", "--config", cfg, "--out", str(grid_csv)]) == 0
    indices, coords, _ = read_nodes_csv(str(grid_csv))
    assert coords.shape == (36, 2)

    # external solver stand-in: fill in the interaction toy values
    with open(values_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "y1", "y2", "value_real", "value_imag"])
        for idx, (y1, y2) in zip(indices, coords):
            writer.writerow([idx, "%.17g" % y1, "%.17g" % y2,
                             "%.17g" % (y1 + y1 * y2), "0"])

    out = tmp_path / "study.csv"
    assert cli_main(["study", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert len(rows) == 6
    # no off-grid evaluations exist, so sample-based columns are honest nans
    assert math.isnan(float(rows[1][2]))
    assert math.isnan(float(rows[1][3]))
    assert [r[5] for r in rows[1:]] == ["36"] * 5

    sur = tmp_path / "tab_surrogate.json"
    assert cli_main(["project", "--config", cfg, "--out", str(sur),
                     "--orders", "3"]) == 0
    loaded = load_surrogate(str(sur))
    probe = np.array([[0.3, -0.5], [0.1, 0.9]])
    values = loaded.evaluate(probe)
    assert np.max(np.abs(values - (probe[:, 0] + probe[:, 0] * probe[:, 1]))) < 1e-10


def test_cli_tabulated_guards(tmp_path):
    values_csv = tmp_path / "values.csv"
    base = dict(model={"name": "tabulated", "path": str(values_csv), "dimension": 1},
                maps=["identity"], orders="0:4")
    cfg = _write_config(tmp_path, "no_nodes.json", **base)
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    cfg = _write_config(tmp_path, "small.json", **base, quad_nodes=3)
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    two_maps = dict(base, maps=["identity", "sausage9"], quad_nodes=8)
    cfg = _write_config(tmp_path, "two_maps.json", **two_maps)
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1


def test_cli_custom_map_entry_and_beta_density(tmp_path):
    entry = {"map": {"odd_coefficients": [3.0, 1.0]}, "name": "mild"}
    cfg = _write_config(tmp_path, model="rlc", orders="2:4", cv_samples=50,
                        maps=[entry, "identity"],
                        densities=[{"kind": "beta", "alpha": 4, "beta": 4}])
    out = tmp_path / "o.csv"
    assert cli_main(["study", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert {r[1] for r in rows[1:]} == {"mild", "identity"}
    assert len(rows) == 7


def test_cli_export_grid_sized_by_densities(tmp_path):
    cfg = _write_config(
        tmp_path,
        densities=[{"kind": "uniform"}, {"kind": "beta", "alpha": 4, "beta": 4}],
        quad_nodes=3,
    )
    out = tmp_path / "g.csv"
    assert cli_main(["export-grid", "--config", cfg, "--out", str(out),
                     "--map", "sausage9"]) == 0
    _, coords, weights = read_nodes_csv(str(out))
    assert coords.shape == (9, 2)
    assert abs(weights.sum() - 1.0) < 1e-12


def test_cli_config_errors_name_the_field(tmp_path, capsys):
    cfg = _write_config(tmp_path, model="rlc", ordesr="1:4")
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    assert "ordesr" in capsys.readouterr().err

    cfg = _write_config(tmp_path, "m.json", model="does-not-exist")
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    assert "does-not-exist" in capsys.readouterr().err

    cfg = _write_config(tmp_path, "d.json", model="rlc",
                        densities=[{"kind": "triangular"}])
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    err = capsys.readouterr().err
    assert "densities" in err


def test_cli_usage_errors_exit_one(tmp_path):
    cfg = _write_config(tmp_path, model="rlc", orders="1:2", cv_samples=10)
    with pytest.raises(SystemExit) as exc:
        cli_main(["study", "--config", cfg])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli_main(["no-such-command"])
    assert exc.value.code == 1


def test_cli_missing_files_exit_one(tmp_path, capsys):
    assert cli_main(["study", "--config", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "x.csv")]) == 1
    assert cli_main(["eval", "--surrogate", str(tmp_path / "absent.json"),
                     "--points", "whatever"]) == 1
    capsys.readouterr()


def test_cli_numerical_failure_exit_two(tmp_path, monkeypatch, capsys):
    cfg = _write_config(tmp_path, model="rlc", orders="1:2", cv_samples=10)

    def boom(*args, **kwargs):
        raise NumericalError("inner solve diverged")

    monkeypatch.setattr("mappedpce.cli.run_study", boom)
    assert cli_main(["study", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "numerical" in capsys.readouterr().err


def test_cli_subprocess_entry(tmp_path):
    cfg = _write_config(tmp_path, model="rlc", orders="2:5", cv_samples=100)
    out = tmp_path / "s.csv"
    done = subprocess.run(
        [sys.executable, "-m", "mappedpce.cli", "study", "--config", cfg,
         "--out", str(out)],
        capture_output=True, text=True,
    )
    assert done.returncode == 0, done.stderr
    assert out.exists()

    done = subprocess.run(
        [sys.executable, "-m", "mappedpce.cli", "study", "--config", cfg],
        capture_output=True, text=True,
    )
    assert done.returncode == 1
