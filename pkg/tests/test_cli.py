import csv
import io
import json

import pytest

from redsim.cli import FIG4_COLUMNS, INDICATOR_COLUMNS, URN_COLUMNS, parse_and_dispatch
from redsim.simqueue import SIM_COLUMNS

SMALL_SIM = ["--warmup", "100", "--jobs", "2000", "--reps", "2"]


def run(argv, env=None):
    out = io.StringIO()
    code = parse_and_dispatch(argv, env or {}, out)
    return code, out.getvalue()


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return reader.fieldnames, list(reader)


def test_design_lines():
    code, out = run(["design", "--r", "3"])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 7
    assert lines[0] == "0 1 3"


def test_design_csv_and_json():
    code, out = run(["design", "--r", "2", "--csv"])
    cols, rows = read_csv(out)
    assert cols == ["block", "p1", "p2"] and len(rows) == 3
    code, out = run(["design", "--r", "2", "--json"])
    lines = [json.loads(x) for x in out.splitlines()]
    assert "config" in lines[0] and lines[1] == {"block": 0, "p1": 0, "p2": 1}


def test_design_unavailable_exit_code():
    assert run(["design", "--r", "7"])[0] == 2


def test_indicators_bibd_table():
    code, out = run(["indicators", "--policy", "bibd", "--r", "3"])
    assert code == 0
    assert "0.7778" in out and "0.4667" in out


def test_indicators_csv_schema():
    code, out = run(["indicators", "--policy", "all", "--r", "3", "--csv"])
    cols, rows = read_csv(out)
    assert tuple(cols) == INDICATOR_COLUMNS
    rr = next(r for r in rows if r["policy"] == "round-robin")
    assert float(rr["rdf"]) == pytest.approx(7 / 19)


def test_indicators_unsupported_is_invalid_parameter():
    assert run(["indicators", "--policy", "round-robin", "--r", "2", "--n", "6"])[0] == 4


def test_urns_csv_file(tmp_path):
    path = tmp_path / "urns.csv"
    code, _ = run(["urns", "--policy", "bibd", "--n", "7", "--r", "3", "--T", "70",
                   "--reps", "2", "--seed", "1", "--csv", str(path)])
    assert code == 0
    cols, rows = read_csv(path.read_text())
    assert tuple(cols) == URN_COLUMNS
    assert float(rows[0]["lbf_emp"]) == 1
    assert float(rows[0]["rof_analytic"]) == pytest.approx(float(1 / (6 / 7 + 3 * (1 / 7 - 1 / 70))))


def test_simulate_reproducible(tmp_path):
    argv = ["simulate", "--policy", "all", "--n", "7", "--r", "3", "--mu1", "10", "--q", "10",
            "--p-long", "0.1", "--lambda", "20", "--seed", "3", *SMALL_SIM]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(argv + ["--csv", str(a)])[0] == 0
    assert run(argv + ["--csv", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    cols, rows = read_csv(a.read_text())
    assert tuple(cols) == SIM_COLUMNS and len(rows) == 3
    assert a.read_text().splitlines()[0].startswith("# redsim")
    assert "seed=3" in a.read_text().splitlines()[0]


def test_simulate_underrun_exit_code():
    code, _ = run(["simulate", "--policy", "random", "--n", "1", "--r", "1", "--mu1", "10",
                   "--q", "1", "--p-long", "0", "--lambda", "5", "--horizon", "1", *SMALL_SIM])
    assert code == 3


def test_sweep_preset(tmp_path):
    path = tmp_path / "out.csv"
    code, _ = run(["sweep", "--preset", "fig5", "--seed", "1", "--csv", str(path), *SMALL_SIM])
    assert code == 0
    cols, rows = read_csv(path.read_text())
    assert tuple(cols) == SIM_COLUMNS
    assert len(rows) == 3 * 16
    assert {r["policy"] for r in rows} == {"random", "round-robin", "bibd"}
    assert {(r["n"], r["r"], r["q"]) for r in rows} == {("13", "4", "10")}


def test_sweep_explicit_lambdas():
    code, out = run(["sweep", "--preset", "fig8", "--fig8-q15", "--lambdas", "5,10",
                     "--csv", *SMALL_SIM])
    cols, rows = read_csv(out)
    assert len(rows) == 6 and {r["q"] for r in rows} == {"15"}


def test_sweep_without_parameters_is_usage_error():
    assert run(["sweep", "--lambdas", "1"])[0] == 1


def test_usage_errors():
    assert run(["frobnicate"])[0] == 1
    assert run(["design"])[0] == 1
    assert run(["design", "--r", "3", "--bogus"])[0] == 1


def test_invalid_parameter_exit_code():
    assert run(["urns", "--policy", "random", "--n", "3", "--r", "5", "--T", "10"])[0] == 4


def test_help_exits_zero():
    assert run(["--help"])[0] == 0


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# urn run\npolicy = round-robin\nn=7\nr=3\nT=14\nreps=1\nseed=5\n")
    code, out = run(["--config", str(cfg), "urns", "--csv"])
    assert code == 0
    header = out.splitlines()[0]
    assert "policy=round-robin" in header and "seed=5" in header
    code, out = run(["--config", str(cfg), "urns", "--seed", "9", "--policy", "bibd", "--csv"])
    _, rows = read_csv(out)
    assert rows[0]["seed"] == "9" and rows[0]["policy"] == "bibd"


def test_config_file_beats_env_seed(tmp_path):
    argv = ["urns", "--policy", "random", "--n", "7", "--r", "3", "--T", "7", "--reps", "1", "--csv"]
    _, rows = read_csv(run(argv, {"REDSIM_SEED": "77"})[1])
    assert rows[0]["seed"] == "77"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("seed=12\n")
    _, rows = read_csv(run(["--config", str(cfg), *argv], {"REDSIM_SEED": "77"})[1])
    assert rows[0]["seed"] == "12"


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("colour=blue\n")
    assert run(["--config", str(cfg), "design", "--r", "3"])[0] == 1


def test_figures_fig4(tmp_path):
    code, out = run(["figures", "--preset", "fig4", "--out-dir", str(tmp_path), "--reps", "5"])
    assert code == 0
    cols, rows = read_csv((tmp_path / "fig4.csv").read_text())
    assert tuple(cols) == FIG4_COLUMNS
    r3 = next(r for r in rows if r["r"] == "3")
    assert float(r3["lbf_bibd"]) == 1
    assert float(r3["rdf_bibd"]) == pytest.approx(7 / 15)
    assert float(r3["rdf_rr"]) == pytest.approx(7 / 19)


def test_figures_fig2(tmp_path):
    code, _ = run(["figures", "--preset", "fig2", "--out-dir", str(tmp_path), "--reps", "3"])
    assert code == 0
    _, rows = read_csv((tmp_path / "fig2.csv").read_text())
    full = next(r for r in rows if r["n"] == "21" and r["r"] == "21")
    assert float(full["mean_min"]) == float(full["mean_max"]) == 50


def test_figures_queue_preset(tmp_path):
    code, out = run(["figures", "--preset", "fig5", "--out-dir", str(tmp_path), *SMALL_SIM])
    assert code == 0
    for part in ("low", "high"):
        cols, rows = read_csv((tmp_path / f"fig5_{part}.csv").read_text())
        assert tuple(cols) == SIM_COLUMNS and len(rows) == 24


def test_output_is_lf_only(tmp_path):
    path = tmp_path / "d.csv"
    run(["design", "--r", "3", "--csv", str(path)])
    assert b"\r" not in path.read_bytes()
