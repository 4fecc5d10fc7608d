import json

import pytest

from rmtlab import cli, config
from rmtlab.outputs import read_csv

GOE = {"ensemble": {"family": "GOE", "n": 32, "w2": 1}, "test_function": {"name": "monomial", "k": 2},
       "replicas": 40, "seed": 7}


def test_minimal_config_valid():
    m = config.parse_config(json.dumps({**GOE, "ensemble": {"family": "GOE", "n": 128, "w2": 1}, "replicas": 200}))
    assert m.order == 128 and m.replicas == 200
    assert config.experiment_config(m, workers=2).workers == 2


@pytest.mark.parametrize("doc,key", [
    ({**GOE, "replicas": -3}, "replicas"),
    ({**GOE, "bogus": 1}, "bogus"),
    ({**GOE, "ensemble": {"family": "GOE", "n": 32, "colour": 1}}, "ensemble.colour"),
    ({**GOE, "test_function": {"name": "nope"}}, "test_function"),
])
def test_config_errors_name_key(doc, key):
    with pytest.raises(config.ConfigError, match=key.replace(".", r"\.")):
        config.parse_config(json.dumps(doc))


def test_theory_c_below_one():
    doc = {"ensemble": {"family": "Wishart", "c": 0.5}, "test_function": {"name": "monomial", "k": 1}}
    with pytest.raises(config.ConfigError, match="c >= 1"):
        config.parse_config(json.dumps(doc), "theory")


def test_overrides():
    m = config.parse_config(json.dumps(GOE), "simulate", ["ensemble.n=64", "test_function.k=3"])
    assert m.ensemble.n == 64 and m.test_function["k"] == 3
    with pytest.raises(config.ConfigError):
        config.apply_override({}, "no_equals")


def test_workers_env(monkeypatch):
    monkeypatch.setenv("RMT_LAB_WORKERS", "3")
    assert config.default_workers() == 3
    monkeypatch.setenv("RMT_LAB_WORKERS", "x")
    with pytest.raises(config.ConfigError):
        config.default_workers()


def test_theory_parameters_from_entry_law():
    doc = {"ensemble": {"family": "Wigner", "offdiag": {"kind": "uniform"}}, "test_function": {"name": "monomial", "k": 2}}
    p = config.theory_parameters(config.parse_config(json.dumps(doc), "theory"))
    assert p["kappa4"] == pytest.approx(-1.2)


def _write(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_cli_simulate_deterministic(tmp_path):
    cfg = _write(tmp_path, GOE)
    for out, w in (("a", "1"), ("b", "3")):
        assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / out), "--workers", w]) == 0
    for f in ("replicas.csv", "report.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    first = (tmp_path / "a" / "replicas.csv").read_text().splitlines()[0]
    assert first.startswith("# config_sha256=")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["config"]["seed"] == 7


def test_cli_seed_and_report(tmp_path):
    cfg = _write(tmp_path, GOE)
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out), "--seed", "11", "--workers", "1"]) == 0
    assert json.loads((out / "summary.json").read_text())["config"]["seed"] == 11
    before = (out / "report.csv").read_bytes()
    assert cli.main(["report", "--config", cfg, "--out", str(out), "--seed", "11"]) == 0
    assert (out / "report.csv").read_bytes() == before


def test_cli_complex_and_dumps(tmp_path):
    doc = {**GOE, "ensemble": {"family": "GOE", "n": 6}, "test_function": {"name": "exponential", "t0": 0.7},
           "replicas": 5, "dump_eigenvalues": True, "dump_matrix": True}
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", _write(tmp_path, doc), "--out", str(out), "--workers", "1"]) == 0
    header, rows = read_csv(out / "replicas.csv")
    assert header == ["n", "replica", "value_re", "value_im"] and len(rows) == 5
    header, rows = read_csv(out / "eigenvalues_n6.csv")
    assert header == ["replica", "index", "eigenvalue"] and len(rows) == 30
    assert (out / "matrix_n6_r0.csv").exists()
    header, rows = read_csv(out / "report.csv")
    assert [r[0] for r in rows] == ["re", "im"]


def test_cli_theory_table(tmp_path):
    doc = {"ensemble": {"family": "GOE", "w2": 1}, "test_functions": [{"name": "monomial", "k": 2},
                                                                      {"name": "poisson", "E": 0, "eta": 1}]}
    out = tmp_path / "t"
    assert cli.main(["theory", "--config", _write(tmp_path, doc), "--out", str(out)]) == 0
    header, rows = read_csv(out / "theory.csv")
    assert header == ["formula_tag", "phi", "parameters", "gaussian_part", "kappa4_part", "total", "est_error"]
    total, err = float(rows[0][5]), float(rows[0][6])
    assert abs(total - 4) <= max(err, 1e-12)


def test_cli_laws(tmp_path):
    doc = {"law": {"kind": "semicircle", "w2": 2.25}, "stieltjes_z": [[0.0, 1.0]]}
    out = tmp_path / "l"
    assert cli.main(["laws", "--config", _write(tmp_path, doc), "--out", str(out)]) == 0
    header, rows = read_csv(out / "laws_density.csv")
    assert header == ["lambda", "density"] and len(rows) == 401
    assert float(rows[0][0]) == -3.0 and float(rows[-1][0]) == 3.0
    _, rows = read_csv(out / "laws_stieltjes.csv")
    assert float(rows[0][4]) < 1e-12
    doc = {"law": {"kind": "marchenko-pastur", "c": 2.0}}
    assert cli.main(["laws", "--config", _write(tmp_path, doc, "m.json"), "--out", str(out)]) == 0


def test_cli_volterra(tmp_path):
    doc = {"test_function": {"name": "poisson", "E": 0, "eta": 1}, "T": 2.0, "kappa4": -1.2}
    out = tmp_path / "v"
    assert cli.main(["volterra", "--config", _write(tmp_path, doc), "--out", str(out)]) == 0
    header, rows = read_csv(out / "volterra.csv")
    assert header[0] == "t" and len(rows) == 401
    assert max(float(r[5]) for r in rows) < 1e-3


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.json")]) == 4
    bad = _write(tmp_path, {**GOE, "replicas": -1})
    assert cli.main(["simulate", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "replicas" in capsys.readouterr().err
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["simulate", "--config", _write(tmp_path, GOE), "--out", str(blocker / "sub")]) == 4
    doc = {"ensemble": {"family": "Wigner", "w2": 1}, "test_function": {"name": "monomial", "k": 2}, "kappa4": -9}
    assert cli.main(["theory", "--config", _write(tmp_path, doc, "t.json"), "--out", str(tmp_path / "t")]) == 3
