import csv
import io
import json
import math

import pytest

from matricvariate import cli


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def _point(tmp_path, obj, name="x.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

PEARSON = ("sample", "--dist", "pearson2", "--beta", "2", "--m", "2", "--n", "3", "--nu", "4",
           "--count", "5", "--seed", "11")


def test_sample_writes_header_and_draws(capsys):
    rc, out, _ = run(capsys, *PEARSON)
    assert rc == 0
    lines = [json.loads(s) for s in out.splitlines()]
    header, draws = lines[0], lines[1:]
    assert header["type"] == "header" and header["format_version"] == 1
    assert header["dist"] == "pearson2" and header["count"] == 5 and header["seed"] == 11
    assert header["params"]["beta"] == 2 and header["params"]["m"] == 2
    assert len(draws) == 5 and all(d["beta"] == 2 and d["m"] == 2 and d["n"] == 3 for d in draws)


def test_sample_is_deterministic(capsys, tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    assert run(capsys, *PEARSON, "--out", str(a))[0] == 0
    assert run(capsys, *PEARSON, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_then_density_round_trip(capsys, tmp_path):
    path = tmp_path / "s.jsonl"
    assert run(capsys, *PEARSON, "--out", str(path))[0] == 0
    rc, out, _ = run(capsys, "density", "--input", str(path))
    assert rc == 0
    vals = json.loads(out)["logpdf"]
    assert len(vals) == 5 and all(isinstance(v, float) and math.isfinite(v) for v in vals)


@pytest.mark.parametrize("dist", ["pearson2", "wishart", "normal"])
def test_octonion_matrix_sampling_is_refused(capsys, dist):
    rc, out, err = run(capsys, "sample", "--dist", dist, "--beta", "8", "--m", "1", "--n", "1",
                       "--nu", "3")
    assert rc == 2 and out == ""
    assert "octonion matrix sampling unsupported" in err


def test_octonion_spectral_sampling_works(capsys):
    rc, out, _ = run(capsys, "sample", "--dist", "spectral", "--beta", "8", "--m", "2",
                     "--n", "3", "--nu", "4", "--flavor", "singular_pearson", "--count", "20",
                     "--burn-in", "200")
    assert rc == 0
    lines = [json.loads(s) for s in out.splitlines()]
    assert 0 < lines[0]["params"]["acceptance_rate"] < 1
    for d in lines[1:]:
        v = d["values"]
        assert 1 > v[0] > v[1] > 0


@pytest.mark.parametrize("dist,extra", [
    ("mmpearson2", ()), ("beta1", ()), ("mmbeta1", ()), ("wishart", ()), ("normal", ()),
])
def test_sample_other_distributions(capsys, dist, extra):
    nu = "6" if dist != "mmpearson2" else "2"
    rc, out, _ = run(capsys, "sample", "--dist", dist, "--beta", "1", "--m", "2", "--n", "3",
                     "--nu", nu, "--count", "3", *extra)
    assert rc == 0 and len(out.splitlines()) == 4


def test_sample_missing_parameter_is_schema_error(capsys):
    rc, _, err = run(capsys, "sample", "--dist", "pearson2", "--beta", "1", "--m", "1")
    assert rc == 2 and "--n" in err


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------

def test_density_scalar_example(capsys, tmp_path):
    path = _point(tmp_path, {"beta": 1, "m": 1, "n": 1, "entries": [[[0.0]]]})
    rc, out, _ = run(capsys, "density", "--input", path, "--dist", "pearson2", "--nu", "2")
    assert rc == 0
    assert json.loads(out)["logpdf"] == pytest.approx(-math.log(2), abs=1e-12)


def test_density_outside_support_is_minus_inf(capsys, tmp_path):
    path = _point(tmp_path, {"beta": 1, "m": 1, "n": 1, "entries": [[[1.5]]]})
    rc, out, _ = run(capsys, "density", "--input", path, "--dist", "pearson2", "--nu", "2")
    assert rc == 0 and json.loads(out)["logpdf"] == "-inf"


def test_density_beta_mismatch_is_rejected(capsys, tmp_path):
    path = _point(tmp_path, {"beta": 1, "m": 1, "n": 1, "entries": [[[0.0]]]})
    rc, out, err = run(capsys, "density", "--input", path, "--dist", "pearson2", "--nu", "2",
                       "--beta", "2")
    assert rc == 2 and out == "" and "beta" in err


def test_density_header_conflict_is_rejected(capsys, tmp_path):
    path = tmp_path / "s.jsonl"
    assert run(capsys, *PEARSON, "--out", str(path))[0] == 0
    rc, _, err = run(capsys, "density", "--input", str(path), "--nu", "5")
    assert rc == 2 and "conflicts" in err


def test_density_spectral_point(capsys, tmp_path):
    path = _point(tmp_path, {"values": [0.5]})
    rc, out, _ = run(capsys, "density", "--input", path, "--dist", "spectral", "--beta", "8",
                     "--m", "1", "--n", "2", "--nu", "3", "--flavor", "singular_pearson")
    assert rc == 0 and math.isfinite(json.loads(out)["logpdf"])


def test_density_malformed_input(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "density", "--input", str(path), "--dist", "pearson2", "--nu", "2")[0] == 2


# ---------------------------------------------------------------------------
# tabulate
# ---------------------------------------------------------------------------

def test_tabulate_rows(capsys):
    rc, out, _ = run(capsys, "tabulate", "--row", "beta=1,m=1,n=2",
                     "--row", "beta=1,m=2,a=1.5,b=2.5", "--row", "beta=1,m=2,a=0.4")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(out.strip().splitlines()) == 4 and len(rows) == 3
    assert list(rows[0]) == list(cli.TAB_FIELDS)
    assert float(rows[0]["log_stiefel_volume"]) == pytest.approx(math.log(2 * math.pi))
    assert float(rows[1]["log_mgamma"]) == pytest.approx(math.log(math.pi / 2))
    assert rows[2]["log_mgamma"] == "DOMAIN_ERROR"


def test_tabulate_grid_file(capsys, tmp_path):
    grid = _point(tmp_path, [{"beta": 2, "m": 2, "a": 2.0, "b": 2.0}, {"beta": 1, "m": 3, "n": 2}],
                  "grid.json")
    rc, out, _ = run(capsys, "tabulate", "--grid", grid)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rc == 0
    assert float(rows[0]["log_mbeta"]) == pytest.approx(math.log(math.pi / 12))
    assert rows[1]["log_stiefel_volume"] == "DIMENSION_ERROR"


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

SMALL = {"suite": "cli", "seed": 3, "tests": [
    {"name": "ks_chi2beta", "params": {"beta": 1, "nu": 3.0, "n_samples": 2000}},
    {"name": "normalize_beta1", "params": {"beta": 2, "n": 2.0, "nu": 3.0}},
]}


def test_verify_passing_config(capsys, tmp_path):
    cfg = _point(tmp_path, SMALL, "cfg.json")
    out_path = tmp_path / "report.json"
    rc, _, err = run(capsys, "verify", "--config", cfg, "--out", str(out_path))
    assert rc == 0 and "2/2 tests passed" in err
    report = json.loads(out_path.read_text())
    assert report["passed"] and report["suite"] == "cli" and len(report["reports"]) == 2


def test_verify_failing_config_exits_1(capsys, tmp_path):
    cfg = _point(tmp_path, {**SMALL, "threshold": 1.0}, "cfg.json")
    rc, out, err = run(capsys, "verify", "--config", cfg)
    assert rc == 1 and "FAILED ks_chi2beta" in err
    assert json.loads(out)["passed"] is False


def test_verify_unknown_test_exits_2(capsys, tmp_path):
    cfg = _point(tmp_path, {"tests": [{"name": "bogus"}]}, "cfg.json")
    rc, _, err = run(capsys, "verify", "--config", cfg)
    assert rc == 2 and "bogus" in err


def test_verify_empty_config_passes(capsys, tmp_path):
    cfg = _point(tmp_path, {"tests": []}, "cfg.json")
    rc, out, _ = run(capsys, "verify", "--config", cfg)
    assert rc == 0 and json.loads(out)["passed"] is True
