"""Command-line surface: documents, exit codes, CSV projections."""

import csv
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from cornergl import cli
from cornergl.errors import ParameterError
from cornergl.geometry import polygon_to_json
from cornergl.results import canonical_json, content_hash

PI = math.pi


def read_doc(path):
    with open(path) as handle:
        return json.load(handle)


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def check_status(doc, name):
    for c in doc["document"]["checks"]:
        if c["name"] == name:
            return c["status"]
    raise KeyError(name)


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def theta0_doc(outdir):
    path = outdir / "theta0.json"
    rc = cli.run(["theta0", "--out", str(path)])
    return rc, path


@pytest.fixture(scope="module")
def mu1_doc(outdir):
    path = outdir / "mu1_pi2.json"
    rc = cli.run(["mu1", "--alpha", "pi/2",
                  "--schedule", "8:0.1,8:0.05", "--out", str(path)])
    return rc, path


@pytest.fixture(scope="module")
def sweep_doc_pi2(outdir):
    path = outdir / "sweep_pi2.json"
    csvp = outdir / "sweep_pi2.csv"
    rc = cli.run(["sweep", "--alpha", "pi/2",
                  "--mu-grid", "0.53,0.54,0.55",
                  "--radius", "8", "--step", "0.2",
                  "--csv", str(csvp), "--out", str(path)])
    return rc, path, csvp


@pytest.fixture(scope="module")
def sweep_doc_pi3(outdir):
    path = outdir / "sweep_pi3.json"
    rc = cli.run(["sweep", "--alpha", "pi/3",
                  "--mu-grid", "0.50,0.51,0.52",
                  "--radius", "8", "--step", "0.2", "--out", str(path)])
    return rc, path


@pytest.fixture(scope="module")
def fields_doc(outdir):
    path = outdir / "fields_square.json"
    csvp = outdir / "fields_square.csv"
    rc = cli.run(["fields", "--polygon", "square", "--kappa", "10",
                  "--schedule", "8:0.1,8:0.05",
                  "--csv", str(csvp), "--out", str(path)])
    return rc, path, csvp


@pytest.fixture(scope="module")
def solve_doc(outdir):
    path = outdir / "solve_square.json"
    fpath = outdir / "solve_field.json"
    rc = cli.run(["solve", "--polygon", "square", "--kappa", "12",
                  "--mu", "0.55", "--sector-radius", "8",
                  "--sector-step", "0.1", "--out", str(path),
                  "--field-out", str(fpath)])
    return rc, path, fpath


@pytest.fixture(scope="module")
def verify_doc(outdir):
    path = outdir / "verify_square.json"
    csvp = outdir / "verify_square.csv"
    rc = cli.run(["verify", "--polygon", "square",
                  "--kappas", "10,12,14", "--mu", "0.55",
                  "--sector-radius", "8", "--sector-step", "0.1",
                  "--csv", str(csvp), "--out", str(path)])
    return rc, path, csvp


def test_parse_angle():
    assert cli.parse_angle("pi/2") == pytest.approx(PI / 2)
    assert cli.parse_angle("3pi/5") == pytest.approx(0.6 * PI)
    assert cli.parse_angle("2pi") == pytest.approx(2 * PI)
    assert cli.parse_angle(" PI / 3 ") == pytest.approx(PI / 3)
    assert cli.parse_angle("2*pi/3") == pytest.approx(2 * PI / 3)
    assert cli.parse_angle("1.2") == pytest.approx(1.2)
    for bad in ("twopi", "abc", "pi/x"):
        with pytest.raises(ParameterError):
            cli.parse_angle(bad)


def test_parse_floats():
    assert cli.parse_floats("0.5,0.55, 0.6") == [0.5, 0.55, 0.6]
    assert cli.parse_floats("15,") == [15.0]
    with pytest.raises(ParameterError):
        cli.parse_floats("a,b")


def test_parse_schedule():
    assert cli.parse_schedule(None) is None
    assert cli.parse_schedule("14:0.07,14:0.035") == [(14.0, 0.07),
                                                     (14.0, 0.035)]
    for bad in ("14", "a:b"):
        with pytest.raises(ParameterError):
            cli.parse_schedule(bad)


def test_load_polygon_path(tmp_path, triangle):
    path = tmp_path / "tri.json"
    path.write_text(polygon_to_json(triangle))
    dom = cli.load_polygon(str(path))
    assert dom.n_vertices == 3
    assert np.allclose(dom.vertices, triangle.vertices)


def test_unknown_flag_no_partial_output(tmp_path, capsys):
    out = tmp_path / "never.json"
    rc = cli.run(["sector", "--alpha", "pi/2", "--mu", "0.55",
                  "--out", str(out), "--bogus"])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParameterError"
    assert not out.exists()


def test_no_subcommand_is_error(capsys):
    assert cli.run([]) == 1
    assert "error" in json.loads(capsys.readouterr().err)


def test_bad_angle_error_json(capsys):
    rc = cli.run(["mu1", "--alpha", "nonsense"])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParameterError"


def test_version_exits():
    with pytest.raises(SystemExit):
        cli.run(["--version"])


def test_theta0_defaults(theta0_doc):
    rc, path = theta0_doc
    assert rc == 0
    doc = read_doc(path)["document"]
    assert doc["schema"] == "cornergl/1"
    assert doc["command"] == "theta0"
    assert abs(doc["results"]["theta0"] - 0.59) <= 0.012
    assert all(c["status"] == "pass" for c in doc["checks"])
    assert doc["config_hash"] == content_hash(doc["config"])


def test_mu1_coarse_is_inconclusive(mu1_doc):
    rc, path = mu1_doc
    assert rc == 2
    doc = read_doc(path)
    assert check_status(doc, "radius-insensitive") == "inconclusive"
    assert check_status(doc, "positive-threshold") == "pass"
    assert doc["document"]["results"]["mu1"] == pytest.approx(0.51, abs=0.02)


def test_sector_run(outdir, capsys):
    out = outdir / "sector.json"
    fout = outdir / "sector_field.json"
    rc = cli.run(["sector", "--alpha", "pi/2", "--mu", "0.55",
                  "--radius", "8", "--step", "0.2",
                  "--out", str(out), "--field-out", str(fout)])
    stdout = capsys.readouterr().out
    assert rc == 0
    assert "E(0.55, pi/2)" in stdout
    doc = read_doc(out)["document"]
    assert doc["results"]["energy"] < 0
    assert all(c["status"] == "pass" for c in doc["checks"])
    payload = read_doc(fout)
    assert payload["kind"] == "sector-field"
    assert payload["mu"] == 0.55
    assert len(payload["values"]) > 0


def test_document_determinism(outdir):
    a = outdir / "det_a.json"
    b = outdir / "det_b.json"
    base = ["sector", "--alpha", "pi/2", "--mu", "0.52",
            "--radius", "6", "--step", "0.2"]
    assert cli.run(base + ["--out", str(a)]) == 0
    assert cli.run(base + ["--out", str(b)]) == 0
    da, db = read_doc(a)["document"], read_doc(b)["document"]
    # only the output path, and with it the config hash, may differ
    assert da != db
    for d in (da, db):
        d["config"].pop("out")
        d.pop("config_hash")
    assert canonical_json(da) == canonical_json(db)
    # identical path: the whole document subtree is reproduced
    first = read_doc(a)["document"]
    assert cli.run(base + ["--out", str(a)]) == 0
    assert read_doc(a)["document"] == first


def test_document_reemits_byte_identical(theta0_doc):
    _, path = theta0_doc
    raw = path.read_bytes()
    assert canonical_json(json.loads(raw)).encode() == raw


def test_sweep_csv(sweep_doc_pi2):
    rc, path, csvp = sweep_doc_pi2
    assert rc == 0
    rows = read_rows(csvp)
    assert tuple(rows[0]) == cli.SWEEP_COLUMNS
    assert len(rows) == 4
    energies = [float(r[1]) for r in rows[1:]]
    assert energies == sorted(energies, reverse=True)
    doc = read_doc(path)
    assert check_status(doc, "concavity") == "pass"
    assert check_status(doc, "uniform-grid") == "pass"


def test_sweep_trivial_region(sweep_doc_pi3):
    rc, path = sweep_doc_pi3
    assert rc == 0
    res = read_doc(path)["document"]["results"]
    assert res["energies"] == [0.0, 0.0, 0.0]
    assert res["threshold"] > 0.52


def test_fields_run(fields_doc):
    rc, path, csvp = fields_doc
    assert rc == 0
    rows = read_rows(csvp)
    assert tuple(rows[0]) == ("vertex", "alpha", "mu1", "field")
    assert len(rows) == 5
    doc = read_doc(path)
    assert check_status(doc, "field-ordering") == "pass"
    assert check_status(doc, "corner-assumption") == "pass"
    res = doc["document"]["results"]
    assert res["h_c2"] == pytest.approx(10.0)


def test_solve_run(solve_doc):
    rc, path, fpath = solve_doc
    assert rc == 0
    doc = read_doc(path)["document"]
    res = doc["results"]
    assert res["energy"] < 0
    assert len(res["corners"]) == 4
    assert res["supnorm"] <= 1.0 + 1e-6
    for name in ("amplitude-bound", "stationarity", "gauge-invariance"):
        assert check_status({"document": doc}, name) == "pass"
    payload = read_doc(fpath)
    assert payload["kind"] == "gl-field"
    assert payload["kappa"] == 12.0


def test_verify_run(verify_doc):
    rc, path, csvp = verify_doc
    assert rc != 1
    rows = read_rows(csvp)
    assert tuple(rows[0]) == cli.VERIFY_COLUMNS
    assert len(rows) == 1 + 3 * 4
    res = read_doc(path)["document"]["results"]
    assert len(res["rows"]) == 12
    assert res["kappas"] == [10.0, 12.0, 14.0]
    for devs in res["trends"].values():
        assert len(devs) == 3
    assert res["matched_l2_variant"] in ("literal", "mu-scaled")


def test_report_merges_documents(outdir, sweep_doc_pi2, sweep_doc_pi3,
                                 verify_doc, fields_doc, mu1_doc,
                                 theta0_doc):
    merged = outdir / "merged"
    rc = cli.run(["report", "--inputs",
                  str(sweep_doc_pi2[1]), str(sweep_doc_pi3[1]),
                  str(verify_doc[1]), str(fields_doc[1]),
                  str(mu1_doc[1]), str(theta0_doc[1]),
                  "--out-dir", str(merged),
                  "--out", str(merged / "report.json")])
    assert rc == 0
    sweeps = read_rows(merged / "sweeps.csv")
    assert tuple(sweeps[0]) == ("alpha",) + cli.SWEEP_COLUMNS
    assert len(sweeps) == 7
    alphas = [float(r[0]) for r in sweeps[1:]]
    assert alphas == sorted(alphas)
    trends = read_rows(merged / "corner_trends.csv")
    assert tuple(trends[0]) == cli.VERIFY_COLUMNS
    assert len(trends) == 13
    flags = read_rows(merged / "trend_flags.csv")
    assert len(flags) == 4
    assert {r[1] for r in flags[1:]} == {"dev_kinetic", "dev_l2", "dev_l4"}
    fields = read_rows(merged / "critical_fields.csv")
    assert len(fields) == 5
    thresholds = read_rows(merged / "thresholds.csv")
    assert len(thresholds) == 3
    kinds = {r[0] for r in thresholds[1:]}
    assert kinds == {"mu1", "theta0"}
    counts = read_doc(merged / "report.json")["document"]["results"]["counts"]
    assert counts == {"sweep": 2, "verify": 1, "fields": 1, "thresholds": 2}


def test_report_empty_inputs(tmp_path, capsys):
    rc = cli.run(["report", "--out-dir", str(tmp_path)])
    assert rc == 1
    assert "error" in json.loads(capsys.readouterr().err)


def test_report_schema_mismatch(tmp_path, theta0_doc, capsys):
    _, src = theta0_doc
    doc = read_doc(src)
    doc["document"]["schema"] = "cornergl/999"
    bad = tmp_path / "bad.json"
    bad.write_text(canonical_json(doc))
    rc = cli.run(["report", "--inputs", str(bad),
                  "--out-dir", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert "migrate" in err["message"]


def test_report_foreign_json(tmp_path, capsys):
    bad = tmp_path / "foreign.json"
    bad.write_text('{"x": 1}')
    rc = cli.run(["report", "--inputs", str(bad),
                  "--out-dir", str(tmp_path)])
    assert rc == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ParameterError"


def test_console_entry_point():
    exe = shutil.which("cornergl")
    assert exe is not None
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "cornergl" in proc.stdout