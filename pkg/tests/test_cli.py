import json
import subprocess
import sys

import pytest

from rvbent.cli import main

jsonschema = pytest.importorskip("jsonschema")

try:
    from importlib.resources import files as _files
except ImportError:  # pragma: no cover
    _files = None


def _schema(name):
    text = (_files("rvbent") / "schemas" / f"{name}.schema.json").read_text()
    return json.loads(text)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def strip_timestamp(doc):
    doc = dict(doc)
    doc.pop("created_at", None)
    return doc


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------

def test_exact_periodic_4(capsys):
    code, out, _ = run_cli(capsys, "exact", "--L", "4", "--bc", "periodic")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("exact"))
    assert doc["covering_count"] == 272
    assert len(doc["orbits"]) == 1
    assert doc["orbits"][0]["p_decimal"] == "0.4457579115872"
    assert doc["orbits"][0]["werner"]["entangled"] is True
    assert doc["orbits"][0]["werner"]["bound_status"] == "satisfied"


def test_exact_open_4(capsys):
    code, out, _ = run_cli(capsys, "exact", "--L", "4", "--bc", "open")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("exact"))
    assert doc["covering_count"] == 36
    centermost = [o for o in doc["orbits"] if o["is_centermost"]]
    assert len(centermost) == 1
    assert centermost[0]["p_decimal"].startswith("0.2281115037")
    assert centermost[0]["orbit_index"] == 0
    statuses = {o["werner"]["bound_status"] for o in doc["orbits"]}
    assert "violated" not in statuses


def test_exact_open_2(capsys):
    code, out, _ = run_cli(capsys, "exact", "--L", "2", "--bc", "open")
    assert code == 0
    doc = json.loads(out)
    assert doc["covering_count"] == 2
    assert doc["orbits"][0]["value_rational"] == "-1/2"
    assert doc["orbits"][0]["p_rational"] == "2/3"


def test_exact_csv_format(capsys):
    code, out, _ = run_cli(capsys, "exact", "--L", "2", "--bc", "open", "--format", "csv")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.split(",")[:3] == ["L", "bc", "covering_count"]
    assert row.split(",")[:3] == ["2", "open", "2"]


def test_exact_validation_and_guard_exit_codes(capsys):
    assert run_cli(capsys, "exact", "--L", "3", "--bc", "open")[0] == 2
    assert run_cli(capsys, "exact", "--L", "8", "--bc", "periodic")[0] == 3
    assert run_cli(capsys, "exact", "--L", "4", "--bc", "nonsense")[0] == 2
    code, out, err = run_cli(capsys, "exact", "--L", "3", "--bc", "open")
    assert out == ""
    assert "error" in err


def test_unknown_flags_exit_2(capsys):
    assert run_cli(capsys, "exact", "--badflag", "1")[0] == 2
    assert run_cli(capsys, "nonsense")[0] == 2


# ---------------------------------------------------------------------------
# gas / bound / fit
# ---------------------------------------------------------------------------

def test_gas_n3(capsys):
    code, out, _ = run_cli(capsys, "gas", "--N", "3")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("gas"))
    assert doc["p_rational"] == "5/9"
    assert doc["corr_opposite_rational"] == "-5/12"
    assert doc["werner"]["entangled"] is True
    assert doc["werner"]["bound_status"] == "saturated"


def test_gas_invalid_n(capsys):
    assert run_cli(capsys, "gas", "--N", "0")[0] == 2
    assert run_cli(capsys, "gas", "--N", "7")[0] == 3


def test_bound_satisfied(capsys):
    code, out, _ = run_cli(capsys, "bound", "--corr", "-0.29595", "--err", "0.0003", "--z", "4")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("bound"))
    assert doc["status"] == "satisfied"
    assert doc["corr_min_rational"] == "-3/8"


def test_bound_violated_and_saturated(capsys):
    assert json.loads(run_cli(capsys, "bound", "--corr", "-0.40", "--z", "4")[1])["status"] == "violated"
    assert json.loads(run_cli(capsys, "bound", "--corr", "-0.375", "--z", "4")[1])["status"] == "saturated"


def test_bound_invalid_z(capsys):
    assert run_cli(capsys, "bound", "--corr", "-0.3", "--z", "0")[0] == 2


def test_fit_roundtrip(tmp_path, capsys):
    path = tmp_path / "pvals.csv"
    rows = ["L,p,p_err"]
    for L in (8, 16, 32, 64, 128):
        rows.append(f"{L},{0.3946 + 0.5 / L},0.0005")
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run_cli(capsys, "fit", "--input", str(path))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, _schema("fit"))
    assert abs(doc["p_infinity"] - 0.3946) < 1e-6
    assert abs(doc["coefficients"]["a"] - 0.5) < 1e-4


def test_fit_missing_file(tmp_path, capsys):
    assert run_cli(capsys, "fit", "--input", str(tmp_path / "nope.csv"))[0] == 2


def test_output_file_option(tmp_path, capsys):
    out_path = tmp_path / "gas.json"
    code, out, err = run_cli(capsys, "gas", "--N", "2", "--output", str(out_path))
    assert code == 0
    assert out == ""
    doc = json.loads(out_path.read_text())
    assert doc["p_rational"] == "2/3"


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------

def test_mc_run_writes_artifacts(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, err = run_cli(capsys, "mc", "--L", "4", "--seed", "1",
                             "--sweeps", "3200", "--therm", "200", "--bins", "32")
    assert code == 0
    assert "p = " in out and "bound(z=4)" in out
    doc = json.loads((tmp_path / "mc_L4_seed1.json").read_text())
    jsonschema.validate(doc, _schema("mc"))
    assert doc["result"]["metadata"]["config"]["seed"] == 1
    csv_lines = (tmp_path / "mc_L4_seed1_bins.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "bin_index,corr_mean"
    assert len(csv_lines) == 33


def test_mc_deterministic_modulo_timestamp(tmp_path, capsys):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    for out_path in (out1, out2):
        code, _, _ = run_cli(capsys, "mc", "--L", "4", "--seed", "7",
                             "--sweeps", "3200", "--therm", "200", "--bins", "32",
                             "--output", str(out_path),
                             "--bins-csv", str(out_path) + ".csv")
        assert code == 0
    a = json.loads(out1.read_text())
    b = json.loads(out2.read_text())
    a.pop("created_at")
    b.pop("created_at")
    assert a == b
    assert (tmp_path / "a.json.csv").read_text() == (tmp_path / "b.json.csv").read_text()


def test_mc_validation_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run_cli(capsys, "mc", "--L", "5", "--seed", "1", "--sweeps", "3200")[0] == 2
    assert run_cli(capsys, "mc", "--L", "4", "--seed", "1", "--sweeps", "3200",
                   "--bins", "7")[0] == 2


def test_console_entrypoint_subprocess():
    proc = subprocess.run([sys.executable, "-m", "rvbent", "gas", "--N", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["p_rational"] == "1/2"
    assert doc["werner"]["bound_status"] == "saturated"
