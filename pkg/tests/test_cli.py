import json

import pytest

from sphbif.cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main, parse_sweep, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--smax", "4", "--precision", "8")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["kernel"] == "onsager"
    entries = {e["s"]: e for e in data["entries"]}
    assert entries[2]["lambda_float"] == pytest.approx(0.09817477, abs=1e-8)


def test_spectrum_csv_to_file(capsys, tmp_path):
    path = tmp_path / "spectrum.csv"
    code, out, _ = run(capsys, "spectrum", "--smax", "4", "--format", "csv", "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert path.read_text().splitlines()[0].startswith("s,")


def test_custom_kernel(capsys, tmp_path):
    path = tmp_path / "k.json"
    path.write_text(json.dumps({"coefficients": {"0": "1/3", "2": -1}}))
    code, out, _ = run(capsys, "spectrum", "--kernel", "custom", "--taylor", str(path), "--smax", "2")
    assert code == EXIT_OK
    assert json.loads(out)["kernel"] == "custom"


@pytest.mark.parametrize("argv", [
    ["spectrum", "--kernel", "custom"],
    ["spectrum", "--kernel", "custom", "--taylor", "/nonexistent.json"],
    ["product", "2,3", "1,0"],
    ["product", "a", "1,0"],
    ["classify", "--stability-sweep", "1:0:0.1"],
    ["bogus"],
    ["reduce", "--kernel", "dipolar"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_product(capsys):
    code, out, _ = run(capsys, "product", "1,0", "1,0")
    assert code == EXIT_OK
    terms = {(t["l"], t["m"]): t["coeff_float"] for t in json.loads(out)["terms"]}
    assert set(terms) == {(0, 0), (2, 0)}


def test_reduce_reports_reference_mismatch(capsys):
    code, out, err = run(capsys, "reduce")
    assert code == EXIT_MISMATCH
    data = json.loads(out)
    assert data["reduced"]["c_float"] == pytest.approx(0.0088467, abs=1e-7)
    assert data["golden"]["match_percent"] == pytest.approx(100 * 16 / 82, abs=0.01)
    assert data["config"]["order"] == 4
    assert "golden match: 20%" in err


def test_reduce_order_two_matches(capsys):
    code, out, _ = run(capsys, "reduce", "--order", "2", "--basis", "complex")
    assert code == EXIT_OK
    assert json.loads(out)["golden"]["match_percent"] == 100.0


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--stability-sweep", "0.09:0.10:0.01", "--check-equivariance",
                       "--trials", "5")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["verdict"] == "transcritical, uniaxial"
    assert data["stability_flips"] == [[0.09, 0.1]]
    assert data["equivariance"]["max_residual"] < 1e-12


def test_verify(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["ok"] and len(data["checks"]) == 10


def test_help_exits_cleanly(capsys):
    assert run(capsys, "--help")[0] == EXIT_OK


def test_parse_sweep():
    assert parse_sweep("0.1:0.3:0.1") == pytest.approx([0.1, 0.2, 0.3])
    with pytest.raises(UsageError):
        parse_sweep("x")
