import csv
import io
import json
import os
import subprocess
import sys

import pytest

from betawishart import __version__
from betawishart.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


M10 = ["--beta", "1", "--m", "10", "--n", "3", "--sigma", "identity", "--K", "60"]


def test_cdf_example(capsys):
    code, out, _ = run(capsys, "cdf", *M10, "--x", "16.2")
    assert code == 0
    (row,) = rows(out)
    assert set(row) == {"x", "value", "degrees_used", "last_layer_ratio", "converged"}
    assert abs(float(row["value"]) - 0.50) <= 0.01
    assert row["converged"] == "true"


def test_quantile_example(capsys):
    code, out, _ = run(capsys, "quantile", "--alpha", "0.5", *M10)
    assert code == 0
    assert abs(float(rows(out)[0]["value"]) - 16.2) <= 0.05


def test_grid_and_pdf(capsys):
    code, out, _ = run(capsys, "pdf", *M10, "--grid", "3:15:5")
    assert code == 0
    r = rows(out)
    assert [float(v["x"]) for v in r] == [3.0, 6.0, 9.0, 12.0, 15.0]
    assert all(float(v["value"]) > 0 for v in r)


def test_sigma_forms(capsys, tmp_path):
    matrix = tmp_path / "sigma.txt"
    matrix.write_text("1.81 0 0\n0 1.31 0\n0 0 0.69\n")
    outs = []
    for sigma in ("1.81,1.31,0.69", str(matrix)):
        code, out, _ = run(capsys, "cdf", "--beta", "2", "--n", "1", "--sigma", sigma, "--K", "40", "--x", "2.5")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]


def test_joint(capsys):
    code, out, _ = run(capsys, "joint", "--beta", "1", "--m", "3", "--n", "2",
                       "--ells", "3.0,1.0", "--ells", "5.0,0.5")
    assert code == 0
    assert len(rows(out)) == 2


def test_validation_exit_codes(capsys):
    # m = n is the non-singular case
    assert run(capsys, "cdf", "--beta", "1", "--m", "3", "--n", "3", "--x", "1")[0] == 2
    assert run(capsys, "cdf", "--beta", "1", "--m", "3", "--n", "1", "--x", "-1")[0] == 2
    assert run(capsys, "cdf", "--beta", "1", "--m", "3", "--n", "1", "--sigma", "1,-1,1", "--x", "1")[0] == 2
    assert run(capsys, "cdf", "--beta", "1", "--m", "4", "--n", "1", "--sigma", "1,1,1", "--x", "1")[0] == 2
    assert run(capsys, "capacity", "--m", "3", "--rho", "-1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["cdf", "--beta", "3", "--m", "3", "--n", "1", "--x", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["cdf", "--m", "3", "--n", "1", "--x", "1", "--bogus"])
    assert exc.value.code == 2


def test_convergence_exit_code_keeps_partial_output(capsys):
    # the K=60 truncated CDF peaks just below 0.996
    code, out, _ = run(capsys, "quantile", "--alpha", "0.05,0.999", *M10)
    assert code == 3
    r = rows(out)
    assert r[0]["converged"] == "true"
    assert r[1]["converged"] == "false"


def test_json_document(capsys):
    code, out, _ = run(capsys, "quantile", "--alpha", "0.05,0.999", *M10, "--format", "json")
    assert code == 3
    doc = json.loads(out)
    assert doc["schema_version"] == "1.0"
    assert doc["library_version"] == __version__
    assert doc["command"] == "quantile"
    assert doc["config"]["K"] == 60 and doc["config"]["m"] == 10
    assert doc["fields"] == ["alpha", "value", "degrees_used", "last_layer_ratio", "converged"]
    assert doc["records"][1]["value"] is None
    assert "timestamp" in doc


def test_reruns_are_byte_identical(tmp_path, capsys):
    for fmt in ("csv", "json"):
        paths = []
        for i in range(2):
            path = tmp_path / f"run{i}.{fmt}"
            code = main(["simulate", "--beta", "2", "--m", "3", "--n", "1", "--sigma", "1.81,1.31,0.69",
                         "--count", "500", "--seed", "9", "--format", fmt, "--output", str(path)])
            assert code == 0
            paths.append(path)
        a, b = (p.read_text() for p in paths)
        if fmt == "json":
            a, b = (json.loads(t) for t in (a, b))
            a.pop("timestamp"), b.pop("timestamp")
            a["config"].pop("output"), b["config"].pop("output")
        assert a == b


def test_cdf_rerun_byte_identical(tmp_path):
    texts = []
    for name in ("a.csv", "b.csv"):
        main(["cdf", *M10, "--grid", "1:30:7", "--output", str(tmp_path / name)])
        texts.append((tmp_path / name).read_bytes())
    assert texts[0] == texts[1]


def test_simulate_csv_header(capsys):
    code, out, _ = run(capsys, "simulate", "--beta", "1", "--m", "3", "--n", "1", "--count", "5", "--seed", "1")
    lines = out.splitlines()
    assert lines[0].startswith("# beta=1 m=3 n=1 sigma=1.0,1.0,1.0 seed=1 count=5")
    assert lines[1] == "l1" and len(lines) == 7


def test_output_directory_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BETAWISHART_OUTPUT_DIR", str(tmp_path / "outdir"))
    code = main(["cdf", *M10, "--x", "10", "--output", "cdf.csv"])
    assert code == 0
    files = os.listdir(tmp_path / "outdir")
    # written atomically: no temporary file left behind
    assert files == ["cdf.csv"]
    assert rows((tmp_path / "outdir" / "cdf.csv").read_text())[0]["x"] == "10.0"


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", *M10, "--count", "20000", "--seed", "3")
    r = rows(out)
    assert r[0]["quantity"] == "ks_distance"
    assert [row["quantity"] for row in r[1:]] == ["decile"] * 9
    ks = float(r[0]["value"])
    assert code == (0 if ks <= 0.01 else 1)
    code, _, _ = run(capsys, "compare", *M10, "--count", "20000", "--seed", "3", "--ks-threshold", "1e-6")
    assert code == 1


def test_splitting_check(capsys):
    code, out, _ = run(capsys, "splitting-check", "--A", "1,2,3", "--B", "1,0.5", "--kappa", "1",
                       "--count", "5000", "--seed", "1")
    assert code == 0
    (row,) = rows(out)
    assert abs(float(row["exact"]) - 3.0) < 1e-12
    assert run(capsys, "splitting-check", "--A", "1,2,3", "--B", "1,0.5", "--kappa", "1,1,1")[0] == 2


def test_capacity(capsys):
    code, out, _ = run(capsys, "capacity", "--m", "3", "--sigma", "0.69,0.69,0.69", "--snr-db", "0,11")
    assert code == 0
    r = rows(out)
    assert float(r[0]["value"]) < float(r[1]["value"])
    code, out, _ = run(capsys, "capacity", "--m", "3", "--rho", "0")
    assert float(rows(out)[0]["value"]) == 0.0


def test_table2(capsys):
    code, out, _ = run(capsys, "table2", "--K", "100")
    r = rows(out)
    assert [int(v["m"]) for v in r] == [2, 3, 4]
    for v in r:
        reference = float(v["reference"])
        assert abs(float(v["computed"]) - reference) <= 0.01 or float(v["computed"]) >= 0.999
    assert code == 0


def test_table1(capsys):
    code, out, _ = run(capsys, "table1")
    r = rows(out)
    assert len(r) == 10
    assert code == (0 if all(v["pass"] == "true" for v in r) else 1)
    for v in r:
        computed = float(v["computed"]) if v["computed"] else float("nan")
        assert v["pass"] == ("true" if abs(computed - float(v["reference"])) <= 0.05 else "false")


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "betawishart.cli", "cdf", "--beta", "1", "--m", "2", "--n", "1", "--x", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert abs(float(rows(proc.stdout)[0]["value"]) - (1 - 2.718281828459045**-1)) < 1e-9
