import csv
import json

import pytest

from app.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(["verify", "--suite", "riccati", "--out", str(out)]) == EXIT_OK
    assert (out / "records.json").is_file()
    assert (out / "summary.txt").is_file()
    assert capsys.readouterr().out.endswith("PASS\n")


def test_verify_fails_on_invalid_system(tmp_path):
    system = tmp_path / "skewless.json"
    system.write_text(
        json.dumps({"A": [[1.0]], "B": [[0.0]], "S": [[0.0, 1.0], [1.0, 0.0]]}),
        encoding="utf-8",
    )
    code = main(["verify", "--suite", "riccati", "--system", str(system), "--out", str(tmp_path / "out")])
    assert code == EXIT_FAILED
    records = json.loads((tmp_path / "out" / "records.json").read_text(encoding="utf-8"))
    assert records[0]["error"].startswith("NotSkew: ")


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--suite", "fourier"],
        ["verify", "--system", "no_such_system"],
        ["verify", "--grid=-1:1"],
        ["verify", "--plan", "no_such_plan"],
    ],
)
def test_verify_rejects_bad_configuration(argv):
    assert main(argv) == EXIT_CONFIG


def test_config_file_overrides_flags(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text("suites: [riccati]\nsystems: [diagonal_pair]\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["verify", "--suite", "bounds", "--config", str(config), "--out", str(out)]) == EXIT_OK
    records = json.loads((out / "records.json").read_text(encoding="utf-8"))
    assert {record["system"] for record in records} == {"diagonal_pair"}
    assert all(record["property"].startswith("Riccati") for record in records)


def test_suite_flag_accepts_comma_lists(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--suite", "riccati,riccati", "--out", str(out)]) == EXIT_OK


def test_eval_bounds(tmp_path):
    path = tmp_path / "bounds.csv"
    code = main(["eval", "bounds", "--system", "diagonal_pair", "--out", str(path), "--t-count", "5", "--eta", "0.2"])
    assert code == EXIT_OK
    rows = read_csv(path)
    assert rows[0] == ["t", "C1", "C2", "C3", "C4", "C5", "C6"]
    assert len(rows) == 6
    assert float(rows[1][0]) == pytest.approx(1e-2)
    assert float(rows[-1][0]) == pytest.approx(1e2)


def test_eval_kernel(tmp_path):
    path = tmp_path / "kernel.csv"
    code = main(["eval", "kernel", "--system", "scalar_complex_rotating", "--out", str(path), "--r-count", "11"])
    assert code == EXIT_OK
    rows = read_csv(path)
    assert rows[0] == ["t", "psi", "K00_re", "K00_im"]
    assert len(rows) == 12


def test_eval_rejects_bad_arguments(tmp_path):
    path = str(tmp_path / "kernel.csv")
    assert main(["eval", "kernel", "--axis", "2", "--out", path]) == EXIT_CONFIG
    assert main(["eval", "kernel", "--system", "no_such_system", "--out", path]) == EXIT_CONFIG
    assert main(["eval", "kernel", "--t", "0", "--out", path]) == EXIT_CONFIG
    assert main(["eval", "bounds", "--vartheta", "1.5", "--out", path]) == EXIT_CONFIG


def test_eval_semigroup(tmp_path):
    path = tmp_path / "semigroup.csv"
    code = main(["eval", "semigroup", "--out", str(path), "--t", "0.5", "--grid=-3:3:7"])
    assert code == EXIT_OK
    rows = read_csv(path)
    assert rows[0] == ["x0", "x1", "v0_re", "v0_im"]
    assert len(rows) == 50
    header = json.loads((tmp_path / "semigroup.csv.json").read_text(encoding="utf-8"))
    assert header["t"] == 0.5
    assert header["system"] == "scalar_heat"
    assert [axis["count"] for axis in header["axes"]] == [7, 7]
