"""Command-line interface: schemas, determinism, exit codes, report files."""
import csv
import io
import subprocess
import sys

import pytest

from dual_irs_opt.cli import SCHEMAS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


SMALL = "M = 16\nL = 2\nN = 2\nseed = 1\n"


@pytest.fixture
def small_scenario(tmp_path):
    path = tmp_path / "small.scn"
    path.write_text(SMALL, encoding="utf-8")
    return str(path)


def test_schema_flags(capsys):
    for command in SCHEMAS:
        code, out, _ = run_cli(capsys, command, "--schema")
        assert code == 0
        assert out.startswith(",".join(SCHEMAS[command]))


def test_solve_csv_structure_and_determinism(capsys, small_scenario):
    code, first, err = run_cli(capsys, "solve", "--scenario", small_scenario)
    assert code == 0 and err == ""
    code, second, _ = run_cli(capsys, "solve", "--scenario", small_scenario)
    assert first == second  # byte-identical reruns
    rows = rows_of(first)
    assert rows[0] == SCHEMAS["solve"]
    records = {row[0] for row in rows[1:]}
    assert {"x0", "x1", "x2", "m1", "m2", "min_rate", "trace"} <= records
    values = {row[0]: row[2] for row in rows[1:] if row[1] == ""}
    assert float(values["min_rate"]) > 0
    assert int(values["m1"]) + int(values["m2"]) == 16


def test_validate_passes_on_default_scenario(capsys):
    code, out, _ = run_cli(capsys, "validate", "--seed", "0")
    rows = rows_of(out)
    assert rows[0] == SCHEMAS["validate"]
    assert all(row[1] == "PASS" for row in rows[1:])
    assert code == 0


def test_validate_deterministic(capsys):
    _, first, _ = run_cli(capsys, "validate", "--seed", "3")
    _, second, _ = run_cli(capsys, "validate", "--seed", "3")
    assert first == second


def test_sweep_m_structure(capsys, small_scenario):
    code, out, _ = run_cli(capsys, "sweep-m", "--scenario", small_scenario,
                           "--m-values", "64,128,256", "--alloc-policy", "even")
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == SCHEMAS["sweep-m"]
    assert len(rows) == 4
    assert rows[1][2] == ""            # first point has no doubling slope
    assert float(rows[2][2]) > 0
    assert float(rows[2][0]) == 128.0


def test_sweep_pe_structure(capsys, small_scenario):
    code, out, _ = run_cli(capsys, "sweep-pe", "--scenario", small_scenario,
                           "--pe-values", "0.001,0.002,1.0")
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == SCHEMAS["sweep-pe"]
    assert len(rows) == 4
    assert rows[2][2] != ""            # 0.002 doubles 0.001
    assert rows[3][2] == ""


def test_sweep_m_default_budgets_land_in_the_quadratic_band(capsys):
    code, out, _ = run_cli(capsys, "sweep-m", "--seed", "0")
    assert code == 0
    rows = rows_of(out)
    assert [float(r[0]) for r in rows[1:]] == [1024.0, 2048.0, 4096.0]
    assert 1.9 <= float(rows[-1][2]) <= 2.1


def test_compare_lists_all_four_kinds(capsys, small_scenario):
    code, out, _ = run_cli(capsys, "compare", "--scenario", small_scenario,
                           "--grid-step", "4.0")
    assert code == 0
    rows = rows_of(out)
    kinds = [row[0] for row in rows[1:]]
    assert kinds == ["double-active", "double-passive", "single-active",
                     "single-passive"]
    rates = {row[0]: float(row[1]) for row in rows[1:]}
    assert rates["double-active"] > rates["double-passive"]


def test_oracle_reports_gap(capsys, small_scenario):
    code, out, _ = run_cli(capsys, "oracle", "--scenario", small_scenario,
                           "--grid-step", "8.0", "--alloc-step", "2")
    assert code == 0
    values = {row[0]: row[2] for row in rows_of(out)[1:]}
    assert float(values["es_min_rate"]) > 0
    assert float(values["rel_gap"]) <= 0.05  # coarse grid stays near the solver


def test_bad_scenario_file_exits_two(capsys, tmp_path):
    path = tmp_path / "bad.scn"
    path.write_text("M = \n", encoding="utf-8")
    code, out, err = run_cli(capsys, "solve", "--scenario", str(path))
    assert code == 2
    assert out == ""
    assert "error" in err


def test_missing_scenario_file_exits_two(capsys):
    code, _, err = run_cli(capsys, "solve", "--scenario", "/nonexistent.scn")
    assert code == 2 and err != ""


def test_unknown_command_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_plot_dir_writes_csv_and_figure(tmp_path, capsys, small_scenario):
    out_dir = tmp_path / "report"
    code, out, _ = run_cli(capsys, "sweep-m", "--scenario", small_scenario,
                           "--m-values", "32,64", "--plot-dir", str(out_dir))
    assert code == 0
    assert (out_dir / "sweep-m.csv").read_bytes().decode("utf-8") == out
    png = (out_dir / "sweep-m.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_console_script_entry_point():
    result = subprocess.run([sys.executable, "-m", "dual_irs_opt.cli",
                             "solve", "--schema"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.startswith("record,index,value")
