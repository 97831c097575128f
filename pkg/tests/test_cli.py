import json
import subprocess
import sys

import pytest

from conefix.cli import main


def run(argv, capsys=None):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:  # argparse rejects before main can
        code = exc.code
    out = capsys.readouterr() if capsys else None
    return code, out


def outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.fixture
def sets(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("0\n")
    b.write_text("1\n3\n")
    return a, b


# --- delta --------------------------------------------------------------------------


def test_delta_prints_enumerated_value(sets, capsys):
    code, out = run(["delta", *sets], capsys)
    assert code == 0 and float(out.out) == 3.0


def test_delta_identical_files(sets, capsys):
    a, _ = sets
    code, out = run(["delta", a, a], capsys)
    assert code == 0 and float(out.out) == 0.0


def test_delta_dimension_mismatch(tmp_path, sets, capsys):
    c = tmp_path / "c.csv"
    c.write_text("1,2\n")
    code, out = run(["delta", sets[0], c], capsys)
    assert code == 2 and "dimension" in out.err


def test_delta_malformed_csv_names_the_cell(tmp_path, sets, capsys):
    c = tmp_path / "c.csv"
    c.write_text("1\nx\n")
    code, out = run(["delta", sets[0], c], capsys)
    assert code == 2 and "row 2, column 1" in out.err


def test_missing_input_file(tmp_path, sets, capsys):
    code, out = run(["delta", sets[0], tmp_path / "nope.csv"], capsys)
    assert code == 2 and "does not exist" in out.err


# --- solve commands -----------------------------------------------------------------


def test_decreasing_c2(tmp_path):
    code, _ = run(["solve-decreasing", "--map", "c_over_1px", "--param", "c=2", "--out", tmp_path])
    assert code == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert abs(result["point"][0] - 1.0) <= 1e-10
    header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert header == "iteration,x0,residual,order_certified,sandwich_width"


def test_increasing_affine(tmp_path):
    code, _ = run(["solve-increasing", "--map", "affine_halfway", "--x0", "0", "--out", tmp_path])
    assert code == 0
    assert json.loads((tmp_path / "result.json").read_text())["point"][0] == pytest.approx(2.0, abs=1e-10)


def test_designed_two_cycle_exits_3(tmp_path):
    code, _ = run(["solve-decreasing", "--map", "designed_two_cycle", "--out", tmp_path])
    assert code == 3
    assert json.loads((tmp_path / "result.json").read_text())["terminated_by"] == "h1_violation"


def test_max_iter_exits_1(tmp_path):
    code, _ = run(["solve-increasing", "--map", "affine_halfway", "--max-iter", "3", "--out", tmp_path])
    assert code == 1


def test_decreasing_cap_counts_as_unresolved_gap(tmp_path):
    # the even and odd limits have not met, so a 2-cycle cannot be excluded
    code, _ = run(["solve-decreasing", "--map", "c_over_1px", "--max-iter", "3", "--out", tmp_path])
    assert code == 3


def test_unknown_map_exits_2(tmp_path, capsys):
    code, out = run(["solve-decreasing", "--map", "nope", "--out", tmp_path], capsys)
    assert code == 2 and "unknown" in out.err
    code, _ = run(["solve-increasing", "--map", "nope", "--out", tmp_path])
    assert code == 2


def test_bad_flags_exit_2(tmp_path):
    assert run(["solve-decreasing", "--map", "c_over_1px", "--tol", "0"])[0] == 2
    assert run(["solve-decreasing", "--map", "c_over_1px", "--max-iter", "0"])[0] == 2
    assert run(["solve-decreasing", "--map", "c_over_1px", "--param", "c"])[0] == 2
    assert run(["solve-decreasing", "--map", "c_over_1px", "--param", "k=2"])[0] == 2
    assert run(["no-such-command"])[0] == 2


def test_increasing_bad_start_exits_3(tmp_path):
    # F(x) = (x + 2) / 2 is below x = 5: no valid start
    code, _ = run(["solve-increasing", "--map", "affine_halfway", "--x0", "5", "--out", tmp_path])
    assert code == 3


def test_setvalued_builtin_and_file(tmp_path):
    code, _ = run(["solve-setvalued", "--map", "grid_step_strict", "--selector", "min_norm_step",
                   "--tol", "1e-12", "--out", tmp_path / "a"])
    assert code == 0
    point = json.loads((tmp_path / "a" / "result.json").read_text())["point"]
    assert tuple(point) in {(0.0, 2.0), (1.0, 2.0), (2.0, 0.0), (2.0, 1.0)}

    payload = {"domain": [[0.0], [1.0]], "values": [[[1.0]], [[1.0]]]}
    f = tmp_path / "m.json"
    f.write_text(json.dumps(payload))
    code, _ = run(["solve-setvalued", "--map-file", f, "--out", tmp_path / "b"])
    assert code == 0
    assert json.loads((tmp_path / "b" / "result.json").read_text())["point"] == [1.0]

    f.write_text("{\"domain\": 1}")
    assert run(["solve-setvalued", "--map-file", f, "--out", tmp_path / "c"])[0] == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"max_iter": 3, "out": str(tmp_path / "from-config")}))
    code, _ = run(["solve-increasing", "--map", "affine_halfway", "--config", cfg])
    assert code == 1 and (tmp_path / "from-config" / "result.json").exists()
    code, _ = run(["solve-increasing", "--map", "affine_halfway", "--config", cfg, "--max-iter", "1000"])
    assert code == 0
    cfg.write_text("[1, 2]")
    assert run(["solve-decreasing", "--map", "c_over_1px", "--config", cfg])[0] == 2


def test_outputs_are_byte_identical_across_runs(tmp_path):
    for d in ("r1", "r2"):
        run(["solve-decreasing", "--map", "c_over_1px", "--param", "c=2", "--seed", "7", "--out", tmp_path / d])
    assert outputs(tmp_path / "r1") == outputs(tmp_path / "r2")


# --- integral -----------------------------------------------------------------------


def test_solve_integral_golden(tmp_path):
    code, _ = run(["solve-integral", "--kernel", "separable_unit", "--out", tmp_path])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["analytic_gap"] <= 1e-6 and summary["grid_size"] == 257
    rows = (tmp_path / "solution.csv").read_text().splitlines()
    assert rows[0] == "x,psi,Psi,g" and len(rows) == 258


def test_solve_integral_zero_kernel(tmp_path):
    code, _ = run(["solve-integral", "--kernel", "zero", "--grid-size", "9", "--out", tmp_path])
    assert code == 0
    assert json.loads((tmp_path / "summary.json").read_text())["iterations"] == 1


def test_solve_integral_kernel_validation(tmp_path):
    assert run(["solve-integral", "--kernel", "constant", "--grid-size", "9", "--out", tmp_path])[0] == 4
    assert run(["solve-integral", "--kernel", "nope", "--out", tmp_path])[0] == 2


def test_solve_integral_from_csv(tmp_path):
    xs = [i / 8 for i in range(9)]
    lines = ["x," + ",".join(map(repr, xs))]
    lines += [",".join([repr(x)] + [repr((x - y) * (x + y)) for y in xs]) for x in xs]
    k = tmp_path / "k.csv"
    k.write_text("\n".join(lines) + "\n")
    code, _ = run(["solve-integral", "--kernel-csv", k, "--nu", "1", "--M", "2", "--grid-size", "9",
                   "--out", tmp_path / "o"])
    assert code == 0


# --- finite maps --------------------------------------------------------------------


def test_analyze_poset(tmp_path):
    code, _ = run(["analyze-poset", "--map", "grid_step_strict", "--out", tmp_path])
    assert code == 0
    poset = json.loads((tmp_path / "poset.json").read_text())
    assert poset["maximal"] == [[2.0, 2.0]]
    assert len(poset["fixed_points"]) == 5


def test_check_h1h2_table(tmp_path):
    assert run(["check-h1h2", "--table", "1,0,2", "--out", tmp_path / "a"])[0] == 3
    assert run(["check-h1h2", "--table", "0,2,2", "--out", tmp_path / "b"])[0] == 0
    report = json.loads((tmp_path / "a" / "h1h2.json").read_text())
    assert report["two_cycles"] == [["0", "1"]] and report["equivalent"]
    assert run(["check-h1h2", "--out", tmp_path / "c"])[0] == 2


def test_check_h1h2_map_file(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"domain": ["a", "b", "c"], "mapping": ["b", "a", "c"]}))
    assert run(["check-h1h2", "--map-file", f, "--out", tmp_path / "o"])[0] == 3
    f.write_text(json.dumps({"domain": ["a"], "mapping": ["z"]}))
    assert run(["check-h1h2", "--map-file", f, "--out", tmp_path / "o"])[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "conefix", "solve-decreasing", "--map", "zero_map",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("converged")
