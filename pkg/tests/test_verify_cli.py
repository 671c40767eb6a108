import json
from pathlib import Path

import numpy as np
import pytest

from realdirac import cli, gauge, io, runs, verify

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- verify ---------------------------------------------------------------------

def test_count_zero_gives_empty_passing_reports():
    for rep in verify.run("all", seed=1, count=0):
        assert rep.passed and rep.cases == 0
        assert all(c.cases == 0 for c in rep.checks)


def test_fixed_checks_run_once():
    rep = verify.run_suite("core", seed=3, count=5)
    dims = next(c for c in rep.checks if c.name == "dimension_counts")
    assert dims.cases == 1
    assoc = next(c for c in rep.checks if c.name == "associativity")
    assert assoc.cases == 5


def test_suites_pass_with_small_count():
    for rep in verify.run("all", seed=7, count=5):
        assert rep.passed, rep.summary()


def test_same_seed_same_residuals():
    a = [r.to_dict() for r in verify.run("dirac", seed=11, count=10)]
    b = [r.to_dict() for r in verify.run("dirac", seed=11, count=10)]
    assert a == b
    c = [r.to_dict() for r in verify.run("dirac", seed=12, count=10)]
    assert a != c


def test_suite_streams_are_independent():
    # adding a suite to the run does not change another suite's draws
    alone = verify.run_suite("pauli", seed=5, count=8).to_dict()
    together = {r.suite: r.to_dict() for r in verify.run("all", seed=5, count=8)}
    assert together["pauli"] == alone


def test_bad_arguments():
    with pytest.raises(ValueError):
        verify.run_suite("nope", 0, 1)
    with pytest.raises(ValueError):
        verify.run_suite("core", 0, -1)
    with pytest.raises(ValueError):
        verify.run_suite("core", 0, 1, tolerance_scale=0.0)


def test_tolerance_scale_can_force_failure():
    rep = verify.run_suite("core", seed=0, count=3, tolerance_scale=1e-30)
    assert not rep.passed


def test_report_picks_worst_ratio():
    rep = verify.run_suite("pauli", seed=2, count=5)
    ratios = [c.max_residual / c.tolerance for c in rep.checks]
    worst = rep.checks[int(np.argmax(ratios))]
    assert (rep.max_residual, rep.tolerance) == (worst.max_residual, worst.tolerance)
    assert "wall_time" not in rep.to_dict()
    assert "wall_time" in rep.to_dict(include_time=True)


# -- CLI ------------------------------------------------------------------------

def test_cli_json_is_byte_identical(capsys):
    assert cli.main(["verify", "core", "--seed", "9", "--count", "4", "--json"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["--seed", "9", "--count", "4", "--json", "verify", "core"]) == 0
    assert capsys.readouterr().out == first
    payload = json.loads(first)
    assert payload["pass"] and payload["reports"][0]["suite"] == "core"


def test_cli_text_output(capsys):
    assert cli.main(["verify", "pauli", "--count", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("pauli: PASS")
    assert "sigma_table" in out


def test_cli_failure_exit_code(capsys):
    assert cli.main(["verify", "core", "--count", "2", "--tolerance-scale", "1e-30"]) == 1


def test_cli_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nope"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
    assert cli.main(["verify", "core", "--count", "-1"]) == 2


def test_tables_diff_and_json_round_trip(capsys):
    assert cli.main(["tables", "--diff-paper"]) == 0
    assert capsys.readouterr().out.strip().endswith("0 mismatches")
    assert cli.main(["tables", "--json"]) == 0
    parsed = cli.tables_from_json(capsys.readouterr().out)
    assert cli.diff_tables(parsed, cli.computed_tables()) == []
    assert cli.main(["tables"]) == 0
    out = capsys.readouterr().out
    assert "gamma_0:" in out and "gamma_5:" in out


def test_diff_tables_reports_mismatch():
    ref = cli.reference_tables()
    bad = {k: [m.copy() for m in ms] for k, ms in ref.items()}
    bad["gamma"][2][0, 3] += 1.0
    lines = cli.diff_tables(bad, ref)
    assert len(lines) == 1 and lines[0].startswith("gamma[2][0,3]")


def test_format_matrix():
    assert cli.format_matrix(np.array([[1, -1j], [1j, 0]])) == "  [  1 -1i]\n  [ 1i   0]"


# -- configs --------------------------------------------------------------------

def test_config_errors(tmp_path, capsys):
    assert cli.main(["evolve", str(tmp_path / "missing.ini")]) == 2
    bad_section = _write(tmp_path, "[grid]\nn_z = 16\ndz = 0.1\n[extra]\na = 1\n")
    assert cli.main(["evolve", str(bad_section)]) == 2
    bad_key = _write(tmp_path, "[grid]\nn_z = 16\ndz = 0.1\nspeed = 3\n", "k.ini")
    assert cli.main(["evolve", str(bad_key)]) == 2
    bad_number = _write(tmp_path, "[grid]\nn_z = sixteen\ndz = 0.1\n", "n.ini")
    assert cli.main(["evolve", str(bad_number)]) == 2
    cfl = _write(tmp_path, "[grid]\nn_z = 16\ndz = 0.1\ndt = 0.2\nn_steps = 2\n", "c.ini")
    assert cli.main(["evolve", str(cfl)]) == 2
    assert "config error" in capsys.readouterr().err


def test_config_lists():
    cfg = io.Config(Path("x"), {"a": "1, 2,3"}, {}, {})
    np.testing.assert_array_equal(cfg.get_list("grid", "a", 3), [1, 2, 3])
    with pytest.raises(io.ConfigError):
        cfg.get_list("grid", "a", 4)
    with pytest.raises(io.ConfigError):
        cfg.get_float("grid", "missing")
    assert cfg.get_int("grid", "missing", 5) == 5


def test_evolve_writes_csv(tmp_path, capsys):
    ini = _write(tmp_path, "[grid]\nn_z = 32\ndz = 0.2\ndt = 0.05\nn_steps = 8\nsnapshot_every = 4\n"
                           "[physics]\nresidual_tolerance = 1e-2\n[fields]\ninitial = plane_wave\nmode = 1\n")
    out = tmp_path / "out"
    assert cli.main(["evolve", str(ini), "--out", str(out)]) == 0
    traj = io.read_csv_rows(out / "trajectory.csv")
    assert list(traj[0]) == ["t", "x", "y", "z", "component_id", "value"]
    assert len(traj) == 3 * 32 * 8
    mon = io.read_csv_rows(out / "monitors.csv")
    assert list(mon[0]) == ["t", "residual_max", "charge"]
    assert len(mon) == 9


def test_evolve_shipped_configs(tmp_path):
    for name in ("em_wave.ini", "massless_packet.ini"):
        result = runs.run_evolve(CONFIGS / name, tmp_path / name)
        assert result.report.passed, result.report.summary()


def test_strength_config(tmp_path, capsys):
    out = tmp_path / "F.csv"
    assert cli.main(["strength", str(CONFIGS / "em_strength.ini"), "--out", str(out)]) == 0
    rows = io.read_csv_rows(out)
    assert list(rows[0]) == ["t", "x", "y", "z", "mu", "nu", "component_id", "value"]
    assert all(int(r["mu"]) < int(r["nu"]) for r in rows)


def test_extract_config(tmp_path, capsys):
    out = tmp_path / "A.csv"
    assert cli.main(["extract", str(CONFIGS / "pure_gauge.ini"), "--out", str(out), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pass"]
    rows = io.read_csv_rows(out)
    assert list(rows[0]) == ["t", "x", "y", "z", "A0", "A1", "A2", "A3"]


def test_extract_inconsistent_field(tmp_path, capsys, monkeypatch):
    def boom(*_args):
        raise gauge.InconsistentField("non-vector part")

    monkeypatch.setattr(runs, "run_extract", boom)
    assert cli.main(["extract", str(CONFIGS / "pure_gauge.ini"), "--out", str(tmp_path / "A.csv")]) == 1
    assert "inconsistent" in capsys.readouterr().err
