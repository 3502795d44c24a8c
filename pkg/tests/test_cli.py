"""CLI contract: config parsing, exit codes, outputs, determinism."""

import filecmp
import json

import pytest

from orliczfem.cli import main, parse_config
from orliczfem.suites import SUITES, ContractCheck, SuiteResult

MINIMAL = "[experiment]\nkind = indices_suite\nseed = 1\n\n[spec]\nvariant = power\np = 2.0\n"


def _write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_config_runs_clean(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    csv_lines = (out / "indices_suite.csv").read_text().splitlines()
    assert len(csv_lines) == 2  # header + one row
    summary = json.loads((out / "summary.json").read_text())
    assert summary["suite"] == "indices_suite"
    assert summary["passed"] is True


def test_malformed_key_exit_2_names_key(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL + "frobnitz = 3\n")
    assert main(["run", cfg]) == 2
    assert "frobnitz" in capsys.readouterr().err


def test_unknown_section_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL + "\n[warp]\nfactor = 9\n")
    assert main(["run", cfg]) == 2
    assert "warp" in capsys.readouterr().err


def test_parse_error_reports_line(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment\nkind = indices_suite\n")
    assert main(["run", cfg]) == 2
    assert "line" in capsys.readouterr().err


def test_missing_seed_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment]\nkind = indices_suite\n")
    assert main(["run", cfg]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_kind_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment]\nkind = mystery\nseed = 1\n")
    assert main(["run", cfg]) == 2


def test_contract_violation_exit_1(tmp_path, capsys, monkeypatch):
    import orliczfem.cli as cli

    failing = SuiteResult(
        "indices_suite",
        ["col"],
        [[1.0]],
        [ContractCheck("doomed", False, "synthetic failure")],
    )
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: failing)
    cfg = _write(tmp_path, MINIMAL)
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "doomed" in err


def test_list_suites_lists_all(capsys):
    assert main(["list-suites"]) == 0
    out = capsys.readouterr().out
    for name in SUITES:
        assert name in out
    assert len(out.strip().splitlines()) == 6


def test_list_suites_unknown_name(capsys):
    assert main(["list-suites", "nonsense"]) == 2


@pytest.mark.parametrize("name", sorted(SUITES))
def test_templates_roundtrip_through_parser(tmp_path, name):
    cfg = _write(tmp_path, SUITES[name].template, f"{name}.ini")
    kind, seed, jobs, out, options = parse_config(cfg)
    assert kind == name
    assert seed == 1


def test_seed_override_lands_in_summary(tmp_path):
    cfg = _write(tmp_path, MINIMAL)
    out = tmp_path / "s"
    assert main(["run", cfg, "--out", str(out), "--seed", "42"]) == 0
    assert json.loads((out / "summary.json").read_text())["seed"] == 42


def test_determinism_byte_identical(tmp_path):
    cfg = _write(
        tmp_path,
        "[experiment]\nkind = hammer_suite\nseed = 5\n\n[hammer]\npairs = 2000\nfd_samples = 200\n",
    )
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out", str(a)]) == 0
    assert main(["run", cfg, "--out", str(b)]) == 0
    assert filecmp.cmp(a / "hammer_suite.csv", b / "hammer_suite.csv", shallow=False)
    assert filecmp.cmp(a / "summary.json", b / "summary.json", shallow=False)


def test_jobs_do_not_change_output(tmp_path):
    cfg = _write(
        tmp_path,
        "[experiment]\nkind = korn_suite\nseed = 5\n\n[korn]\nensemble = 10\n\n"
        "[mesh]\nh = 0.5 0.25\n\n[sweep]\np_values = 1.5 2.0\n",
    )
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out", str(a), "--jobs", "1"]) == 0
    assert main(["run", cfg, "--out", str(b), "--jobs", "4"]) == 0
    assert filecmp.cmp(a / "korn_suite.csv", b / "korn_suite.csv", shallow=False)


def test_parse_config_types(tmp_path):
    cfg = _write(
        tmp_path,
        "[experiment]\nkind = regularity_sweep\nseed = 7\njobs = 2\n\n"
        "[mesh]\nh = 0.5 0.25\nlattice_n = 32\n\n[schedule]\ndelta_lo = 0.1 0.01\ndelta_hi = 10 100\n",
    )
    kind, seed, jobs, out, options = parse_config(cfg)
    assert jobs == 2
    assert options["mesh"]["h"] == [0.5, 0.25]
    assert options["mesh"]["lattice_n"] == 32
    assert options["schedule"]["delta_lo"] == [0.1, 0.01]


def test_bad_value_type_named(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment]\nkind = indices_suite\nseed = banana\n")
    assert main(["run", cfg]) == 2
    assert "seed" in capsys.readouterr().err
