import json
import subprocess
import sys

import pytest

from matchnet.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------------ rates

def test_rates_homogeneous_defaults(capsys):
    code, out, _ = run_cli(capsys, "rates", "--a", ".5", "--d", ".015",
                           "--c", ".005", "--s", "1.5", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["rates"]["psi"] == pytest.approx(0.5183324077529831)
    assert payload["rates"]["upsilon"] == pytest.approx(0.022248762806663637)
    assert "m_summed" in payload["rates"] and "m_weighted" in payload["rates"]


def test_rates_heterogeneous_channels(capsys):
    code, out, _ = run_cli(capsys, "rates", "--a", ".5", "--d", ".015",
                           "--c", ".003", "--h", ".8", "--Y", "2",
                           "--s", "1.5", "--format", "json")
    assert code == 0
    rates = json.loads(out)["rates"]
    assert rates["psi_hh"] == pytest.approx(0.4425602406079487)
    assert rates["psi_hl"] == 0.0
    assert rates["ups_hl"] == rates["ups_lh"]
    assert len([k for k in rates if k.startswith(("psi_", "ups_"))]) >= 8


def test_rates_h_equal_one_matches_homogeneous(capsys):
    _, out_h1, _ = run_cli(capsys, "rates", "--a", ".5", "--d", ".015",
                           "--c", ".005", "--h", "1", "--s", "1.5",
                           "--model", "heterogeneous", "--format", "json")
    _, out_hom, _ = run_cli(capsys, "rates", "--a", ".5", "--d", ".015",
                            "--c", ".005", "--s", "1.5", "--format", "json")
    het = json.loads(out_h1)["rates"]
    hom = json.loads(out_hom)["rates"]
    assert het["psi_hh"] == hom["psi"]
    assert het["ups_hh"] == hom["upsilon"]


def test_rates_validation_error_names_field(capsys):
    code, _, err = run_cli(capsys, "rates", "--a", "1.5", "--d", ".015",
                           "--c", ".005", "--s", "1.5")
    assert code == 1
    assert "a must be in (0,1)" in err


# ------------------------------------------------------------------ solve

def test_solve_homogeneous_figure_point(capsys):
    code, out, _ = run_cli(capsys, "solve", "--a", ".5", "--d", ".015",
                           "--c", ".005", "--V", "2", "--format", "json")
    assert code == 0
    sol = json.loads(out)["solution"]
    assert sol["exists"] and abs(sol["s_star"] - 0.785) < 5e-3
    assert sol["residual"] <= 1e-10


def test_solve_exit_code_2_above_threshold(capsys):
    code, out, _ = run_cli(capsys, "solve", "--a", ".5", "--d", ".015",
                           "--c", ".004", "--V", "1", "--format", "json")
    assert code == 2
    sol = json.loads(out)["solution"]
    assert not sol["exists"]
    assert sol["threshold"] == pytest.approx(0.00369375)


def test_solve_heterogeneous(capsys):
    code, out, _ = run_cli(capsys, "solve", "--model", "heterogeneous",
                           "--a", ".5", "--d", ".015", "--c", ".003",
                           "--h", ".8", "--Y", "2", "--restarts", "4",
                           "--format", "json")
    assert code == 0
    sol = json.loads(out)["solution"]
    assert sol["s_l_star"] > sol["s_h_star"]
    assert sol["residual_high"] <= 1e-9 and sol["residual_low"] <= 1e-9


def test_solve_missing_params_fail(capsys):
    code, _, err = run_cli(capsys, "solve", "--a", ".5")
    assert code == 1 and "missing required parameter" in err


# ------------------------------------------------------------------ sweep

def test_sweep_reproduces_figure_csv(capsys, tmp_path):
    out_path = tmp_path / "fig.csv"
    code, _, _ = run_cli(capsys, "sweep", "--axis", "a", "--from", ".3",
                         "--to", ".7", "--step", ".01", "--c", ".005",
                         "--d", ".015", "--V", "2", "--a", ".5",
                         "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().split("\n")
    assert lines[0] == "a,s_star,psi,upsilon,m_weighted,exists"
    assert len(lines) == 42
    first = lines[1].split(",")
    assert float(first[0]) == .3 and first[-1] == "true"


def test_sweep_deterministic_across_threads(capsys, tmp_path):
    outs = []
    for threads in ("1", "4"):
        path = tmp_path / f"t{threads}.csv"
        run_cli(capsys, "sweep", "--axis", "a", "--from", ".3", "--to", ".5",
                "--step", ".02", "--c", ".005", "--d", ".015", "--V", "2",
                "--a", ".5", "--threads", threads, "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_sweep_exogenous_profile(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--axis", "a", "--from", ".3",
                           "--to", ".4", "--step", ".05", "--c", ".003",
                           "--d", ".015", "--h", ".8", "--Y", "2",
                           "--a", ".5", "--model", "heterogeneous",
                           "--s", "1.5")
    assert code == 0
    header = out.strip().split("\n")[0]
    assert header.startswith("a,psi_hh,psi_lh,psi_ll")


# --------------------------------------------------------------- simulate

def test_simulate_json_summary(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--a", ".5", "--d", ".015",
                           "--c", ".005", "--s", "1.5", "--n", "500",
                           "--reps", "3", "--seed", "7")
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["seed"] == 7
    assert "psi" in payload["channels"]
    assert {c["channel"] for c in payload["closed_form_checks"]} == \
        {"psi", "ups"}


def test_simulate_csv_rows(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--a", ".5", "--d", ".015",
                           "--c", ".005", "--s", "1.5", "--n", "500",
                           "--reps", "4", "--seed", "7", "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 5
    assert lines[0].split(",")[0] == "rep"


def test_simulate_deterministic_bytes(capsys):
    args = ("simulate", "--a", ".5", "--d", ".015", "--c", ".003",
            "--h", ".8", "--Y", "2", "--s", "1.5", "--n", "400",
            "--reps", "3", "--seed", "11")
    _, out1, _ = run_cli(capsys, *args, "--threads", "1")
    _, out2, _ = run_cli(capsys, *args, "--threads", "3")
    assert out1 == out2


# ------------------------------------------------------------ config file

def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text(
        "# benchmark point\n"
        "a = .5\n"
        "d = .015\n"
        "c = .005\n"
        "V = 2\n"
        "format = json\n")
    code, out, _ = run_cli(capsys, "solve", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["solution"]["exists"]
    # flags win over the config file
    code, out, _ = run_cli(capsys, "solve", "--config", str(cfg),
                           "--c", ".009")
    assert code == 2


def test_config_file_unknown_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("nonsense = 1\n")
    code, _, err = run_cli(capsys, "solve", "--config", str(cfg))
    assert code == 1 and "unknown key" in err


# ----------------------------------------------------------------- verify

def test_verify_quick_runs_clean(capsys):
    code, out, _ = run_cli(capsys, "verify")
    assert code == 0, out
    assert "overall: pass" in out
    assert out.count("pass") >= 12


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "matchnet.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "matchnet" in out.stdout
