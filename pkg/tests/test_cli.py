import json
import subprocess
import sys

import numpy as np
import pytest

from vbsc.cli import build_parser, cmd_plot_pdf, main
from vbsc.state_models import MaesHybrid, PiecewiseConstant, from_config

MAES_CFG = '{"kind": "maes_hybrid", "lambda1": 0.1213, "lambda2": 0.021}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


# -- capacity ------------------------------------------------------------------

def test_capacity_all_matches_table(capsys):
    code, out, _ = run(capsys, "capacity", "--dist", MAES_CFG, "--regime", "all")
    assert code == 0
    assert out.startswith("# ") and '"seed": 0' in out.splitlines()[0]
    rows = {r["regime"]: float(r["value"]) for r in csv_rows(out)}
    assert list(rows) == ["none", "enc-causal", "dec", "both"]
    for k, want in zip(rows, (0.6961, 0.7649, 0.8751, 0.8751)):
        assert rows[k] == pytest.approx(want, abs=0.002)


def test_capacity_useless_channel(capsys):
    code, out, _ = run(capsys, "capacity", "--dist", '{"kind": "degenerate", "p": 0.5}',
                       "--format", "json")
    assert code == 0
    res = json.loads(out)["results"]
    assert [r["value"] for r in res.values()] == [0.0, 0.0, 0.0, 0.0]


def test_capacity_encoder_gain_example(capsys):
    two = '{"kind": "discrete", "points": [[0.1, 0.5], [0.9, 0.5]]}'
    _, none, _ = run(capsys, "capacity", "--dist", two, "--regime", "none", "--format", "json")
    _, enc, _ = run(capsys, "capacity", "--dist", two, "--regime", "enc-causal", "--format", "json")
    assert json.loads(none)["results"]["none"]["value"] == 0.0
    assert json.loads(enc)["results"]["enc-causal"]["value"] == pytest.approx(0.531004, abs=1e-6)


def test_capacity_noncausal_reports_bracket(capsys):
    code, out, _ = run(capsys, "capacity", "--regime", "enc-noncausal")
    (row,) = csv_rows(out)
    assert code == 0 and float(row["lower"]) < float(row["upper"])


@pytest.mark.parametrize("cfg, fragment", [
    ('{"kind": "maes_hybrid", "lambda1": 0.1}', "missing field"),
    ('{"kind": "degenerate", "p": 0.1, "q": 2}', "unknown field"),
    ('{"kind": "degenerate",\n"p": 0.1,,}', "line 2"),
    ("/nonexistent/dist.json", "cannot read"),
])
def test_config_errors_exit_2(capsys, cfg, fragment):
    code, _, err = run(capsys, "capacity", "--dist", cfg)
    assert code == 2
    assert fragment in err


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["capacity", "--regime", "sideways"])
    assert info.value.code == 2


# -- table 1 ------------------------------------------------------------------

def test_table1_default_passes(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    lines = out.splitlines()
    assert sum(ln.endswith("PASS") for ln in lines[1:-1]) == 6
    assert lines[-1] == "PASS"


def test_table1_negative_control(capsys):
    code, out, _ = run(capsys, "table1", "--lambda1", "0.3")
    assert code == 1
    assert "FAIL" in out


def test_table1_verdicts_robust_to_eps(capsys):
    verdicts = []
    for eps in ("1e-3", "1e-4"):
        _, out, _ = run(capsys, "table1", "--eps", eps, "--format", "json")
        verdicts.append([c["verdict"] for c in json.loads(out)["cells"]])
    assert verdicts[0] == verdicts[1] == ["PASS"] * 6


# -- simulate --------------------------------------------------------------------

def test_simulate_summary_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    code, out, _ = run(capsys, "simulate", "--mode", "both", "--n", "200000", "--seed", "3",
                       "--trace", "20", "--trace-out", str(trace), "--format", "json")
    assert code == 0
    s = json.loads(out)
    assert s["seed"] == 3 and s["verdict"] == "PASS"
    text = trace.read_text()
    assert json.loads(text.splitlines()[0][2:])["seed"] == 3
    assert len(text.splitlines()) == 22


def test_simulate_is_deterministic(capsys):
    outs = [run(capsys, "simulate", "--n", "20000", "--seed", "5")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_simulate_rejects_noncausal(capsys):
    code, _, err = run(capsys, "simulate", "--mode", "enc-noncausal", "--n", "20000")
    assert code == 2 and "non-causal" in err


# -- fec sweep ---------------------------------------------------------------------

def test_fec_sweep_csv(capsys, tmp_path):
    out_file = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "fec-sweep", "--margins", "0.1,0.3", "--n-bins", "4", "--blocks", "2",
                     "--budget", "2048", "--seed", "1", "--out", str(out_file))
    assert code == 0
    text = out_file.read_text()
    rows = csv_rows(text)
    assert list(rows[0]) == ["margin", "n_bins", "realized_rate", "bler", "n_blocks", "seed"]
    assert len(rows) == 2
    assert float(rows[0]["realized_rate"]) > float(rows[1]["realized_rate"])
    assert "\r" not in text


# -- puf demo -----------------------------------------------------------------------

def test_puf_demo_paired_summary(capsys):
    code, out, _ = run(capsys, "puf-demo", "--trials", "40", "--seed", "2")
    assert code == 0
    s = json.loads(out)
    assert s["seed"] == 2 and s["trials"] == 40
    assert s["success_tagged"] >= s["success_untagged"]
    assert s["only_untagged_ok"] <= s["only_tagged_ok"]


# -- plot pdf ------------------------------------------------------------------------

def test_plot_pdf_uniform_is_constant(capsys):
    code, out, _ = run(capsys, "plot-pdf", "--dist",
                       '{"kind": "piecewise", "breakpoints": [0, 1], "densities": [1]}', "--points", "64")
    assert code == 0
    assert {r["f_P"] for r in csv_rows(out)} == {"1.0"}


def test_plot_pdf_maes_normalized_with_mass_above_half():
    p, f = cmd_plot_pdf(MaesHybrid(), 32768)
    assert np.all(f >= 0)
    assert np.trapezoid(f, p) == pytest.approx(1.0, abs=1e-3)
    assert np.all(f[p > 0.5] > 0)
    # geometric ends expose the spike at 0
    assert p[0] < 1e-100 and f[0] > 1e100


def test_plot_pdf_rejects_atoms(capsys):
    code, _, err = run(capsys, "plot-pdf", "--dist", '{"kind": "degenerate", "p": 0.1}')
    assert code == 2


def test_piecewise_grid_keeps_both_sides_of_a_break():
    d = PiecewiseConstant((0.0, 0.5, 1.0), (1.5, 0.5))
    p, f = cmd_plot_pdf(d, 32)
    assert 1.5 in f and 0.5 in f


# -- plumbing -----------------------------------------------------------------------

def test_config_round_trip_through_cli_output(capsys):
    _, out, _ = run(capsys, "capacity", "--dist", MAES_CFG, "--regime", "none", "--format", "json")
    cfg = json.loads(out)["dist"]
    assert from_config(cfg) == from_config(MAES_CFG)
    assert from_config(json.dumps(from_config(cfg).to_config())).to_config() == cfg


def test_seed_default_is_documented():
    assert "default 0" in build_parser()._subparsers._group_actions[0].choices["simulate"].format_help()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "vbsc", "capacity", "--dist",
                        '{"kind": "degenerate", "p": 0.0}', "--regime", "both"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert csv_rows(r.stdout)[0]["value"] == "1.000000"
