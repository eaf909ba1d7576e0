import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from relaysec import cli
from relaysec.config import ConfigError, grid_values, parse_config
from relaysec.presets import FIGURES, get_preset, preset_block, preset_checksum

SMALL = """\
# tiny sweep
sweep = eta_db
sweep_values = 0, 10, 20
lambda = 0.1
trials = 4000
"""


def _run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "relaysec", *args], capture_output=True,
                          text=True, cwd=cwd)


def _cfg_file(tmp_path, text=SMALL, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# --- configuration ---------------------------------------------------------------------

def test_empty_config_requires_sweep():
    with pytest.raises(ConfigError) as exc:
        parse_config("")
    assert exc.value.key == "sweep"
    cfg = parse_config("", require_sweep=False)
    assert cfg.trials == 10**6 and cfg.seed == 42 and cfg.engine == "both"
    assert cfg.scenario["sigma2_sr"] == cfg.scenario["sigma2_rd"] == cfg.scenario["sigma2_re"] == 1.0


def test_lambda_key():
    cfg = parse_config("sweep = eta_db\nsweep_values = 10\nlambda = 0.75\n")
    assert cfg.scenario_at(10.0).lam == 0.75


def test_second_hop_delay_key():
    cfg = parse_config("sweep = eta_db\nsweep_values = 10\nfd_td_rd = 0.1\n")
    sc = cfg.scenario_at(10.0)
    assert sc.corr.rho_rd == pytest.approx(0.9037126420924663, abs=1e-12)


@pytest.mark.parametrize("text,key,line", [
    ("sweep = eta_db\nsweep_values = 1\nbogus = 3\n", "bogus", 3),
    ("sweep = eta_db\nsweep_values = 1\nn_t = three\n", "n_t", 3),
    ("lambda = 0.5\nlambda = 0.6\nsweep = eta_db\nsweep_values = 1\n", "lambda", 2),
    ("sweep = eta_db\nsweep_start = 0\nsweep_stop = 10\nsweep_step = 0\n", "sweep_step", 4),
    ("sweep = eta_db\nsweep_start = 10\nsweep_stop = 0\nsweep_step = 1\n", "sweep_stop", 3),
    ("sweep = eta_db\nsweep_values = 1\nlambda = 1.5\n", "lambda", 3),
    ("sweep = r0\nsweep_values = 1\nrs = 2\n", "r0", 0),
    ("sweep = eta_db\nsweep_values = 1\nrho_sr = 0.9\nfd_td = 0.1\n", "rho_sr", 3),
    ("sweep = colour\nsweep_values = 1\n", "sweep", 1),
    ("sweep = eta_db\nsweep_values = 1\nupsilon = 2\n", "upsilon", 3),
])
def test_config_diagnostics_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key
    assert exc.value.line == line
    assert key in str(exc.value)


def test_sweep_forms_agree():
    a = parse_config("sweep = eta_db\nsweep_start = 0\nsweep_stop = 30\nsweep_step = 5\n")
    b = parse_config("sweep = eta_db\nsweep_values = 0:30:5\n")
    c = parse_config("sweep = eta_db\nsweep_values = 0, 5, 10, 15, 20, 25, 30\n")
    assert a.sweep == b.sweep == c.sweep
    assert grid_values(0.05, 0.95, 0.05)[-1] == 0.95


# --- CSV -----------------------------------------------------------------------------

def test_csv_round_trip_is_exact():
    rng = np.random.default_rng(1)
    vals = list(rng.random(50) * 10.0 ** rng.integers(-8, 3, 50))
    buf = io.StringIO()
    cli.write_csv(buf, ["x"], [[v] for v in vals])
    text = buf.getvalue()
    assert "\r" not in text
    back = [float(r[0]) for r in list(csv.reader(io.StringIO(text)))[1:]]
    assert back == [float(f"{v:.9g}") for v in vals]
    again = io.StringIO()
    cli.write_csv(again, ["x"], [[v] for v in back])
    assert again.getvalue() == text


def test_column_names():
    cfg = parse_config(SMALL + "strategies = tbrs, os\nmetrics = cop, rsr\n")
    assert cli.column_names(cfg) == [
        "tbrs_analytic_cop", "tbrs_analytic_rsr", "tbrs_mc_cop", "tbrs_mc_cop_stderr",
        "os_mc_cop", "os_mc_cop_stderr",
    ]


def test_sweep_rows_values():
    from relaysec import analytic as an
    cfg = parse_config(SMALL + "engine = analytic\nmetrics = cop\n")
    header, rows = cli.sweep_rows(cfg)
    assert header == ["eta_db", "tbrs_analytic_cop", "jrjs_analytic_cop"]
    assert rows[1][1] == an.cop_tbrs(cfg.scenario_at(10.0))


# --- presets -----------------------------------------------------------------------------

PINNED = {
    "fig2": "113062df3dd5b089d238d214edb91e8f9f331e1de373e95ececdea520f8c71fc",
    "fig3": "5881014915fa34e7fa90cb2283253838759af34cf981879c34c55a979e977608",
    "fig4": "701ef9a0c5f5e9a5bb68226f2c570933d1258d626e6307c14e70944594281012",
    "fig5": "f8eed4b432dab56504eacee70f5cb6c24de52452cd1546d2e3b14a5a79b6c684",
    "fig6": "d4dfbcd55e0b3c4290dfc7dc9921a4bfe19ce9b5587c4f3e0f4cdb2782271022",
    "fig7": "2632767b0554b2896078ed022813ded3ab61773e4d938c1b3e49c7b18308efa7",
    "fig8": "8cb05e5d06f853ec4be40c04318e50e94e4581de434cfadc7917b6e10de6f8d7",
    "fig9": "b1ce8feb8a277be28c253828d33a4c97d50f250d3af87feffa4b7a52a5fe82e1",
    "fig10": "96b7564fc94f3368fc7ed42e232afc4126671c6200340bbda91ce27e5c3144e8",
}


@pytest.mark.parametrize("fig_id", sorted(PINNED))
def test_preset_checksums_frozen(fig_id):
    assert preset_checksum(FIGURES[fig_id]) == PINNED[fig_id]


def test_preset_caption_values():
    for s in get_preset("fig2").series:
        assert (s.values["n_t"], s.values["k_r"], s.values["fd_td"], s.values["lambda"]) == \
            (3, 3, 0.1, 0.1)
    assert {tuple(sorted((k, v) for k, v in s.values.items() if k in ("r0", "rs")))
            for s in get_preset("fig2").series} == {(("r0", 1.0), ("rs", 0.125)),
                                                    (("r0", 1.5), ("rs", 0.1875))}
    assert [s.values["lambda"] for s in get_preset("fig5").series] == [0.25, 0.5, 0.75, 0.9]
    f8 = get_preset("fig8").series[0]
    assert f8.values["eta_db"] == 15.0 and f8.outer_axis == "kappa"
    assert get_preset("fig6").engine == "analytic" and get_preset("fig10").engine == "mc"
    assert preset_block(get_preset("fig10"))["series"][1]["with_se_link"] is True
    with pytest.raises(KeyError):
        get_preset("fig11")


# --- validation ----------------------------------------------------------------------

def test_validate_tbrs_passes_and_negative_control_fails():
    cfg = parse_config("sweep = eta_db\nsweep_values = 0, 10, 20, 30\nlambda = 0.1\n"
                       "trials = 50000\nstrategies = tbrs\n")
    rows = cli.validate(cfg)
    assert all(r.passed for r in rows if r.kind == "exact")
    bad = cli.validate(cfg, corrupt_gbar=4.0)
    assert all(not r.passed for r in bad if r.kind == "exact")
    for v in cfg.sweep.values:
        assert any(not r.passed for r in bad if r.point == v)


def test_validate_jrjs_lemma_at_20db():
    cfg = parse_config("sweep = eta_db\nsweep_values = 20\nlambda = 0.1\ntrials = 200000\n"
                       "strategies = jrjs\n")
    assert all(r.passed for r in cli.validate(cfg))


# --- subprocess exit codes -----------------------------------------------------------------

def test_cli_analytic_success(tmp_path):
    out = tmp_path / "a.csv"
    r = _run("analytic", "--config", str(_cfg_file(tmp_path)), "--out", str(out))
    assert r.returncode == 0, r.stderr
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "eta_db" and len(rows) == 4
    assert all(c.count("_analytic_") for c in rows[0][1:])


def test_cli_simulate_rerun_is_byte_identical(tmp_path):
    cfg = _cfg_file(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run("simulate", "--config", str(cfg), "--out", str(a), "--seed", "9").returncode == 0
    assert _run("simulate", "--config", str(cfg), "--out", str(b), "--seed", "9",
                "--threads", "0").returncode == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert "tbrs_mc_cop_stderr" in header and "jrjs_analytic_rscp" in header


@pytest.mark.parametrize("args", [
    ("analytic",),                                   # no sweep axis
    ("analytic", "--config", "/nonexistent/run.cfg"),
    ("frobnicate",),
    ("figure", "fig42"),
    ("simulate", "--trials", "0"),
])
def test_cli_error_exit_codes(args):
    r = _run(*args)
    assert r.returncode == 1
    assert "error" in r.stderr


def test_cli_unknown_key_reports_line(tmp_path):
    r = _run("analytic", "--config", str(_cfg_file(tmp_path, SMALL + "colour = blue\n")))
    assert r.returncode == 1
    assert "line 6" in r.stderr and "colour" in r.stderr


def test_cli_unwritable_output(tmp_path):
    r = _run("analytic", "--config", str(_cfg_file(tmp_path)), "--out",
             str(tmp_path / "missing" / "dir" / "x.csv"))
    assert r.returncode == 1


def test_cli_validate_exit_codes(tmp_path):
    ok = _cfg_file(tmp_path, SMALL + "strategies = tbrs\n", "ok.cfg")
    assert _run("validate", "--config", str(ok), "--trials", "20000").returncode == 0
    # The JRJS connection-outage lemma misses the 0.03 tolerance at 10 dB.
    bad = _cfg_file(tmp_path, SMALL + "strategies = jrjs\n", "bad.cfg")
    r = _run("validate", "--config", str(bad), "--trials", "50000")
    assert r.returncode == 1 and "FAIL" in r.stdout


def test_cli_optimize_exit_codes(tmp_path):
    base = "eta_db = 15\ngrid_r0 = 0.5, 1, 1.5, 2\ngrid_kappa = 0.125, 0.25\n"
    ok = _cfg_file(tmp_path, base, "ok.cfg")
    r = _run("optimize", "--config", str(ok))
    assert r.returncode == 0, r.stderr
    assert r.stdout.splitlines()[0].startswith("strategy,feasible")
    tight = _cfg_file(tmp_path, base + "upsilon = 0\n", "tight.cfg")
    assert _run("optimize", "--config", str(tight)).returncode == 2


def test_cli_figure_small_run(tmp_path):
    r = _run("figure", "fig2", "--trials", "2000", "--out", str(tmp_path / "fig2.csv"))
    assert r.returncode == 0, r.stderr
    files = sorted(p.name for p in tmp_path.glob("fig2_*.csv"))
    assert files == ["fig2_r0-1.5_rs-0.1875.csv", "fig2_r0-1_rs-0.125.csv"]
    rows = list(csv.reader((tmp_path / files[1]).open()))
    assert len(rows) == 32
    metric_cols = [c for c in rows[0] if not c.endswith("_stderr")][1:]
    assert len(metric_cols) == 8      # 2 strategies x 2 metrics x 2 engines


def test_cli_figure_surface_long_format(tmp_path):
    r = _run("figure", "fig9", "--out", str(tmp_path / "f9.csv"), "--trials", "200")
    assert r.returncode == 0, r.stderr
    rows = list(csv.reader((tmp_path / "f9.csv").open()))
    assert rows[0][:2] == ["lambda", "r0"]
    assert len(rows) == 1 + 19 * 16
