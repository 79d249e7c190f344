"""End-to-end checks driven through semiq.cli.main (same code path as the
console script, minus the process boundary, so failures keep tracebacks)."""

import os

import pytest

from semiq.cli import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from semiq.tableio import read_csv, read_manifest


def run_cli(args, tmp_path, capsys=None):
    code = main([*args, "--output-dir", str(tmp_path)])
    return code


def test_clock_outputs(tmp_path):
    assert run_cli(["clock", "--energies", "0,1", "--sigma", "0.1",
                    "--mu0", "1.0", "--steps", "250"], tmp_path) == EXIT_OK
    summary = read_csv(tmp_path / "clock_summary.csv")
    row = summary.rows[0]
    cols = dict(zip(summary.columns, row))
    assert cols["pair"] == "0-1"
    assert cols["retention_steps"] == "200"
    assert cols["reached"] == "1"
    traj = read_csv(tmp_path / "clock_trajectory.csv")
    assert traj.columns == ["step", "time", "pair", "coherence", "events_so_far"]
    assert len(traj.rows) == 251
    assert (tmp_path / "clock.manifest.txt").exists()


def test_clock_not_reached_sentinels(tmp_path):
    assert run_cli(["clock", "--energies", "0,1", "--sigma", "0.1",
                    "--mu0", "1.0", "--steps", "50"], tmp_path) == EXIT_OK
    cols = read_csv(tmp_path / "clock_summary.csv")
    row = dict(zip(cols.columns, cols.rows[0]))
    assert row["retention_steps"] == "-1"
    assert row["retention_time"] == "nan"
    assert row["reached"] == "0"


def test_tunnel_reference_values(tmp_path):
    assert run_cli(["tunnel", "--hbar", "1", "--mu", "1", "--j0", "1",
                    "--h0", "1", "--oracle"], tmp_path) == EXIT_OK
    t = read_csv(tmp_path / "tunnel.csv")
    row = dict(zip(t.columns, t.rows[0]))
    assert float(row["T_closed"]) == pytest.approx(1.1762e-2, rel=1e-4)
    assert float(row["T_numeric"]) == pytest.approx(1.1624e-2, rel=0.10)
    assert float(row["T_current_ratio"]) == pytest.approx(float(row["T_closed"]),
                                                          rel=1e-3)
    assert float(row["richardson_error"]) < 1e-6


def test_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    args = ["clock", "--energies", "0,0.5,1.3", "--sigma", "0.2",
            "--samples", "200", "--seed", "7", "--steps", "80"]
    assert run_cli(args, a) == EXIT_OK
    assert run_cli(args, b) == EXIT_OK
    for name in os.listdir(a):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_manifest_reproduces_run(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert run_cli(["network", "--mode", "ek", "--n", "3", "--N", "4",
                    "--beta", "1.0", "--draws", "4", "--samples", "100",
                    "--seed", "3"], a) == EXIT_OK
    from semiq.cli import RunConfig, run

    cfg = RunConfig.from_manifest(a / "network.manifest.txt")
    cfg.output_dir = str(b)
    run(cfg)
    for name in os.listdir(a):
        if name.endswith(".csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_validation_failure_leaves_no_files(tmp_path, capsys):
    code = run_cli(["tunnel", "--hbar", "-1"], tmp_path)
    assert code == EXIT_VALIDATION
    assert os.listdir(tmp_path) == []
    assert "hbar" in capsys.readouterr().err


def test_malformed_number_exits_2(tmp_path):
    assert run_cli(["clock", "--energies", "0,banana"], tmp_path) == EXIT_VALIDATION
    assert os.listdir(tmp_path) == []


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("hbar = 1\nwibble = 2\n")
    assert main(["tunnel", "--config", str(cfg),
                 "--output-dir", str(tmp_path / "out")]) == EXIT_VALIDATION


def test_config_file_flag_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("h0 = 2.0\nmu = 1.0\n")
    out = tmp_path / "out"
    assert main(["tunnel", "--config", str(cfg), "--h0", "1.0",
                 "--output-dir", str(out)]) == EXIT_OK
    man = read_manifest(out / "tunnel.manifest.txt")
    assert man["h0"] == "1"          # flag wins over config file
    assert man["mu"] == "1"


def test_output_dir_env(tmp_path, monkeypatch):
    target = tmp_path / "envdir"
    target.mkdir()
    monkeypatch.setenv("SEMIQ_OUTPUT_DIR", str(target))
    assert main(["tunnel"]) == EXIT_OK
    assert (target / "tunnel.csv").exists()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numerical_failure_exit_3(tmp_path):
    # cosmo horizon too long for the integrator at this potential
    assert run_cli(["cosmo", "--t-max", "200"], tmp_path) == EXIT_NUMERICAL


def test_io_failure_exit_4(tmp_path):
    blocker = tmp_path / "tunnel.csv"
    blocker.write_text("x")
    code = run_cli(["tunnel"], tmp_path / "tunnel.csv" / "sub")
    assert code == EXIT_IO


def test_sweep_single_axis_monotone(tmp_path):
    assert run_cli(["sweep", "--axis", "h0=0.8:2.0:7", "--oracle"],
                   tmp_path) == EXIT_OK
    t = read_csv(tmp_path / "sweep.csv")
    h0s = [float(v) for v in t.column("h0")]
    ts = [float(v) for v in t.column("T_closed")]
    assert h0s == sorted(h0s)
    assert ts == sorted(ts, reverse=True)    # taller barrier, less tunnelling
    tn = [float(v) for v in t.column("T_numeric")]
    for a, b in zip(ts, tn):
        assert abs(a - b) / a < 0.10


def test_sweep_two_axes_lexicographic(tmp_path):
    assert run_cli(["sweep", "--axis", "h0=1:2:3", "--axis", "mu=1:4:2"],
                   tmp_path) == EXIT_OK
    t = read_csv(tmp_path / "sweep.csv")
    pairs = [(float(r[t.columns.index("h0")]), float(r[t.columns.index("mu")]))
             for r in t.rows]
    assert len(pairs) == 6
    assert pairs == sorted(pairs)


def test_sweep_axis_validation(tmp_path):
    assert run_cli(["sweep", "--axis", "h0=1:2:500"], tmp_path) == EXIT_VALIDATION
    assert run_cli(["sweep", "--axis", "banana=1:2:3"], tmp_path) == EXIT_VALIDATION
    assert run_cli(["sweep", "--axis", "h0=1:2:3", "--axis", "mu=1:2:3",
                    "--axis", "j0=1:2:3"], tmp_path) == EXIT_VALIDATION
    assert os.listdir(tmp_path) == []


def test_plot_flag_writes_svg(tmp_path):
    assert run_cli(["sweep", "--axis", "h0=0.8:2.0:5", "--plot"],
                   tmp_path) == EXIT_OK
    svgs = [n for n in os.listdir(tmp_path) if n.endswith(".svg")]
    assert svgs
    body = (tmp_path / svgs[0]).read_text(encoding="utf-8")
    assert body.startswith("<svg")


def test_plot_single_row_rejected(tmp_path):
    assert run_cli(["tunnel", "--plot"], tmp_path) == EXIT_VALIDATION
    assert os.listdir(tmp_path) == []


def test_cosmo_outputs_and_slope(tmp_path):
    assert run_cli(["cosmo", "--hbar-list", "0.1,0.05,0.025",
                    "--t-max", "0.3"], tmp_path) == EXIT_OK
    res = read_csv(tmp_path / "cosmo_residual.csv")
    slopes = {float(v) for v in res.column("slope")}
    assert len(slopes) == 1
    assert abs(slopes.pop() - 2.0) < 0.2
    vals = [float(v) for v in res.column("residual")]
    assert vals == sorted(vals, reverse=True)
    traj = read_csv(tmp_path / "cosmo_trajectory.csv")
    assert traj.columns[:2] == ["t", "a"]


def test_cosmo_matter_columns(tmp_path):
    assert run_cli(["cosmo", "--matter", "twolevel:1.3", "--t-max", "0.2",
                    "--t-points", "51"], tmp_path) == EXIT_OK
    traj = read_csv(tmp_path / "cosmo_trajectory.csv")
    assert "norm" in traj.columns
    norms = [float(v) for v in traj.column("norm")]
    for n in norms:
        assert abs(n - 1.0) < 1e-9


def test_network_gauge_mode(tmp_path):
    assert run_cli(["network", "--mode", "gauge-check", "--n", "4", "--N", "4",
                    "--samples", "10", "--seed", "0"], tmp_path) == EXIT_OK
    t = read_csv(tmp_path / "network_gauge_check.csv")
    diffs = [float(v) for v in t.column("abs_difference")]
    assert diffs and max(diffs) < 1e-10


def test_network_rolldown_mode(tmp_path):
    assert run_cli(["network", "--mode", "rolldown", "--n", "16",
                    "--patterns", "3", "--flips", "1", "--seed", "5"],
                   tmp_path) == EXIT_OK
    summary = read_csv(tmp_path / "network_rolldown_summary.csv")
    row = dict(zip(summary.columns, summary.rows[0]))
    assert row["recovered"] == "1"
    steps = read_csv(tmp_path / "network_rolldown.csv")
    energies = [float(v) for v in steps.column("energy")]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_network_entropy_mode(tmp_path):
    assert run_cli(["network", "--mode", "entropy", "--n", "6",
                    "--steps", "400", "--flip-prob", "0.3", "--window", "2",
                    "--seed", "1"], tmp_path) == EXIT_OK
    t = read_csv(tmp_path / "network_entropy.csv")
    row = dict(zip(t.columns, t.rows[0]))
    assert 0.0 <= float(row["entropy_bits_per_step"]) <= 6.0


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert main(["tunnel", "--help"]) == 0
    capsys.readouterr()


def test_unknown_flag_exits_2(tmp_path):
    assert main(["tunnel", "--frobnicate", "--output-dir",
                 str(tmp_path)]) == EXIT_VALIDATION
    assert os.listdir(tmp_path) == []


def test_paths_printed_on_success(tmp_path, capsys):
    assert run_cli(["tunnel"], tmp_path) == EXIT_OK
    out = capsys.readouterr().out
    assert "tunnel.csv" in out
