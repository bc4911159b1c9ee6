import io
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from brinkfd import cli
from brinkfd.timeloop import RunConfig, SweepRecord


def test_parse_empty_gives_defaults():
    assert cli.parse_config("") == RunConfig()
    assert cli.parse_config("# only a comment\n\n") == RunConfig()


def test_parse_values():
    c = cli.parse_config("epsilon=1e-3\nbeta=0.4")
    assert c == RunConfig(epsilon=1e-3, beta=0.4)
    c = cli.parse_config("n = 8   # coarse\n dt=0.1\nT=0.5\nmu=0.5\ncut_depth=4\nsolver_tol=1e-11\ndelta_reg=1e-8")
    assert (c.n, c.dt, c.T, c.mu, c.cut_depth, c.solver_tol, c.delta_reg) == (8, 0.1, 0.5, 0.5, 4, 1e-11, 1e-8)


@pytest.mark.parametrize("text, line, fragment", [
    ("beta=1.0", 1, "beta"),
    ("epsilon=1e-3\nbogus=3", 2, "unknown"),
    ("\n\nn=abc", 3, "cannot parse"),
    ("epsilon", 1, "key=value"),
    ("epsilon=nan", 1, "finite"),
    ("dt=0.3", 1, "integer"),
])
def test_parse_errors_name_the_line(text, line, fragment):
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(text)
    assert f"line {line}" in str(info.value) and fragment in str(info.value)


def record(beta, eps, err, status="ok"):
    return SweepRecord(beta, eps, 0.1414, 0.05, 1.0, err / 3, err, 1e-12, 10.0, 1e7, 1.5, status)


def test_csv_round_trip(tmp_path):
    recs = [record(0.0, 10.0**-k, math.pi * 10.0**(-k / 2)) for k in range(4)]
    recs.append(SweepRecord(0.5, 1e-9, 0.1, 0.05, 1, *[float("nan")] * 4, 1e16, 2.0, "solver_failed"))
    path = tmp_path / "s.csv"
    with path.open("w") as fh:
        cli.write_csv(recs, fh)
    assert path.read_text().splitlines()[0] == cli.HEADER
    back = cli.read_csv(path)
    for a, b in zip(recs, back):
        for name in SweepRecord.columns():
            x, y = getattr(a, name), getattr(b, name)
            assert x == y or (isinstance(x, float) and math.isnan(x) and math.isnan(y))


def test_malformed_csv(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    assert cli.main(["rates", str(p)]) == cli.EXIT_USAGE
    p.write_text(cli.HEADER + "\n0,1,2\n")
    with pytest.raises(cli.ConfigError):
        cli.read_csv(p)
    p.write_text(cli.HEADER + "\n" + ",".join(["x"] * 11) + ",ok\n")
    with pytest.raises(cli.ConfigError):
        cli.read_csv(p)
    assert cli.main(["rates", str(tmp_path / "missing.csv")]) == cli.EXIT_USAGE


def write(tmp_path, recs):
    p = tmp_path / "r.csv"
    with p.open("w") as fh:
        cli.write_csv(recs, fh)
    return p


def test_rates_of_square_root_law(tmp_path):
    p = write(tmp_path, [record(0.0, e, np.sqrt(e)) for e in (1, 1e-1, 1e-2, 1e-3)])
    out = io.StringIO()
    fits = cli.cmd_rates(p, stream=out)
    assert fits[0.0].slope == pytest.approx(0.5, abs=1e-12)
    assert "slope 0.5000" in out.getvalue() and "A(0,beta)/2 = 0.5" in out.getvalue()


def test_rates_of_constant_errors(tmp_path):
    p = write(tmp_path, [record(0.5, e, 0.7) for e in (1, 1e-1, 1e-2, 1e-3)])
    out = io.StringIO()
    cli.cmd_rates(p, stream=out)
    assert "inconclusive" in out.getvalue() and "= 1" in out.getvalue()


def test_svg_charts(tmp_path):
    recs = [record(b, 10.0**-k, (1 + b) * 10.0**(-k / 2)) for k in range(4) for b in (0.0, 0.5)]
    paths = cli.write_svgs(recs, tmp_path / "sweep.csv")
    assert [p.name for p in paths] == ["sweep_err_l2_final.svg", "sweep_err_l2h1.svg"]
    for p in paths:
        root = ET.fromstring(p.read_text())
        ns = "{http://www.w3.org/2000/svg}"
        assert root.tag == ns + "svg"
        assert len(root.findall(f"{ns}polyline")) == 2
        labels = [t.text for t in root.findall(f"{ns}text")]
        assert "1e0" in labels and "1e-3" in labels


def test_one_point_sweep(tmp_path):
    out = tmp_path / "one.csv"
    base = RunConfig(n=4, dt=0.5)
    recs = cli.cmd_sweep(base, [1e-2], [0.3], out=out, svg=True)
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[0] == cli.HEADER
    assert lines[1].startswith("0.29999999999999999,0.01,")
    assert recs[0].status == "ok"
    assert (tmp_path / "one_err_l2h1.svg").exists()
    assert cli.read_csv(out)[0].err_l2h1 == recs[0].err_l2h1


def test_sweep_order_and_parallel_determinism(tmp_path):
    base = RunConfig(n=3, dt=0.5)
    eps, betas = [1.0, 1e-2], [0.0, 0.5]
    serial = cli.cmd_sweep(base, eps, betas)
    parallel = cli.cmd_sweep(base, eps, betas, threads=2)
    assert [(r.epsilon, r.beta) for r in serial] == [(1.0, 0.0), (1.0, 0.5), (1e-2, 0.0), (1e-2, 0.5)]
    for a, b in zip(serial, parallel):
        assert (a.epsilon, a.beta) == (b.epsilon, b.beta)
        assert a.err_l2h1 == pytest.approx(b.err_l2h1, rel=1e-12)


def test_run_command_and_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n=3\ndt=0.5\n")
    assert cli.main(["run", "--config", str(cfg), "--epsilon", "1e-2", "--beta", "0.2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == cli.HEADER and lines[1].endswith(",ok")
    assert cli.main(["run", "--config", str(cfg), "--beta", "1.5"]) == cli.EXIT_USAGE
    cfg.write_text("beta=2\n")
    assert cli.main(["run", "--config", str(cfg)]) == cli.EXIT_USAGE
    assert "line 1" in capsys.readouterr().err
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE


def test_run_reports_solver_failure(monkeypatch, capsys):
    from brinkfd import linsolve, timeloop

    def broken(*a, **k):
        raise linsolve.SolverFailure("forced", linsolve.SaddleSolveReport(np.inf))

    monkeypatch.setattr(timeloop, "solve_sparse", broken)
    assert cli.main(["run", "--n", "2", "--dt", "0.5"]) == cli.EXIT_SOLVER
    assert capsys.readouterr().out.splitlines()[1].endswith(",solver_failed")


def test_zero_forcing_flag(capsys):
    assert cli.main(["run", "--n", "3", "--dt", "0.5", "--zero-forcing"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    from brinkfd.manufactured import velocity_l2_omega_sq
    assert float(row[5]) == pytest.approx(np.sqrt(velocity_l2_omega_sq(1.0)), abs=1e-12)


def test_preset_help_mentions_cost(capsys):
    assert cli.main(["run", "--help"]) == 0
    assert "slow" in capsys.readouterr().out


def test_check_command(capsys):
    assert cli.main(["check"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "7/7 checks passed" in out and " s)" in out
    assert cli.main(["check", "--inject-fault"]) == cli.EXIT_CHECK
    out = capsys.readouterr().out
    assert "[FAIL] geometry partition" in out
    assert out.count("[FAIL]") == 1


def test_reference_preset_configuration():
    args = cli.build_parser().parse_args(["run", "--preset", "paper", "--epsilon", "1e-4"])
    cfg = cli._base_config(args)
    assert (cfg.n, cfg.dt, cfg.T) == (160, 0.025, 1.0)
    args = cli.build_parser().parse_args(["sweep", "--preset", "paper", "--n", "40"])
    assert cli._base_config(args).n == 40
