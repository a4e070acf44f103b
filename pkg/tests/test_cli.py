import math
import subprocess
import sys

import pytest

from jcnoise.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    EXIT_VERIFY,
    UsageError,
    main,
    parse_config,
    read_config_file,
)

Q_BAR = 0.4983098190754845


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- configuration ---------------------------------------------------------------

def test_parse_dts_flags(tmp_path):
    cfg, _ = parse_config(["evolve", "--state", "dts", "--alpha-sq", "10", "--nbar", "1",
                           "--out", str(tmp_path / "x.csv")])
    assert (cfg.scenario, cfg.state, cfg.alpha_sq, cfg.nbar) == ("evolve", "dts", 10.0, 1.0)
    assert cfg.cutoff == 150 and cfg.steps == 2001 and cfg.t_max == 25.0
    assert cfg.propagator == "analytic" and cfg.theta == 0.0
    assert cfg.resolved_q() is None


def test_equal_overlap_resolves_q(tmp_path):
    cfg, _ = parse_config(["evolve", "--state", "mtcs", "--alpha-sq", "10", "--nbar", "1",
                           "--equal-overlap", "--out", str(tmp_path / "x.csv")])
    assert cfg.resolved_q() == pytest.approx(Q_BAR, abs=1e-12)


@pytest.mark.parametrize("argv, flag", [
    (["--alpha-sq", "-1"], "--alpha-sq"),
    (["--nbar", "-0.5"], "--nbar"),
    (["--q", "1.5", "--state", "mtcs"], "--q"),
    (["--alpha-sq", "nan"], "--alpha-sq"),
    (["--state", "mtcs"], "--q"),
    (["--steps", "0"], "--steps"),
])
def test_domain_violations_are_usage_errors(tmp_path, argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_config(["evolve", "--out", str(tmp_path / "x.csv")] + argv)


def test_usage_exit_code(tmp_path, capsys):
    code, _, err = run(["evolve", "--alpha-sq", "-1", "--out", str(tmp_path / "x.csv")], capsys)
    assert code == EXIT_USAGE
    assert "--alpha-sq" in err


def test_unknown_subcommand_and_missing_out(capsys):
    assert run(["bogus"], capsys)[0] == EXIT_USAGE
    assert run(["evolve", "--state", "dts"], capsys)[0] == EXIT_USAGE


def test_config_file_and_flag_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# fig 2\nstate=mtcs\nalpha_sq=10\nnbar=0.1\nequal_overlap=true\ncutoff=120\n")
    cfg, _ = parse_config(["evolve", "--config", str(conf), "--nbar", "1", "--out", str(tmp_path / "x.csv")])
    assert cfg.state == "mtcs" and cfg.cutoff == 120 and cfg.equal_overlap
    assert cfg.nbar == 1.0


def test_config_unknown_key(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("state=dts\nsignal=3\n")
    with pytest.raises(UsageError, match="signal"):
        read_config_file(conf)


def test_config_bad_value(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("cutoff=many\n")
    code, _, err = run(["evolve", "--config", str(conf), "--out", str(tmp_path / "x.csv")], capsys)
    assert code == EXIT_USAGE and "cutoff" in err


# -- scenarios ----------------------------------------------------------------------------

def test_distribution_csv(tmp_path, capsys):
    out = tmp_path / "fig1_mtcs.csv"
    code, _, _ = run(["state", "--state", "mtcs", "--alpha-sq", "10", "--nbar", "1", "--q", "0.5",
                      "--out", str(out)], capsys)
    assert code == EXIT_OK
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "n,p" and len(lines) == 151
    p = [float(line.split(",")[1]) for line in lines[1:]]
    assert math.fsum(p) == pytest.approx(1.0, abs=1e-9)
    # q e^-10 + (1 - q) / 2
    assert p[0] == pytest.approx(0.5 * math.exp(-10) + 0.25, abs=1e-15)
    assert (tmp_path / "fig1_mtcs.csv.meta").exists()
    plot = (tmp_path / "fig1_mtcs.csv.plot").read_text()
    assert "matplotlib" in plot
    compile(plot, "plot", "exec")


def test_series_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["evolve", "--state", "dts", "--alpha-sq", "10", "--nbar", "1", "--t-max", "2",
                      "--steps", "5", "--out", str(out)], capsys)
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda_t,inversion,negativity"
    t0, w0, n0 = (float(x) for x in lines[1].split(","))
    assert (t0, n0) == (0.0, 0.0) and w0 == pytest.approx(1.0, abs=1e-14)
    assert len(lines) == 6
    t, w, n = (float(x) for x in lines[3].split(","))
    assert t == 1.0 and -1 <= w <= 1 and n >= 0


def test_seventeen_digit_floats(tmp_path, capsys):
    out = tmp_path / "s.csv"
    run(["evolve", "--state", "coherent", "--alpha-sq", "10", "--t-max", "1", "--steps", "4",
         "--out", str(out)], capsys)
    t = out.read_text().splitlines()[2].split(",")[0]
    assert t == "0.33333333333333331"


def test_cutoff_too_small_exit(tmp_path, capsys):
    code, _, err = run(["state", "--state", "coherent", "--alpha-sq", "10", "--cutoff", "20",
                        "--out", str(tmp_path / "x.csv")], capsys)
    assert code == EXIT_RUNTIME
    assert "cutoff" in err
    assert not (tmp_path / "x.csv").exists()


def test_rerun_and_sidecar_round_trip(tmp_path, capsys):
    args = ["evolve", "--state", "photon_added_mtcs", "--alpha-sq", "10", "--nbar", "1",
            "--equal-overlap", "--t-max", "5", "--steps", "26"]
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert run(args + ["--out", str(a)], capsys)[0] == EXIT_OK
    assert run(args + ["--out", str(b)], capsys)[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    meta = (tmp_path / "a.csv.meta").read_text()
    assert "q_resolved=0.49830981907548" in meta
    assert "version=" in meta and "tail_mass=" in meta
    assert run(["evolve", "--config", str(tmp_path / "a.csv.meta"), "--out", str(c)], capsys)[0] == EXIT_OK
    assert a.read_bytes() == c.read_bytes()


def test_pacs_order_flag(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert run(["state", "--state", "pacs", "--alpha-sq", "2", "--order", "2", "--out", str(out)], capsys)[0] == 0
    p = [float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]]
    assert p[0] == 0 and p[1] == 0 and p[2] > 0


# -- verify ------------------------------------------------------------------------------------

def test_verify_perturbation_names_failing_check(tmp_path, capsys):
    code, out, _ = run(["verify", "--cutoff", "60", "--debug-perturb", "rabi_sqrt_n",
                        "--out", str(tmp_path / "r.txt")], capsys)
    assert code == EXIT_VERIFY
    failing = [line for line in out.splitlines() if line.startswith("FAIL")]
    assert any("04 vacuum Rabi" in line for line in failing)
    assert (tmp_path / "r.txt").read_text() == out


def test_verify_cutoff_60_skips_large_alpha(capsys):
    code, out, _ = run(["verify", "--cutoff", "60"], capsys)
    rows = {line[6:40].strip(): line[:4] for line in out.splitlines() if line[:4] in ("PASS", "FAIL", "SKIP")}
    assert rows["05 analytic vs numeric (dim 60)"] == "PASS"
    assert rows["01 dts triple construction"] == "SKIP"
    assert "cutoff too small" in out
    assert code == (EXIT_VERIFY if "FAIL" in rows.values() else EXIT_OK)


def test_verify_cutoff_below_60(capsys):
    assert run(["verify", "--cutoff", "40"], capsys)[0] == EXIT_USAGE


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "jcnoise", "evolve", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for flag in ("--state", "--alpha-sq", "--theta", "--nbar", "--q", "--equal-overlap", "--cutoff",
                 "--t-max", "--steps", "--propagator", "--out"):
        assert flag in res.stdout
