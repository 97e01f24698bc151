import csv
import io
import subprocess
import sys

import pytest

from qdamp.cli import main, parse_args


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_rates_vacuum(capsys):
    code, out, _ = run_cli(capsys, "rates", "--n", "1", "--beta", "0.2", "--m", "2", "--omega", "1")
    assert code == 0
    r = rows(out)
    assert r[0] == ["n", "omega", "m", "beta", "T", "gamma_down", "gamma_up"]
    assert float(r[1][5]) == pytest.approx(0.1)


def test_rates_thermal_and_quanta(capsys):
    code, out, _ = run_cli(capsys, "rates", "--n", "1", "--beta", "1", "--omega", "0.6931471805599453", "--T", "1")
    assert code == 0 and float(rows(out)[1][5]) == pytest.approx(2.0)
    code, out, _ = run_cli(capsys, "rates", "--n", "0", "--beta", "0.1", "--quanta", "1.0", "--t", "10")
    assert code == 0 and float(rows(out)[1][6]) > 0
    code, _, err = run_cli(capsys, "rates", "--n", "0", "--beta", "0.1", "--quanta", "1.0")
    assert code == 2 and "--t" in err


def test_kernel_row_count(capsys):
    code, out, _ = run_cli(capsys, "kernel", "--beta", "1", "--cutoff", "10", "--tmax", "5", "--dt", "0.01")
    assert code == 0
    r = rows(out)
    assert r[0] == ["t", "gamma"]
    assert len(r) - 1 == 501


@pytest.mark.parametrize("argv", [
    ["rates", "--beta", "-1", "--n", "1"],
    ["rates", "--n", "1"],
    ["rates", "--n", "x", "--beta", "1"],
    ["rates", "--n", "1", "--beta", "1", "--bogus", "2"],
    ["bath-sim", "--N", "4", "--cutoff", "2", "--beta", "0.1", "--tmax", "1", "--dt", "0.5", "--init", "nope"],
    ["nosuch"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_overdamped_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "trajectory", "--beta", "3", "--tmax", "1", "--dt", "0.5")
    assert code == 2 and "underdamped" in err


def test_numerical_failure_exit_1(capsys, monkeypatch):
    from qdamp import cli
    from qdamp.errors import QuadratureNonConvergence

    def boom(p, stream):
        raise QuadratureNonConvergence("did not converge")

    monkeypatch.setitem(cli._DISPATCH, "kernel", boom)
    code, _, err = run_cli(capsys, "kernel", "--beta", "1", "--cutoff", "10", "--tmax", "1", "--dt", "0.5")
    assert code == 1
    assert err.startswith("QuadratureNonConvergence")


def test_energies(capsys):
    code, out, _ = run_cli(capsys, "energies", "--n", "0", "--omega", "1", "--beta", "0.1", "--m", "1")
    assert code == 0
    r = rows(out)
    assert r[0] == ["param", "value", "energy_quadrature", "energy_closed_form"]
    assert float(r[1][2]) == pytest.approx(0.5, rel=1e-9)
    code, out, _ = run_cli(capsys, "energies", "--n", "1", "--beta", "0.1", "--sweep", "beta", "--values", "0.1,0.5")
    assert [float(x[3]) for x in rows(out)[1:]] == pytest.approx([1.5, 1.5])


def test_field(capsys):
    code, out, _ = run_cli(capsys, "field", "--beta", "1", "--cutoff", "10", "--rmax", "5", "--dr", "0.01")
    assert code == 0
    r = rows(out)
    assert r[0] == ["r", "P", "Q"]
    assert len(r) == 502
    assert all(float(x[2]) == 0.0 for x in r[1:])


def test_trajectory_methods_agree(capsys):
    base = ["trajectory", "--beta", "0.2", "--tmax", "2", "--dt", "0.001", "--q0", "1"]
    _, cf, _ = run_cli(capsys, *base)
    _, vt, _ = run_cli(capsys, *base, "--method", "volterra")
    a, b = rows(cf)[1:], rows(vt)[1:]
    assert len(a) == len(b) == 2001
    assert max(abs(float(x[1]) - float(y[1])) for x, y in zip(a, b)) < 1e-5


def test_bath_sim_conserves_total(capsys):
    code, out, _ = run_cli(capsys, "bath-sim", "--N", "128", "--cutoff", "20", "--n", "1", "--beta", "0.05",
                           "--tmax", "20", "--dt", "0.5")
    assert code == 0
    r = rows(out)
    assert r[0] == ["t", "E_osc_canonical", "E_osc_kinetic", "E_bath", "E_total"]
    tot = [float(x[4]) for x in r[1:]]
    assert max(abs(e - tot[0]) for e in tot) <= 1e-8 * abs(tot[0])


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rates\nbeta = 0.3\nn = 2\nm = 1.5\n")
    cfgd = parse_args(["rates", "--config", str(cfg), "--n", "1"])
    assert cfgd.params["beta"] == 0.3 and cfgd.params["n"] == 1 and cfgd.params["m"] == 1.5
    bad = tmp_path / "bad.cfg"
    bad.write_text("zzz = 1\n")
    code, _, err = run_cli(capsys, "rates", "--config", str(bad), "--n", "1", "--beta", "1")
    assert code == 2 and "zzz" in err


def test_out_and_gnuplot(tmp_path, capsys):
    out = tmp_path / "k.csv"
    gp = tmp_path / "k.gp"
    code, stdout, _ = run_cli(capsys, "kernel", "--beta", "1", "--cutoff", "10", "--tmax", "0.1", "--dt", "0.05",
                              "--out", str(out), "--gnuplot-script", str(gp))
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("t,gamma\n")
    assert str(out) in gp.read_text()
    code, _, _ = run_cli(capsys, "kernel", "--beta", "1", "--cutoff", "10", "--tmax", "0.1", "--dt", "0.05",
                         "--gnuplot-script", str(gp))
    assert code == 2


def test_deterministic_output(capsys):
    argv = ["field", "--beta", "0.7", "--cutoff", "8", "--rmax", "1", "--dr", "0.1"]
    _, a, _ = run_cli(capsys, *argv)
    _, b, _ = run_cli(capsys, *argv)
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qdamp.cli", "rates", "--n", "1", "--beta", "0.2", "--m", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "0.10000000000000001" in proc.stdout
