import numpy as np
import pytest

from nlgs.cli import classify_pulse_profile, main
from nlgs.config import (ConfigError, E_CASE, E_GRID, E_HORIZON, E_NEG_RATE,
                         E_NEUMANN_INF, E_TAU, RunConfig, make_config,
                         read_config_file, validate_config)


def run_cli(*args):
    return main(list(args))


def test_converge_writes_expected_schema(tmp_path):
    out = tmp_path / "conv"
    assert run_cli("converge", "--case", "dirichlet1", "--levels", "2",
                   "--out", str(out)) == 0
    csv = (out / "convergence.csv").read_text().splitlines()
    assert csv[0] == "level,h,tau,nodes,elements,err_u,rate_u,err_v,rate_v"
    assert len(csv) == 3
    first = csv[1].split(",")
    assert first[6] == "" and first[8] == ""   # no rates on the first level
    assert (out / "manifest.ini").exists()


def test_single_level_has_no_rates(tmp_path):
    out = tmp_path / "one"
    assert run_cli("converge", "--case", "neumann1", "--levels", "1",
                   "--out", str(out)) == 0
    csv = (out / "convergence.csv").read_text().splitlines()
    assert len(csv) == 2


def test_csv_regeneration_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("converge", "--case", "dirichlet1", "--levels", "2",
                   "--out", str(a)) == 0
    assert run_cli("converge", "--config", str(a / "manifest.ini"),
                   "--out", str(b)) == 0
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()


def test_six_violation_classes_have_distinct_codes(tmp_path):
    def code_of(cfg):
        with pytest.raises(ConfigError) as info:
            validate_config(cfg)
        return info.value.code

    codes = {
        code_of(make_config({"mode": "pulse", "h": 0.7})),
        code_of(make_config({"mode": "single", "h": 0.05, "tau": 0.3, "T": 1.0})),
        code_of(make_config({"mode": "pulse", "collar": 2.0, "kernel_r": 5.0})),
        code_of(make_config({"mode": "pulse", "kernel_variant": "gaussian"})),
        code_of(make_config({"mode": "pulse", "f": -1.0})),
        code_of(make_config({"mode": "mms", "case": "nope"})),
    }
    assert codes == {E_GRID, E_TAU, E_HORIZON, E_NEUMANN_INF, E_NEG_RATE, E_CASE}


def test_cli_exit_code_2_on_bad_config():
    assert run_cli("converge", "--case", "nope", "--out", "/tmp/x") == 2
    assert run_cli("pulse", "--h", "0.7", "--out", "/tmp/x") == 2


def test_config_file_roundtrip(tmp_path):
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text(
        "[run]\nmode = single\nbc = neumann\nT = 0.5\n"
        "[domain]\nomega_lo = -8\nomega_hi = 8\ncollar = 2\n"
        "[kernel]\nvariant = dispersal_exp\na = 3\nr = 2\n"
        "[params]\nd_u = 1.0\nd_v = 0.01\nf = 0.01\nkappa = 0.0977\n"
        "[grid]\nh = 0.25\ntau = 0.05\n")
    values = read_config_file(cfg_file)
    cfg = make_config(values)
    assert cfg.kernel_variant == "dispersal_exp"
    assert cfg.kernel_a == 3.0
    assert cfg.T == 0.5
    validate_config(cfg)


def test_single_run_outputs(tmp_path):
    out = tmp_path / "single"
    code = run_cli("single", "--h", "0.5", "--tau", "0.1", "--T", "0.5",
                   "--config", _single_cfg(tmp_path), "--out", str(out))
    assert code == 0
    profile = (out / "profile.csv").read_text().splitlines()
    assert profile[0] == "x,u,v,region"
    assert profile[1].endswith(",collar")
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "step,t,norm_u,norm_v,criterion"
    assert len(trace) == 6  # 5 steps


def _single_cfg(tmp_path):
    path = tmp_path / "single.ini"
    path.write_text(
        "[run]\nmode = single\nbc = neumann\n"
        "[domain]\nomega_lo = -8\nomega_hi = 8\ncollar = 2\n"
        "[kernel]\nvariant = dispersal_exp\na = 3\nr = 2\n"
        "[params]\nd_u = 1.0\nd_v = 0.01\nf = 0.01\nkappa = 0.0977\n")
    return str(path)


def test_dump_operators_flag(tmp_path):
    out = tmp_path / "dump"
    code = run_cli("single", "--h", "0.5", "--tau", "0.1", "--T", "0.1",
                   "--config", _single_cfg(tmp_path), "--out", str(out),
                   "--dump-operators")
    assert code == 0
    header = (out / "nonlocal_op.txt").read_text().splitlines()[0]
    assert header == "41 41"


def test_classify_pulse_profiles_synthetic():
    x = np.linspace(-10, 10, 401)
    single = np.exp(-x ** 2)
    got = classify_pulse_profile(x, single)
    assert got["kind"] == "single"
    assert got["maxima_x"] == [0.0]

    batman = np.exp(-((np.abs(x) - 1.5) ** 2))
    got = classify_pulse_profile(x, batman)
    assert got["kind"] == "batman"
    assert got["v0_is_min"]
    assert got["maxima_x"] == [-1.5, 1.5]

    flat = np.zeros_like(x)
    assert classify_pulse_profile(x, flat)["kind"] == "other"


def test_oracle_command(tmp_path):
    out = tmp_path / "orc"
    assert run_cli("oracle", "--case", "dirichlet1", "--levels", "1",
                   "--out", str(out)) == 0
    lines = (out / "oracle.csv").read_text().splitlines()
    assert lines[0] == "level,h,n_modes,tau,l2_diff"
    assert len(lines) == 2
    fields = (out / "fields.csv").read_text().splitlines()
    assert fields[0] == "x,u_fem,u_spectral"
    assert run_cli("oracle", "--case", "neumann1", "--levels", "1",
                   "--out", str(out)) == 2
