import json
import os

import numpy as np
import pytest

from tpeskin import cli, dynamics, io
from tpeskin.errors import PositivityFailure
from tpeskin.torus import GridField

# record_dt 0.01 keeps the differenced H^{-1/2} identity within its tolerance
FAST = ["dynamics.t_end=0.5", "output.record_dt=0.01", "dynamics.dt_max=0.01"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def sets(items):
    out = []
    for item in items:
        out += ["--set", item]
    return out


def manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_constant_preset_rows_identical(tmp_path):
    out = tmp_path / "c"
    assert run("simulate", "--out", out, *sets(["initial.preset=constant", "dynamics.K=4"] + FAST)) == 0
    recs = io.read_records_csv(out / "records.csv")
    assert len(recs) == 51
    skip = {"t", "dissipation_integral"} | {n for n in recs[0].header() if n.startswith("int_")}
    for r in recs[1:]:
        for name in recs[0].header():
            if name not in skip:
                assert getattr(r, name) == getattr(recs[0], name), name
    assert run("check", out) == 0


def test_simulate_writes_verified_manifest(tmp_path, capsys):
    out = tmp_path / "tm"
    assert run("simulate", "--out", out, *sets(FAST + ["output.snapshot_dt=0.25", "output.svg=true"])) == 0
    m = io.read_manifest(out)
    assert m["termination"] == "completed"
    assert {"records.csv", "config.toml", "initial.csv", "snapshots.csv", "snapshot_0002.csv",
            "fbar.svg"} <= set(m["files"])
    assert run("check", "--out", out) == 0
    assert "checks.csv" in io.read_manifest(out)["files"]
    assert "0 failed" in capsys.readouterr().out


def test_overrides_echoed_verbatim(tmp_path):
    out = tmp_path / "o"
    over = ["dynamics.cfl=0.75", "tol.energy=1e-7"] + FAST
    assert run("simulate", "--out", out, *sets(over)) == 0
    echo = (out / "config.toml").read_text()
    m = manifest(out)
    for o in over:
        assert f"# override: {o}" in echo
        assert o in m["overrides"]
    assert m["config"]["dynamics.cfl"] == 0.75 and m["config"]["tol.energy"] == 1e-7


def test_cfl_override_halves_first_step(tmp_path):
    base = ["initial.preset=random", "dynamics.K=16", "dynamics.dt_max=1", "dynamics.t_end=0.2",
            "output.record_dt=0.2"]
    dts = {}
    for cfl in (0.5, 0.25):
        out = tmp_path / f"cfl{cfl}"
        assert run("simulate", "--out", out, *sets(base + [f"dynamics.cfl={cfl}"])) == 0
        dts[cfl] = manifest(out)["dt_first"]
    assert dts[0.25] == pytest.approx(dts[0.5] / 2, rel=1e-12)


def test_refuses_to_overwrite_without_force(tmp_path, capsys):
    out = tmp_path / "r"
    assert run("simulate", "--out", out, *sets(FAST)) == 0
    assert run("simulate", "--out", out, *sets(FAST)) == 2
    assert "--force" in capsys.readouterr().err
    assert run("simulate", "--out", out, "--force", *sets(FAST)) == 0


@pytest.mark.parametrize("argv", [
    ["simulate", "--set", "dynamics.nope=1"],
    ["simulate", "--set", "dynamics.cfl=-1"],
    ["simulate", "--config", "/nonexistent.toml"],
    ["simulate", "--set", "initial.preset=warp"],
    ["frobnicate"],
    ["check"],
])
def test_usage_and_config_errors_exit_2(tmp_path, argv):
    assert run(*argv, *(["--out", tmp_path / "x"] if argv[0] == "simulate" else [])) == 2


def test_check_fails_fast_on_missing_file(tmp_path, capsys):
    out = tmp_path / "m"
    assert run("simulate", "--out", out, *sets(FAST + ["output.snapshot_dt=0.25"])) == 0
    os.remove(out / "snapshot_0001.csv")
    assert run("check", out) == 2
    assert "snapshot_0001.csv" in capsys.readouterr().err


def test_check_rejects_run_overrides(tmp_path):
    out = tmp_path / "m"
    assert run("simulate", "--out", out, *sets(FAST)) == 0
    assert run("check", out, "--set", "dynamics.cfl=0.1") == 2
    assert run("check", out, "--set", 'checks.only=["no_such_check"]') == 2


def test_coarse_run_fails_energy_check(tmp_path):
    out = tmp_path / "coarse"
    over = ["initial.preset=random", "dynamics.K=16", "dynamics.cfl=1.9", "dynamics.dt_max=1",
            "dynamics.t_end=2", "output.record_dt=0.5"]
    assert run("simulate", "--out", out, *sets(over)) == 0
    assert run("check", out, "--set", 'checks.only=["energy_identity"]') == 3
    rep = io.read_checks_csv(out / "checks.csv")[0]
    assert rep.name == "energy_identity" and rep.status == "fail" and rep.worst > 1e-5


def test_positivity_failure_exits_3_with_partial_output(tmp_path, monkeypatch):
    real = dynamics.step_rk4

    def failing(s, dt, **kw):
        if s.t >= 0.2:
            raise PositivityFailure("forced")
        return real(s, dt, **kw)

    monkeypatch.setattr(dynamics, "step_rk4", failing)
    out = tmp_path / "p"
    assert run("simulate", "--out", out, *sets(FAST)) == 3
    m = io.read_manifest(out)
    assert m["termination"] == "positivity_failure"
    assert len(io.read_records_csv(out / "records.csv")) == 21
    monkeypatch.setattr(dynamics, "step_rk4", real)
    assert run("check", out, "--set", 'checks.only=["run_completed"]') == 3
    # an incomplete run may be replaced without --force
    assert run("simulate", "--out", out, *sets(FAST)) == 0


def test_determinism_byte_identical(tmp_path):
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run("simulate", "--out", out, *sets(FAST)) == 0
        run("check", out)
        texts.append(((out / "records.csv").read_bytes(), (out / "checks.csv").read_bytes()))
    assert texts[0] == texts[1]


def test_env_var_sets_default_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "root"))
    cfg = tmp_path / "demo.toml"
    cfg.write_text("dynamics.t_end = 0.1\noutput.record_dt = 0.05\n")
    assert run("simulate", "--config", cfg) == 0
    assert (tmp_path / "root" / "simulate-demo" / "records.csv").exists()


def test_grid_file_initial_data(tmp_path):
    g = GridField.from_function(lambda x: np.where(np.abs(x) < 1, 2.0, 0.5), 256)
    io.write_grid_csv(tmp_path / "g.csv", g)
    out = tmp_path / "g"
    assert run("simulate", "--out", out, "--set", f'initial.grid_file="{tmp_path / "g.csv"}"',
               *sets(["dynamics.K=32"] + FAST)) == 0
    f0 = io.read_field_csv(out / "initial.csv")
    # Fejer smoothing keeps the data inside the original range
    vals = f0(np.linspace(-np.pi, np.pi, 1001))
    assert vals.min() >= 0.5 - 1e-12 and vals.max() <= 2.0 + 1e-12


def test_oracle_command(tmp_path, capsys):
    assert run("oracle", "--out", tmp_path, *sets(["oracle.M=2048", "oracle.samples=4"])) == 0
    text = capsys.readouterr().out
    assert "hilbert_vs_pv" in text and "FAIL" not in text
    conv = (tmp_path / "pv_convergence.csv").read_text().splitlines()
    # 2048 down to 256: the table stops before M drops below 4K + 4
    assert conv[0] == "M,error" and len(conv) == 5
    errs = [float(line.split(",")[1]) for line in conv[1:]]
    assert all(np.diff(errs) > 0)


def test_lagrangian_command(tmp_path):
    out = tmp_path / "lag"
    assert run("lagrangian", "--out", out, *sets(FAST + ["lagrangian.particles=512"])) == 0
    reps = {r.name: r for r in io.read_checks_csv(out / "lagrangian_checks.csv")}
    assert set(reps) == {"flow_order", "stretch_consistency", "pushforward", "string_h1_monotone",
                         "well_stretched_lower_bound"}
    assert all(r.status == "pass" for r in reps.values())
    X = io.read_string_csv(out / "string_final.csv")
    assert X.X.size == 512
    io.read_manifest(out)


def test_lagrangian_from_string_file(tmp_path):
    s = -np.pi + 2 * np.pi * np.arange(256) / 256
    from tpeskin.lagrangian import StringConfig
    io.write_string_csv(tmp_path / "s.csv", StringConfig(s, s + 0.3 * np.sin(s)))
    out = tmp_path / "ls"
    assert run("lagrangian", "--out", out, "--set", f'lagrangian.string_file="{tmp_path / "s.csv"}"',
               *sets(FAST)) == 0


@pytest.mark.parametrize("workers", [1, 2])
def test_sweep(tmp_path, workers):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text("dynamics.t_end = 0.2\noutput.record_dt = 0.01\ndynamics.dt_max = 0.01\n"
                   "[sweep]\n\"initial.b\" = [0.1, 0.3]\n\"dynamics.cfl\" = [0.5, 1.0]\n")
    out = tmp_path / "sw"
    assert run("sweep", "--config", cfg, "--out", out, "--workers", workers) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "index,dir,dynamics.cfl,initial.b,termination,checks_failed,error"
    assert len(rows) == 5
    for i in range(4):
        io.read_manifest(out / f"run_{i:03d}")
    assert manifest(out / "run_003")["config"]["initial.b"] == 0.3


def test_calibrate_writes_constants(tmp_path):
    assert run("calibrate", "--out", tmp_path) == 0
    c = json.loads((tmp_path / "constants.json").read_text())
    assert 0 < c["C_star"] <= c["C_star_proven_upper"] == 4.0
    assert c["linf_smoothing_C"] == pytest.approx(c["linf_smoothing_C_observed"] * c["linf_smoothing_margin"])
    assert all(p["theta_bound_holds"] for p in c["C_star_sweep"])


def test_help_documents_every_key(capsys):
    assert run("--help") == 0
    text = capsys.readouterr().out
    from tpeskin.config import KEYS
    assert all(k in text for k in KEYS)
    assert cli.ENV_OUT in text
