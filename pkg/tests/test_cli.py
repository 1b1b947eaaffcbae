import json
import os

import numpy as np
import pytest

from kpsoliton.cli import DEMO_CONFIG, build_report, load_config, main, read_extra, read_series
from kpsoliton.spectral.grid import read_field

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def _cfg(name):
    return os.path.join(CONFIGS, name)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


SMALL = {
    "model": {"model": "gkp", "p": 1, "sigma2": 1},
    "grid": {"nx": 128, "ny": 16, "Lx": 60.0, "Ly": 10.0},
    "soliton": {"mu": 0.0, "nu": 1.0},
    "time": {"dt": "auto", "t_final": 1.0, "snapshot_every": 0.5},
    "output": {"snapshots": True},
}


def _write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# help ----------------------------------------------------------------------

@pytest.mark.parametrize("sub", [[], ["verify"], ["soliton"], ["evolve"], ["report"], ["demo"]])
def test_help_exits_zero(capsys, sub):
    with pytest.raises(SystemExit) as exc:
        main(sub + ["--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


# verify --------------------------------------------------------------------

def test_verify_gkp_symbolic(capsys):
    code, out, err = _run(capsys, "verify", "--model", "gkp", "--p", "symbolic")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["ok"]
    laws = [e for e in doc["entries"] if e["entry_type"] == "conslaw" and "erratum" not in e["name"]]
    assert len(laws) == 8
    assert sorted(doc["quarantined"]) == ["gkp-conslaw6", "gkp-symm7"]


def test_verify_gb_p1(capsys, tmp_path):
    out_json = tmp_path / "rep.json"
    code, out, _ = _run(capsys, "verify", "--model", "gb2d", "--p", "1", "--json", str(out_json))
    assert code == 0 and out == ""
    assert json.loads(out_json.read_text())["ok"]


def test_verify_extra_entries_pass(capsys):
    code, out, _ = _run(capsys, "verify", "--model", "gkp", "--extra", _cfg("extra_example.sx"))
    assert code == 0
    names = {e["name"] for e in json.loads(out)["extra"]}
    assert names == {"xmom", "xshift"}


def test_verify_broken_triple_exits_two(capsys):
    code, _, err = _run(capsys, "verify", "--model", "gkp", "--extra", _cfg("broken_triple.sx"))
    assert code == 2
    assert "MISMATCH broken" in err and "2*v_tx" in err


def test_read_extra_errors(tmp_path):
    bad = tmp_path / "bad.sx"
    bad.write_text("(conslaw only two)")
    with pytest.raises(Exception, match="malformed"):
        read_extra(str(bad))
    empty = tmp_path / "empty.sx"
    empty.write_text("; nothing here\n")
    assert read_extra(str(empty)) == []


def test_verify_bad_power_is_input_error(capsys):
    code, _, err = _run(capsys, "verify", "--model", "gkp", "--p", "0")
    assert code == 1 and "error" in err


# soliton -------------------------------------------------------------------

def test_soliton_kinematic_violation(capsys):
    code, _, err = _run(capsys, "soliton", "--model", "gkp", "--mu", "1", "--nu", "0.5")
    assert code == 3 and "kinematic" in err


def test_soliton_box_too_small(capsys, tmp_path):
    code, _, err = _run(capsys, "soliton", "--model", "gkp", "--nu", "1", "--box", "20,10",
                        "--grid", "64,16", "--out", str(tmp_path / "u.bin"))
    assert code == 3 and "Lx >=" in err


def test_soliton_writes_field_and_profile(capsys, tmp_path):
    field, prof = tmp_path / "u.bin", tmp_path / "prof.csv"
    code, out, _ = _run(capsys, "soliton", "--model", "gkp", "--p", "1", "--nu", "1",
                        "--box", "80,20", "--grid", "256,16", "--out", str(field),
                        "--profile-csv", str(prof), "--profile-points", "101")
    assert code == 0
    summary = json.loads(out)
    assert summary["A"] == pytest.approx(3) and summary["ode_residual_rel"] < 1e-10
    f = read_field(str(field))
    assert f.data.shape == (16, 256) and np.max(f.data) == pytest.approx(3, rel=1e-3)
    rows = prof.read_text().splitlines()
    assert rows[0] == "xi,U,px,py,e" and len(rows) == 102


def test_soliton_gb_writes_rate(capsys, tmp_path):
    field = tmp_path / "u.bin"
    code, out, _ = _run(capsys, "soliton", "--model", "gb2d", "--gb-sign", "-1", "--nu", "0.5",
                        "--box", "120,10", "--grid", "256,16", "--out", str(field))
    assert code == 0
    assert os.path.exists(json.loads(out)["rate_field"])


# evolve and report ---------------------------------------------------------

def test_evolve_then_report(capsys, tmp_path):
    out_dir = tmp_path / "run"
    code, out, err = _run(capsys, "evolve", "--config", _write_cfg(tmp_path, SMALL),
                          "--out-dir", str(out_dir))
    assert code == 0 and "dt =" in err
    run = json.loads((out_dir / "run.json").read_text())
    assert run["speed"]["rel_error"] < 0.01
    assert len(run["snapshots"]) == 3
    csv_path = str(out_dir / "diagnostics.csv")
    code, out, _ = _run(capsys, "report", "--csv", csv_path, "--gnuplot", str(tmp_path / "g.dat"))
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["samples"] == 3
    assert all(v["pass"] is not False for v in doc["verdict"].values())


def test_report_fails_on_tight_tolerance(capsys, tmp_path):
    out_dir = tmp_path / "run"
    assert main(["evolve", "--config", _write_cfg(tmp_path, SMALL), "--out-dir", str(out_dir)]) == 0
    capsys.readouterr()
    code, out, _ = _run(capsys, "report", "--csv", str(out_dir / "diagnostics.csv"),
                        "--tol", "energy=1e-30")
    assert code == 2 and json.loads(out)["verdict"]["energy"]["pass"] is False


def test_evolve_is_deterministic(capsys, tmp_path):
    cfg = dict(SMALL, perturbation={"amplitude": 0.01, "seed": 7})
    path = _write_cfg(tmp_path, cfg)
    for d in ("a", "b"):
        assert main(["evolve", "--config", path, "--out-dir", str(tmp_path / d)]) == 0
    capsys.readouterr()
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
    assert a == b


def test_config_unknown_key_rejected(capsys, tmp_path):
    cfg = dict(SMALL, colour="blue")
    code, _, err = _run(capsys, "evolve", "--config", _write_cfg(tmp_path, cfg))
    assert code == 1 and "colour" in err


def test_config_gb_requires_sign(tmp_path):
    cfg = json.loads(json.dumps(SMALL))
    cfg["model"]["model"] = "gb2d"
    with pytest.raises(Exception, match="gb_sign"):
        load_config(_write_cfg(tmp_path, cfg))


def test_even_denominator_perturbed_run_rejected(capsys, tmp_path):
    cfg = json.loads(json.dumps(SMALL))
    cfg["model"]["p"] = "3/2"
    cfg["perturbation"] = {"amplitude": 0.01, "seed": 1}
    code, _, err = _run(capsys, "evolve", "--config", _write_cfg(tmp_path, cfg))
    assert code == 1 and "even denominator" in err


@pytest.mark.parametrize("name", ["gkp_p1_soliton.json", "gb_good_soliton.json",
                                  "gkp_tilted_negative_sigma.json"])
def test_shipped_configs_validate(name):
    assert load_config(_cfg(name))["model"]["model"] in ("gkp", "gb2d")


def test_build_report_needs_two_samples():
    with pytest.raises(Exception, match="two samples"):
        build_report({"time": [0.0], "mass": [1.0], "energy": [1.0], "px": [1.0], "py": [0.0],
                      "q_rotboost": [0.0], "linf": [1.0]})


def test_report_rejects_unknown_header(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x\n0,1\n")
    code, _, err = _run(capsys, "report", "--csv", str(bad))
    assert code == 1 and "unexpected header" in err


def test_gb_report_grades_moments_only_on_request(capsys, tmp_path):
    cfg = {
        "model": {"model": "gb2d", "p": 1, "sigma2": 1, "gb_sign": -1},
        "grid": {"nx": 256, "ny": 16, "Lx": 120.0, "Ly": 10.0},
        "soliton": {"mu": 0.0, "nu": 0.5},
        "time": {"t_final": 2.0, "snapshot_every": 0.5},
        "output": {"snapshots": False},
    }
    out_dir = tmp_path / "gb"
    assert main(["evolve", "--config", _write_cfg(tmp_path, cfg), "--out-dir", str(out_dir)]) == 0
    capsys.readouterr()
    series = read_series(str(out_dir / "diagnostics.csv"))
    doc = build_report(series, sigma2=1)
    assert doc["model"] == "gb2d" and doc["pass"]
    assert doc["verdict"]["moments"]["pass"] is None
    # a line soliton is not localized in y, so the graded moment law must fail
    assert build_report(series, sigma2=1, moments=True)["verdict"]["moments"]["pass"] is False


# demo ----------------------------------------------------------------------

def test_demo_quick(capsys, tmp_path):
    code, out, _ = _run(capsys, "demo", "--quick", "--out-dir", str(tmp_path / "demo"))
    doc = json.loads(out)
    assert code == 0 and all(doc["checks"].values())
    assert json.loads((tmp_path / "demo" / "config.json").read_text())["grid"]["nx"] == 256
    assert DEMO_CONFIG["grid"]["nx"] == 512
