import json

import pytest

from robinbilap import cli


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(p)


CLAMPED = {"domain": {"kind": "interval", "a": 0, "b": 1},
           "params": {"sigma": 0, "alpha": 0, "beta": "inf", "gamma": "inf"},
           "discretization": {"n": 64}, "k": 2}


def test_solve_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["solve", "--config", write(tmp_path, CLAMPED), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,lambda,residual,mesh_h"
    assert float(lines[1].split(",")[1]) == pytest.approx(500.5639, rel=1e-6)
    assert len(lines[1].split(",")[1].replace(".", "").lstrip("0")) >= 16
    man = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert {"config_sha256", "versions", "wall_time_s", "seed"} <= set(man)


def test_determinism(tmp_path):
    cfg = write(tmp_path, dict(CLAMPED, sweep={"axis": "alpha", "values": {"linspace": [-5, 5, 4]},
                                               "k_track": [1, 2]}))
    outs = []
    for i in range(2):
        o = tmp_path / f"o{i}.json"
        assert cli.main(["sweep", "--config", cfg, "--out", str(o), "--format", "json", "--seed", "3"]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_sweep_columns(tmp_path, capsys):
    cfg = write(tmp_path, dict(CLAMPED, sweep={"axis": "gamma", "values": [1, 2, 3]}))
    assert cli.main(["sweep", "--config", cfg]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "axis,k,lambda,residual,mesh_h,status"


def test_rate_gamma(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": {"kind": "interval"}, "params": {},
                           "sweep": {"axis": "gamma", "values": {"logspace": [1, 6, 21], "sign": -1}}})
    assert cli.main(["rate", "--config", cfg, "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["fits"]["1"]["exponent"] == pytest.approx(4 / 3, abs=0.05)


def test_hadamard_schema(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": {"kind": "disk", "R": 1}, "params": {"sigma": 0.3, "alpha": 1},
                           "hadamard": {"k": 1, "finite_difference": False}})
    assert cli.main(["hadamard", "--config", cfg, "--format", "json"]) == 0
    assert {"lambda", "F", "s", "derivative", "residuals"} <= set(json.loads(capsys.readouterr().out))


@pytest.mark.parametrize("cmd,extra", [("limit", {"limit": {"axis": "gamma", "values": [10, 100, 1e3, 1e4, 1e5]}}),
                                       ("scale", {"params": {"beta": "inf", "gamma": "inf"},
                                                  "scale": {"alphas": [1e4, 1e5]}}),
                                       ("certify", {"params": {"alpha": -20}, "certify": {"axis": "alpha"}}),
                                       ("duality", {"params": {"alpha": 1, "gamma": 1}, "duality": {"axis": "alpha"}}),
                                       ("weyl", {"discretization": {"n": 40}, "weyl": {"window": [20, 30]}})])
def test_commands_run(tmp_path, cmd, extra, capsys):
    cfg = {"domain": {"kind": "interval"}, "params": {}}
    cfg.update(extra)
    assert cli.main([cmd, "--config", write(tmp_path, cfg)]) == 0
    assert capsys.readouterr().out.startswith("key,value")


def test_malformed_config_exit2_no_output(tmp_path):
    out = tmp_path / "never.csv"
    assert cli.main(["solve", "--config", write(tmp_path, "{nope"), "--out", str(out)]) == 2
    assert list(tmp_path.iterdir()) == [tmp_path / "cfg.json"]


@pytest.mark.parametrize("cfg", [{"domain": {"kind": "disk", "R": 1}, "params": {"sigma": 1.5}},
                                 {"domain": {"kind": "torus"}},
                                 {"domain": {"kind": "interval"}, "sweep": {"axis": "alpha"}}])
def test_invalid_config(tmp_path, cfg):
    cmd = "sweep" if "sweep" in cfg else "solve"
    assert cli.main([cmd, "--config", write(tmp_path, cfg)]) == 2


def test_missing_config_and_bad_flag(tmp_path):
    assert cli.main(["solve"]) == 2
    assert cli.main(["solve", "--format", "xml"]) == 2


def test_rank_limited_pencil_is_config_error(tmp_path):
    # the 1-D trace pencil has only two finite values
    cfg = {"domain": {"kind": "interval"}, "params": {"alpha": 1, "beta": 1}, "duality": {"axis": "gamma", "k": 3}}
    assert cli.main(["duality", "--config", write(tmp_path, cfg)]) == 2


def test_solver_failure_exit3(tmp_path, capsys):
    # strong compression makes the energy indefinite on the kernel of the trace mass
    cfg = {"domain": {"kind": "interval"}, "params": {"alpha": -500, "beta": 1}, "duality": {"axis": "gamma"}}
    assert cli.main(["duality", "--config", write(tmp_path, cfg)]) == 3
    assert "IndefiniteOnKernel" in capsys.readouterr().err


def test_selftest_subset(tmp_path, capsys):
    cfg = write(tmp_path, {"selftest": {"criteria": [2, 6]}})
    assert cli.main(["selftest", "--config", cfg]) == 0
    err = capsys.readouterr().err
    assert err.count("PASS") == 2
