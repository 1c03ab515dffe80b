import json
import os

import pytest

from yamabe_lab.cli import main, read_csv, read_json, rows_to_csv
from yamabe_lab.config import OUTDIR_ENV, RunConfig, config_from_dict
from yamabe_lab.continuation import ContinuationTrace
from yamabe_lab.errors import PreconditionError
from yamabe_lab.functionals import QuotientReport
from yamabe_lab.pipelines import SweepResult


def run_cli(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--outdir", str(out)])
    return code, out


def only(out, suffix):
    files = sorted(p for p in out.iterdir() if p.suffix == suffix and p.name != "manifest.json")
    assert len(files) == 1
    return files[0]


def test_constants_table(tmp_path):
    code, out = run_cli(tmp_path, "constants", "--n", "4..10")
    assert code == 0
    rows = read_csv(only(out, ".csv"))
    assert list(rows[0]) == ["n", "omega_n", "T", "K1", "K2", "K3", "duplication_residual"]
    assert [r["n"] for r in rows] == list(range(4, 11))
    assert rows[0]["K3"] == float("inf")
    assert all(abs(r["duplication_residual"]) < 1e-10 for r in rows)


def test_sweep_eps_json(tmp_path):
    code, out = run_cli(tmp_path, "sweep-eps", "--n", "5", "--beta", "0.1")
    assert code == 0
    res = SweepResult.from_dict(read_json(only(out, ".json")))
    assert res.predicted_coefficient > 0
    assert abs(res.fitted_coefficient / res.predicted_coefficient - 1) < 0.1
    rows = read_csv(only(out, ".csv"))
    assert [r["eps"] for r in rows] == res.parameters and [r["deficit"] for r in rows] == res.values


def test_correct_rejects_dimension_three(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "correct", "--n", "3")
    assert code == 2
    assert "n >= 4" in capsys.readouterr().err


def test_flat_jet_is_a_hypothesis_failure(tmp_path):
    code, _ = run_cli(tmp_path, "correct", "--n", "5", "--jet", "flat")
    assert code == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from yamabe_lab import pipelines
    from yamabe_lab.errors import ConstructionError

    def boom(*args, **kwargs):
        raise ConstructionError("radius search failed")

    monkeypatch.setattr(pipelines, "conformal_negativity", boom)
    code, _ = run_cli(tmp_path, "conformal", "--n", "4")
    assert code == 3


def test_unreadable_config(tmp_path):
    assert main(["constants", "--config", str(tmp_path / "missing.json"),
                 "--outdir", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["constants", "--config", str(bad), "--outdir", str(tmp_path)]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"numeric": {"bogus": 1}}))
    assert main(["constants", "--config", str(cfg), "--outdir", str(tmp_path)]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sweep": {"n_values": [4, 5]}, "numeric": {"h": 0.01}}))
    out = tmp_path / "o"
    assert main(["identity-check", "--config", str(cfg), "--h", "0.002", "--outdir", str(out)]) == 0
    rows = read_csv(only(out, ".csv"))
    assert [r["n"] for r in rows] == [4, 5] and all(r["h"] == 0.002 for r in rows)


def test_env_var_default_outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "env"))
    assert main(["constants", "--n", "4..5"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_determinism_and_manifest(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["quotient", "--n", "5", "--eps", "1e-3", "--r", "1.0", "--seed", "3",
                     "--outdir", str(d)]) == 0
    ca, cb = only(a, ".csv"), only(b, ".csv")
    assert ca.name == cb.name and ca.read_bytes() == cb.read_bytes()
    man = read_json(a / "manifest.json")
    (stem, entry), = man["runs"].items()
    assert stem == ca.stem and entry["seeds"]["jet"] == 3 and entry["version"]
    assert entry["config_hash"] in ca.name


def test_quotient_round_trip(tmp_path):
    code, out = run_cli(tmp_path, "quotient", "--n", "4", "--eps", "1e-3", "--r", "1.0")
    assert code == 0
    payload = read_json(only(out, ".json"))
    reps = [QuotientReport.from_dict(d) for d in payload["reports"]]
    rows = read_csv(only(out, ".csv"))
    assert [r["value"] for r in rows] == [rep.value for rep in reps]


def test_solve_round_trip(tmp_path):
    code, out = run_cli(tmp_path, "solve", "--n", "4", "--jet", "flat", "--beta", "1", "--r", "6")
    assert code == 0
    tr = ContinuationTrace.from_dict(read_json(only(out, ".json")))
    assert tr.terminal_status == "converged_at_p"
    rows = read_csv(only(out, ".csv"))
    assert [r["q"] for r in rows] == tr.exponents


@pytest.mark.parametrize("cmd", ["sweep-d", "correct", "conformal"])
def test_other_commands_emit_parseable_files(tmp_path, cmd):
    code, out = run_cli(tmp_path, cmd, "--n", "4")
    assert code == 0
    assert read_csv(only(out, ".csv")) and read_json(only(out, ".json"))


def test_config_validation():
    with pytest.raises(PreconditionError):
        config_from_dict({"command": "nope"})
    with pytest.raises(PreconditionError):
        config_from_dict({"command": "quotient", "numeric": {"newton_tol": 0}})
    with pytest.raises(PreconditionError):
        config_from_dict({"command": "quotient", "jet": {"seed": None}})
    cfg = config_from_dict({"command": "constants"})
    assert isinstance(cfg, RunConfig) and cfg.digest() == config_from_dict({"command": "constants"}).digest()


def test_csv_floats_round_trip():
    vals = [0.1, 1 / 3, 1e-300, 2.5e17, -0.0]
    text = rows_to_csv([{"x": v} for v in vals])
    assert [float(line) for line in text.splitlines()[1:]] == vals
