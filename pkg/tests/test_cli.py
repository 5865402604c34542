import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from superfix import __version__
from superfix import config as cf
from superfix.cli import RunConfig, dispatch, main
from superfix.serialize import csv_document, dumps, format_float, read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    from superfix.cli import parse_run

    status = dispatch(parse_run(argv), out, err)
    return status, out.getvalue(), err.getvalue()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


# serialization


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 189224 / 216224, 1e-300, 27.0):
        assert float(format_float(x)) == x
    assert format_float(27.0) == "27.0"
    assert format_float(math.inf) == "inf" and format_float(-math.inf) == "-inf"


def test_dumps_is_valid_json_with_string_infinities():
    doc = json.loads(dumps({"a": [1.5, math.inf], "b": {"c": np.float64(0.25), "d": (1, 2)}, "e": True}))
    assert doc == {"a": [1.5, "inf"], "b": {"c": 0.25, "d": [1, 2]}, "e": True}


def test_csv_document_header_and_rows():
    text = csv_document("demo", {"k": 1}, [{"a": 0.1, "b": None}, {"a": 2.0, "b": True}])
    lines = text.splitlines()
    assert lines[0].startswith("# tool=superfix version=" + __version__)
    assert lines[1] == '# config={"k": 1}'
    rows = read_csv(text)
    assert rows[0] == {"a": "0.10000000000000001", "b": ""} and rows[1]["b"] == "True"


# config


def test_unknown_key_rejected(tmp_path):
    path = write(tmp_path, "bad.yaml", {"space": {"fixture": "cube-sum"}, "colour": "red"})
    with pytest.raises(cf.ConfigError, match="colour"):
        cf.load(path, "problem")


def test_space_needs_exactly_one_source(tmp_path):
    path = write(tmp_path, "bad.yaml", {"space": {"fixture": "cube-sum", "interval": {"lo": 0, "hi": 1, "step": 0.1}}})
    with pytest.raises(cf.ConfigError):
        cf.load(path, "problem")


def test_build_problem_from_finite_table():
    data = cf.load(CONFIGS / "finite-four.yaml", "problem")
    prob = cf.build_problem(data)
    assert prob.T(1) == 2 and prob.S(2, 3) == 1 and prob.kind.value == "BianchiniSF"


def test_map_table_must_cover_space(tmp_path):
    data = cf.load(CONFIGS / "finite-four.yaml", "problem")
    data["map"]["table"].pop(4)
    with pytest.raises(cf.ConfigError, match="no image"):
        cf.build_problem(data)


def test_fixture_defaults_fill_in():
    prob = cf.build_problem({"space": {"fixture": "powers-of-three", "horizon": 5}})
    assert prob.kind.value == "KannanSF" and prob.truncation == {"horizon": 5}


def test_interval_space_and_named_maps():
    prob = cf.build_problem({
        "space": {"interval": {"lo": 0, "hi": 1, "step": 0.25, "metric": "euclidean"}},
        "map": {"name": "scale", "c": 0.5}, "aux": {"name": "shift", "a": 1.0}, "F": {"expr": "ln(t)", "k": 0.5},
    })
    assert prob.T(0.5) == 0.25 and prob.S(0.0, 0.5) == 1.5 and prob.F(1.0) == 0.0


def test_terrain_unknown_key():
    with pytest.raises(cf.ConfigError):
        cf.terrain_config({"gain": 1.0})


# CLI


def test_certify_cube_sum_exit_zero():
    status, out, _ = run(["certify", "--config", str(CONFIGS / "cube-sum.yaml")])
    doc = json.loads(out)
    assert status == 0 and doc["result"]["verdict"] == "certified" and doc["result"]["value"] >= 27
    assert doc["config"]["space"]["fixture"] == "cube-sum" and doc["version"] == __version__


def test_certify_finite_four_exit_one():
    status, out, _ = run(["certify", "--config", str(CONFIGS / "finite-four.yaml")])
    pairs = {(v["x"], v["y"]) for v in json.loads(out)["result"]["violations"]}
    assert status == 1 and {(1, 2), (1, 3)} <= pairs


def test_certify_sb_trend_refutes():
    status, out, _ = run(["certify", "--config", str(CONFIGS / "cube-sum-sb.yaml")])
    res = json.loads(out)["result"]
    assert status == 1 and res["verdict"] == "certified" and res["horizon_trend"]["limit_refutes"]


def test_certify_pairs_csv(tmp_path):
    target = tmp_path / "pairs.csv"
    status, _, _ = run(["certify", "--config", str(CONFIGS / "finite-four.yaml"), "--pairs-csv", str(target)])
    rows = read_csv(target.read_text())
    assert status == 1 and len(rows) == 16
    row = next(r for r in rows if (r["x"], r["y"]) == ("4", "3"))
    assert float(row["score"]) == pytest.approx(math.log(4018 / 725), rel=1e-12)


def test_output_is_byte_identical():
    a = run(["certify", "--config", str(CONFIGS / "finite-four.yaml")])[1]
    b = run(["certify", "--config", str(CONFIGS / "finite-four.yaml")])[1]
    assert a == b


def test_picard_csv_columns():
    status, out, _ = run(["picard", "--config", str(CONFIGS / "unit-interval-picard.yaml"), "--out", "csv"])
    header = [ln for ln in out.splitlines() if not ln.startswith("#")][0]
    assert status == 0
    assert header == "start,n,x_n,step_dist,lambda,eta,F_of_sum,decrement_margin"


def test_picard_single_start_finite(tmp_path):
    data = yaml.safe_load((CONFIGS / "finite-four.yaml").read_text())
    data["starts"] = [1]
    status, out, _ = run(["picard", "--config", write(tmp_path, "p.yaml", data), "--out", "csv"])
    rows = read_csv(out)
    assert status == 0 and [r["x_n"] for r in rows] == ["1", "2", "3", "3"]


def test_picard_large_omega_fails():
    status, _, _ = run(["picard", "--config", str(CONFIGS / "unit-interval-picard.yaml"), "--omega", "10"])
    assert status == 1


def test_space_verify(tmp_path):
    status, out, _ = run(["space-verify", "--config", str(CONFIGS / "finite-four.yaml")])
    assert status == 0 and json.loads(out)["result"]["identity_ok"]
    data = {"space": {"finite": {"labels": [1, 2, 3], "table": [[0, 0, 4], [0, 0, 1], [4, 1, 0]]}}}
    status, out, _ = run(["space-verify", "--config", write(tmp_path, "bad.yaml", data)])
    assert status == 1 and not json.loads(out)["result"]["identity_ok"]


def test_space_verify_triples(tmp_path):
    data = {"space": {"interval": {"lo": 0, "hi": 10, "step": 0.5, "metric": "intro"}}, "triples": [[1, 2, 3]]}
    status, out, _ = run(["space-verify", "--config", write(tmp_path, "t.yaml", data)])
    assert status == 0 and json.loads(out)["result"]["triangle_ok"] is True


def test_f_check_builtins_and_failure():
    assert run(["f-check"])[0] == 0
    status, out, _ = run(["f-check", "--expr=-t^-1", "--k", "0.5"])
    assert status == 1 and json.loads(out)["result"][0]["w3"] is False


def test_examples_run_reports_discrepancy():
    status, out, _ = run(["examples", "run", "--out", "csv"])
    rows = read_csv(out)
    assert status == 1 and any(r["status"] == "discrepancy" for r in rows)
    assert run(["examples", "run", "--id", "cube-sum"])[0] == 0


def test_terrain_default_and_unstable():
    status, out, _ = run(["terrain", "simulate", "--config", str(CONFIGS / "terrain-default.yaml"), "--out", "csv"])
    rows = read_csv(out)
    assert status == 0 and list(rows[0]) == ["n", "tracking_error", "delta_max", "ratio", "f1", "f2", "clamp_count"]
    assert float(rows[-1]["tracking_error"]) < 1e-6
    assert run(["terrain", "simulate", "--config", str(CONFIGS / "terrain-unstable.yaml")])[0] == 1


def test_terrain_dump(tmp_path):
    dump = tmp_path / "xi.csv"
    run(["terrain", "simulate", "--config", str(CONFIGS / "terrain-default.yaml"), "--dump-xi", str(dump)])
    rows = read_csv(dump.read_text())
    assert len(rows) == 201 and list(rows[0]) == ["xi", "gamma", "kappa", "altitude"]


def test_error_exit_codes(tmp_path):
    assert run(["certify", "--config", str(tmp_path / "missing.yaml")])[0] == 2
    bad = write(tmp_path, "bad.yaml", {"space": {"fixture": "cube-sum"}, "kind": "Nope"})
    status, _, err = run(["certify", "--config", bad])
    assert status == 2 and "kind" in err
    nan_cfg = write(tmp_path, "nan.yaml", {"kappa0": [float("nan")] * 201})
    assert run(["terrain", "simulate", "--config", nan_cfg])[0] == 3


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["certify"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "o.json"
    proc = subprocess.run(
        [sys.executable, "-m", "superfix", "certify", "--config", str(CONFIGS / "finite-four.yaml"),
         "--output", str(out)], capture_output=True, text=True,
    )
    assert proc.returncode == 1 and json.loads(out.read_text())["command"] == "certify"


def test_dispatch_writes_output_file(tmp_path):
    target = tmp_path / "r.json"
    status = dispatch(RunConfig("examples-run", None, "json", str(target), {"id": "intro-supermetric"}))
    assert status == 0 and json.loads(target.read_text())["command"] == "examples run"


def test_space_verify_csv_has_header_without_witnesses():
    status, out, _ = run(["space-verify", "--config", str(CONFIGS / "finite-four.yaml"), "--out", "csv"])
    header = [ln for ln in out.splitlines() if not ln.startswith("#")][0]
    assert status == 0 and header.startswith("axiom,x,y,z")
