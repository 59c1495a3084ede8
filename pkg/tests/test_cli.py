from __future__ import annotations

import json

import numpy as np
import pytest

from avoidant.cli import main
from avoidant.poly import Polynomial

TWO_DISC_CONFIG = {
    "problem": {
        "function": {"name": "exp", "shift": 3},
        "set": {"constructor": "disc_union", "samples_per_disc": 512,
                "discs": [{"center": [-1, 0], "radius": 0.9}, {"center": [1, 0], "radius": 0.9}]},
        "forbidden": {"kind": "explicit", "values": [[0, 0], [1, 0]]},
        "eps": 0.1,
        "mode": "theorem1_discs",
    },
    "seed": 3,
}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(TWO_DISC_CONFIG))
    return path


def test_approximate_writes_outputs(config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["approximate", "--config", str(config), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["schema"] == "avoidant-approx/1"
    assert report["certified"] is True
    assert report["seed"] == 3
    assert json.loads((out / "polynomial.json").read_text())["degree"] >= 1
    assert (out / "samples.csv").read_text().startswith("re,im,tag\n")
    assert json.loads(capsys.readouterr().out)["certified"] is True


def test_reports_are_deterministic(config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["approximate", "--config", str(config), "--out", str(a), "--keep-iterates"])
    main(["approximate", "--config", str(config), "--out", str(b), "--keep-iterates"])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert "iterates" in json.loads((a / "report.json").read_text())["avoid_report"]


def test_interior_violation_exits_one(tmp_path, capsys):
    cfg = json.loads(json.dumps(TWO_DISC_CONFIG))
    cfg["problem"]["function"] = {"name": "identity"}
    cfg["problem"]["set"]["discs"] = [{"center": [0, 0], "radius": 1}]
    cfg["problem"]["forbidden"]["values"] = [[0, 0]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert main(["approximate", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
    diag = json.loads(capsys.readouterr().out)
    assert diag["stage"] == "estimate_delta"
    assert (tmp_path / "o" / "error.json").exists()


def test_malformed_json_exits_two(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["approximate", "--config", str(path)]) == 2


def test_unknown_constructor_exits_two(tmp_path):
    cfg = json.loads(json.dumps(TWO_DISC_CONFIG))
    cfg["problem"]["set"] = {"constructor": "polygon"}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["approximate", "--config", str(path)]) == 2


def test_missing_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["approximate"])
    assert exc.value.code == 2


def _approximate(config, tmp_path):
    out = tmp_path / "out"
    assert main(["approximate", "--config", str(config), "--out", str(out)]) == 0
    return out / "polynomial.json"


def test_verify_dense_passes(config, tmp_path, capsys):
    poly = _approximate(config, tmp_path)
    capsys.readouterr()
    assert main(["verify", "--polynomial", str(poly), "--config", str(config), "--density", "10"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["passed"] and result["density"] == 10


def test_verify_catches_forbidden_value(config, tmp_path):
    poly = _approximate(config, tmp_path)
    p = Polynomial.from_json(json.loads(poly.read_text())["coeffs"])
    # shift p so that it takes the value 1 at the boundary point 0.1
    hit = p + (1 - p(0.1))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"coeffs": hit.to_json()}))
    assert main(["verify", "--polynomial", str(bad), "--config", str(config)]) == 1


def test_verify_tightened_eps_fails(config, tmp_path):
    poly = _approximate(config, tmp_path)
    assert main(["verify", "--polynomial", str(poly), "--config", str(config), "--eps", "1e-4"]) == 1


def test_demo_obstruction_defaults(tmp_path, capsys):
    out = tmp_path / "demo"
    assert main(["demo-obstruction", "--out", str(out)]) == 0
    report = json.loads((out / "obstruction.json").read_text())
    assert report["verdict"] == "obstructed"
    for name in ("gamma.csv", "loop.csv", "image.csv"):
        assert (out / name).exists()


def test_demo_obstruction_eps_above_guard():
    assert main(["demo-obstruction", "--eps", "0.5"]) == 2


def test_demo_obstruction_custom_points(capsys):
    assert main(["demo-obstruction", "--a1", "1,1", "--a2", "2+3i"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["a1"] == [1.0, 1.0] and data["a2"] == [2.0, 3.0]
    assert np.isclose(data["winding_difference"] ** 2, 1)
