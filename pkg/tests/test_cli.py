import json
import subprocess
import sys

import pytest

from snapmesh import data
from snapmesh.cli import main
from snapmesh.methods import GenerationMethod, register_method, unregister_method


def run(*argv):
    return main([str(a) for a in argv])


def config_copy(tmp_path, name="arena", **changes):
    doc = json.loads(data.bundled_config_path(name).read_text())
    doc["pieces_list"] = [str(data.data_dir() / "pieces" / "*.json")]
    method = changes.pop("method", None)
    if method:
        doc["method"].update(method)
    doc.update(changes)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_generate_writes_files(tmp_path):
    out, log, obj = tmp_path / "m.json", tmp_path / "m.log", tmp_path / "m.obj"
    assert run("generate", "--config", "arena", "--seed", 2, "--out", out, "--log", log, "--obj", obj) == 0
    doc = json.loads(out.read_text())
    assert doc["summary"]["piece_count"] == 13
    lines = log.read_text().splitlines()
    assert lines[0].startswith("STEP 0 |") and lines[-1].endswith("END(max_pieces)")
    assert obj.read_text().count("\no ") == 13


def test_generate_twice_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("generate", "--config", "branch", "--seed", 11, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_precedence(tmp_path, capsys):
    out = tmp_path / "m.json"
    run("generate", "--config", "arena", "--out", out)
    assert json.loads(out.read_text())["seed"] == -267402550
    run("generate", "--config", "arena", "--seed", 5, "--out", out)
    assert json.loads(out.read_text())["seed"] == 5
    cfg = config_copy(tmp_path, seed=None)
    run("generate", "--config", cfg, "--out", out)
    assert 0 <= json.loads(out.read_text())["seed"] <= 0x7FFFFFFF


def test_timing_flag(tmp_path):
    out = tmp_path / "m.json"
    run("generate", "--config", "arena", "--seed", 2, "--out", out, "--timing")
    assert json.loads(out.read_text())["summary"]["generation_ms"] > 0


def test_degenerate_map_exit_2(tmp_path):
    cfg = config_copy(tmp_path, method={"max_pieces": 0})
    assert run("generate", "--config", cfg, "--out", tmp_path / "m.json") == 2


def test_threshold_exit_3(tmp_path, capsys):
    out, report = tmp_path / "m.json", tmp_path / "r.json"
    code = run(
        "generate", "--config", "islands", "--out", out, "--report", report, "--min-armax", 0.90,
    )
    doc = json.loads(report.read_text())
    assert doc["a_r_max_pct"] < 90
    assert code == 3
    assert run("generate", "--config", "arena", "--seed", 2, "--out", out, "--min-cbar", 0.5) == 0


def test_no_walkable_exit_4(tmp_path):
    wall = {
        "id": "wall",
        "mesh": {
            "vertices": [[0, 0, 0], [4, 0, 0], [4, 3, 0], [0, 3, 0]],
            "triangles": [[0, 1, 2], [0, 2, 3]],
        },
        "connectors": [{"position": [4, 0, 0], "heading": [1, 0, 0]}, {"position": [0, 0, 0], "heading": [-1, 0, 0]}],
    }
    piece = tmp_path / "wall.json"
    piece.write_text(json.dumps(wall))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pieces_list": ["wall"], "seed": 1, "method": {"kind": "corridor", "max_pieces": 3}}))
    out = tmp_path / "m.json"
    code = run("generate", "--config", cfg, "--pieces", piece, "--out", out, "--validate")
    assert code == 4


def test_load_error_exit_1(tmp_path, capsys):
    assert run("generate", "--config", tmp_path / "missing.json", "--out", tmp_path / "m.json") == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run("generate", "--config", bad, "--out", tmp_path / "m.json") == 1
    assert "error" in capsys.readouterr().err


def test_validate_command(tmp_path, capsys):
    out = tmp_path / "m.json"
    run("generate", "--config", "arena", "--seed", 2, "--out", out)
    reports = []
    for i in range(2):
        rp = tmp_path / f"r{i}.json"
        assert run("validate", "--map", out, "--nav-seed", 7, "--report", rp) == 0
        doc = json.loads(rp.read_text())
        doc.pop("duration_s")
        reports.append(doc)
    assert reports[0] == reports[1]
    assert 0 <= reports[0]["c_bar_pct"] <= 100 and 0 <= reports[0]["a_r_max_pct"] <= 100
    assert reports[0]["n_points"] == 400 and reports[0]["nav_seed"] == 7


def test_export_command(tmp_path):
    out, obj = tmp_path / "m.json", tmp_path / "m.obj"
    run("generate", "--config", "arena", "--seed", 2, "--out", out, "--obj", tmp_path / "first.obj")
    assert run("export", "--map", out, "--obj", obj) == 0
    assert obj.read_bytes() == (tmp_path / "first.obj").read_bytes()


def test_methods_listing(capsys):
    assert run("methods") == 0
    names = [line.split(":")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["arena", "corridor", "star", "branch"]


class Probe(GenerationMethod):
    kind = "probe"

    def _next(self, placed, grew, rng):
        return self._end("done")


def test_methods_json_with_custom(capsys):
    register_method("probe", Probe)
    try:
        assert run("methods", "--json") == 0
        listing = json.loads(capsys.readouterr().out)
    finally:
        unregister_method("probe")
    assert [e["kind"] for e in listing] == ["arena", "corridor", "star", "branch", "probe"]
    assert "max_pieces" in listing[0]["params"]


@pytest.mark.slow
def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "snapmesh", "methods", "--json"], capture_output=True, text=True, check=True
    )
    assert len(json.loads(proc.stdout)) == 4
