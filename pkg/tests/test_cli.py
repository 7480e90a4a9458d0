import json
import subprocess
import sys

import jsonschema
import pytest

from fodeflab.cli import main
from fodeflab.schemas import SCHEMAS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, schema, *argv):
    code, out = run(capsys, *argv)
    assert code == 0, out
    data = json.loads(out)
    jsonschema.validate(data, SCHEMAS[schema])
    return data


def test_check(capsys):
    data = run_json(capsys, "check", "check", "K3",
                    "(exists x (exists y (and (adj x y) (not (= x y)))))")
    assert data["holds"] is True


def test_check_from_files(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"n": 2, "edges": []}))
    f = tmp_path / "f.txt"
    f.write_text("(exists x (exists y (adj x y)))\n")
    assert run_json(capsys, "check", "check", str(g), str(f))["holds"] is False


def test_measure_and_prenex(capsys):
    data = run_json(capsys, "measure", "measure", "(exists x (forall y (= x y)))")
    assert (data["qr"], data["alt"]) == (2, 1)
    data = run_json(capsys, "prenex", "prenex",
                    "(and (exists x (adj x x)) (forall y (= y y)))")
    assert data["prenex"].startswith("(exists") or data["prenex"].startswith("(forall")


def test_dgame(capsys):
    data = run_json(capsys, "dgame", "dgame", "C4", "P4")
    assert data["D"] >= 1 and len(data["trace"]) <= data["D"]
    data = run_json(capsys, "dgame", "dgame", "C4", "P4", "--alt", "0")
    assert data["alt"] == 0


def test_define(capsys):
    data = run_json(capsys, "define", "define", "P3", "--bound", "4")
    assert data["certificate"]["order_bound"] == 4
    data = run_json(capsys, "define", "define", "P2", "--naive")
    assert data["k"] == 3


def test_tree_commands(capsys, tmp_path):
    data = run_json(capsys, "tree_gen", "tree", "gen", "--catalog", "2")
    assert data["M"][2] == 4
    data = run_json(capsys, "tree_gen", "tree", "gen", "--diverging", "--depth", "3",
                    "--order", "7")
    assert data["kind"] == "diverging-rooted"
    data = run_json(capsys, "tree_gen", "tree", "gen", "--diverging", "--depth", "2",
                    "--order", "8", "--free")
    path = tmp_path / "t.json"
    path.write_text(json.dumps(data["trees"][0]))
    check = run_json(capsys, "tree_check", "tree", "check", str(path))
    assert check["diverging"] and check["radius"] == 3
    data = run_json(capsys, "tree_gen", "tree", "gen", "--ranked", "0")
    assert data["size"] == 4
    star = tmp_path / "s.json"
    star.write_text(json.dumps({"parent": [-1] + [0] * 8, "root": 0}))
    data = run_json(capsys, "tree_minimize", "tree", "minimize", str(star), "--k", "2")
    assert data["order_after"] == 3


def test_tm_commands(capsys, tmp_path):
    data = run_json(capsys, "tm_run", "tm", "run", "m2")
    assert data["m"] == 2
    out = tmp_path / "a.txt"
    data = run_json(capsys, "tm_compile", "tm", "compile", "m1", "--out", str(out))
    assert data["qr"] == 18 and out.read_text().startswith("(")
    data = run_json(capsys, "tm_prenex", "tm", "prenex", "m1")
    assert data["alternations"] == 3
    data = run_json(capsys, "tm_model", "tm", "model", "m1")
    assert data["graph"]["n"] == 24
    data = run_json(capsys, "tm_verify", "tm", "verify", "m1", "--samples", "5")
    assert data["ok"]


def test_succinct_commands(capsys):
    data = run_json(capsys, "succinct_table", "succinct", "table", "--n-max", "3", "--bound", "4")
    assert [r["q_hat"] for r in data["rows"]] == [2, 3, 3]
    code, out = run(capsys, "succinct", "table", "--n-max", "2", "--bound", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("n,classes,q_hat")
    data = run_json(capsys, "succinct_bounds", "succinct", "bounds", "--k", "2")
    assert data["k"] == 2


def test_universal_commands(capsys, tmp_path):
    data = run_json(capsys, "universal_build", "universal", "build", "--m", "2")
    assert data["size"] == 40
    data = run_json(capsys, "universal_apply", "universal", "apply", "--graph", "K1",
                    "--bound", "4")
    assert data["found"]
    data = run_json(capsys, "universal_check", "universal", "apply", "--sample", "5",
                    "--seed", "3")
    assert data["ok"] and data["checked"] == 5
    f = tmp_path / "s.txt"
    f.write_text("# one sentence\n(exists x (exists y (adj x y)))\n")
    data = run_json(capsys, "universal_check", "universal", "apply", "--formulas", str(f))
    assert data["ok"]


def test_play_with_replay(capsys, tmp_path):
    replay = tmp_path / "r.json"
    replay.write_text(json.dumps({"inputs": ["0 0", "0 1"]}))
    record = tmp_path / "rec.json"
    data = run_json(capsys, "play", "play", "K2", "E2", "--k", "2", "--role", "spoiler",
                    "--replay", str(replay), "--record", str(record))
    assert data["winner"] == "spoiler"
    assert json.loads(record.read_text())["inputs"] == ["0 0", "0 1"]


def test_play_as_duplicator(capsys, tmp_path):
    replay = tmp_path / "r.json"
    replay.write_text(json.dumps({"inputs": ["0", "1", "2"]}))
    data = run_json(capsys, "play", "play", "P3", "P3", "--k", "1", "--role", "duplicator",
                    "--replay", str(replay))
    assert data["winner"] == "duplicator" and len(data["moves"]) == 1


@pytest.mark.parametrize("argv,code", [
    (["check", "K3", "(exists x"], 2),
    (["check", "Q7", "(exists x (= x x))"], 2),
    (["dgame", "K3"], 2),
    (["succinct", "table", "--n-max", "6", "--bound", "9"], 3),
    (["universal", "build", "--m", "3"], 3),
    (["tm", "run", "loop", "--max-steps", "10"], 3),
    (["tree", "gen", "--diverging", "--depth", "3", "--order", "12"], 2),
    (["measure", "(exists x (= x x))", "--format", "csv"], 2),
])
def test_error_exit_codes(capsys, argv, code):
    got, out = run(capsys, *argv)
    assert got == code
    jsonschema.validate(json.loads(out), SCHEMAS["error"])


def test_text_format(capsys):
    code, out = run(capsys, "measure", "(exists x (= x x))", "--format", "text")
    assert code == 0 and "qr: 1" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fodeflab", "measure", "(exists x (= x x))"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["qr"] == 1
