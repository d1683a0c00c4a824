import cmath
import json
import math
from fractions import Fraction as F
from pathlib import Path

import pytest

from planefix import dendrite as dd
from planefix import lam
from planefix.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, run

DATA = Path(__file__).resolve().parents[1] / "data"


def d(name: str) -> str:
    return str(DATA / name)


def invoke(tmp_path, *argv, svg=True):
    out = tmp_path / "out.json"
    args = list(argv) + ["--out", str(out)]
    if svg:
        args += ["--svg", str(tmp_path / "out.svg")]
    code = run(args)
    return code, (json.loads(out.read_text()) if code == EXIT_OK else None)


@pytest.fixture
def shift_map(tmp_path) -> str:
    D = dd.path_dendrite([0, 1, 2])
    f = dd.TreeMap.from_function(dd.Subtree.of_edges(D, [0]), [(0, F(1, 2)), (1, F(3, 2))])
    p = tmp_path / "shift.json"
    p.write_text(json.dumps(f.to_json()))
    return str(p)


@pytest.fixture
def tent_map(tmp_path) -> str:
    D = dd.Dendrite(("0", "1/2", "1"), (("0", "1/2", F(1, 2)), ("1/2", "1", F(1, 2))))
    f = dd.TreeMap.from_function(dd.Subtree.whole(D), [(0, 0), (F(1, 2), 1), (1, 0)])
    p = tmp_path / "tent.json"
    p.write_text(json.dumps(f.to_json()))
    return str(p)


class TestExamples:
    def test_kp_locate_semi_disk(self, tmp_path):
        code, out = invoke(tmp_path, "kp", "locate", "--input", d("square.json"), "--point", "0,1.5")
        assert code == EXIT_OK
        el = out["element"]
        assert el["ball"] == {"kind": "halfplane", "normal": [0.0, 1.0], "point": [0.0, 1.0]}
        assert el["is_gap"] and el["contacts"] == [[[-1.0, 1.0], [1.0, 1.0]]]
        assert (tmp_path / "out.svg").read_text().lstrip().startswith("<?xml")

    def test_ivp1_shrink_negate(self, tmp_path):
        code, out = invoke(tmp_path, "ivp1", "--input", d("circle.json"), "--map", d("shrinkneg.json"))
        assert code == EXIT_OK
        assert (out["index"], out["variation"], out["identity"]) == (1, 0, True)

    def test_ray_one_third(self, tmp_path):
        code, out = invoke(tmp_path, "poly", "ray", "--map", d("zsq.json"), "--angle", "1/3", "--depth", "40")
        assert code == EXIT_OK and out["angle"] == "1/3"
        x, y = out["status"]["landed"]
        assert abs(complex(x, y) - cmath.exp(2j * math.pi / 3)) < 1e-6


class TestCommands:
    def test_kp_balls(self, tmp_path):
        code, out = invoke(tmp_path, "kp", "balls", "--input", d("square.json"))
        assert code == EXIT_OK and out["count"] == 5
        kinds = sorted(b["ball"]["kind"] for b in out["balls"])
        assert kinds == ["exterior"] + ["halfplane"] * 4

    def test_kp_partition(self, tmp_path):
        code, out = invoke(tmp_path, "kp", "partition", "--input", d("square.json"), "--samples", "60")
        assert code == EXIT_OK and out["ok"] and out["agreements"] == 60

    def test_schoenflies(self, tmp_path):
        code, out = invoke(tmp_path, "schoenflies", "--input", d("schoenflies.json"), "--samples", "25")
        assert code == EXIT_OK and out["injective"] and out["boundary_deviation"] < 1e-12

    def test_index_and_argcheck(self, tmp_path):
        assert invoke(tmp_path, "index", "--input", d("circle2.json"), "--map", d("zsq.json"))[1] == {"index": 2}
        code, out = invoke(tmp_path, "poly", "argcheck", "--map", d("zsq.json"), "--input", d("circle2.json"))
        assert out["holds"] and out["curve_index"] == out["sum_local"] == 2

    def test_variation(self, tmp_path):
        code, out = invoke(tmp_path, "variation", "--input", d("circle.json"), "--map", d("shrinkneg.json"))
        assert out == {"per_arc": [0, 0, 0], "variation": 0}

    def test_fixed_points(self, tmp_path):
        code, out = invoke(tmp_path, "fixed-points", "--map", d("zsq.json"))
        assert code == EXIT_OK and out["total_index"] == 2 and len(out["enclosures"]) == 2

    def test_poly_fixed_and_index(self, tmp_path):
        code, out = invoke(tmp_path, "poly", "fixed", "--map", d("zsq.json"))
        assert [r["class"] for r in out["fixed_points"]] == ["attracting", "repelling"]
        code, out = invoke(tmp_path, "poly", "index", "--map", d("parabolic.json"), "--point", "0,0", svg=False)
        assert out["local_index"] == 2

    def test_poly_scramble(self, tmp_path):
        code, out = invoke(tmp_path, "poly", "scramble", "--map", d("shrinkneg.json"), "--input", d("scramble.json"))
        assert code == EXIT_OK and out["verdict"] == "fails" and out["clause"] == "1"

    def test_lam_commands(self, tmp_path):
        code, out = invoke(tmp_path, "lam", "check", "--input", d("rabbit.json"))
        assert all(out["axioms"][k]["ok"] for k in ("E2", "D1", "D2", "D3"))
        code, out = invoke(tmp_path, "lam", "periodic", "--input", d("rabbit.json"))
        assert out["period"] == 3 and out["leaf"] == ["1/7", "2/7"]
        code, out = invoke(tmp_path, "lam", "quotient", "--input", d("airplane.json"))
        assert code == EXIT_OK and len(out["edges"]) == len(out["vertices"]) - 1

    def test_lam_quotient_with_depth(self, tmp_path):
        code, out = invoke(tmp_path, "lam", "quotient", "--input", d("rabbit.json"), "--depth", "2")
        assert code == EXIT_OK and len(out["edges"]) == len(out["vertices"]) - 1 == 12

    def test_lam_refine_round_trip(self, tmp_path):
        code, out = invoke(tmp_path, "lam", "refine", "--input", d("rabbit.json"), "--depth", "2")
        source = lam.FiniteLamination.from_json(json.loads(Path(d("rabbit.json")).read_text()))
        assert lam.FiniteLamination.from_json(out["lamination"]) == lam.refine(source, 2)

    def test_dendrite_commands(self, tmp_path, shift_map, tent_map):
        code, out = invoke(tmp_path, "dendrite", "fix", "--input", shift_map)
        assert code == EXIT_OK and out["point"] is None and out["reason"] == "certified-none"
        code, out = invoke(tmp_path, "dendrite", "scramble", "--input", shift_map)
        assert out == {"scrambles": False, "witness": {"vertex": "1"}}
        code, out = invoke(tmp_path, "dendrite", "cutpoints", "--input", tent_map, "--depth", "2")
        assert sorted(p["period"] for p in out["cutpoints"]) == [1, 2, 2]

    def test_dendrite_map_round_trip(self, shift_map):
        data = json.loads(Path(shift_map).read_text())
        assert dd.TreeMap.from_json(data).to_json() == data


class TestExitCodes:
    def test_missing_input_flag(self, tmp_path):
        assert invoke(tmp_path, "kp", "balls")[0] == EXIT_INVALID

    def test_missing_file(self, tmp_path):
        assert invoke(tmp_path, "kp", "balls", "--input", str(tmp_path / "nope.json"))[0] == EXIT_INVALID

    def test_unknown_flag(self, tmp_path):
        assert run(["kp", "balls", "--input", d("square.json"), "--frobnicate"]) == EXIT_INVALID

    def test_unknown_command(self):
        assert run(["teleport"]) == EXIT_INVALID

    def test_bad_angle(self, tmp_path):
        assert invoke(tmp_path, "poly", "ray", "--map", d("zsq.json"), "--angle", "x")[0] == EXIT_INVALID

    def test_point_not_fixed(self, tmp_path):
        assert invoke(tmp_path, "poly", "index", "--map", d("zsq.json"), "--point", "0.5,0")[0] == EXIT_INVALID

    def test_not_refined_lamination(self, tmp_path):
        assert invoke(tmp_path, "lam", "quotient", "--input", d("leaf.json"))[0] == EXIT_INVALID

    def test_branch_ambiguity_is_numerical(self, tmp_path):
        m = tmp_path / "cantor.json"
        m.write_text(json.dumps({"coeffs": [[1, 0], [0, 0], [1, 0]]}))
        assert invoke(tmp_path, "poly", "ray", "--map", str(m), "--angle", "1/2")[0] == EXIT_NUMERICAL

    def test_help(self):
        assert run(["--help"]) == EXIT_OK


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["kp", "partition", "--input", d("square.json"), "--samples", "40", "--seed", "3"],
        ["schoenflies", "--input", d("schoenflies.json"), "--samples", "15"],
        ["poly", "ray", "--map", d("chebyshev.json"), "--angle", "1/5"],
        ["lam", "quotient", "--input", d("airplane.json")],
    ])
    def test_byte_identical(self, tmp_path, argv):
        runs = []
        for k in range(2):
            out, svg = tmp_path / f"o{k}.json", tmp_path / f"o{k}.svg"
            assert run(argv + ["--out", str(out), "--svg", str(svg)]) == EXIT_OK
            runs.append((out.read_bytes(), svg.read_bytes()))
        assert runs[0] == runs[1]

    def test_other_seeds_also_agree(self, tmp_path):
        a = invoke(tmp_path, "kp", "partition", "--input", d("square.json"), "--samples", "10", "--seed", "1")[1]
        b = invoke(tmp_path, "kp", "partition", "--input", d("square.json"), "--samples", "10", "--seed", "2")[1]
        assert a["ok"] and b["ok"]

    def test_stdout_when_no_out(self, capsys):
        assert run(["lam", "periodic", "--input", d("leaf.json")]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["period"] == 1
