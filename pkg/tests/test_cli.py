"""Command-line surface: exit codes, reports, machine blocks and file export."""

from __future__ import annotations

import io
import json
import re
from fractions import Fraction
from itertools import combinations

import pytest

from gptbridge import zoo
from gptbridge.cli import (EXIT_ERROR, EXIT_OK, EXIT_VIOLATED, MACHINE_MARKER, fmt_scalar, main,
                           parse_machine_block)
from gptbridge.contextual import exclusivity_graph, load_hypergraph, load_weight
from gptbridge.gpt import load_system, pair
from gptbridge.nonlocality import (Behavior, Event, deterministic_behavior, dump_behavior, load_behavior,
                                   locally_orthogonal)
from gptbridge.numerics.scalars import IntervalScalar, QuadraticScalar, from_json, sign
from gptbridge.orthograph import CAP_ENV_VAR

F = Fraction


def run(*argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {"pr": tmp_path / "pr.json", "c5": tmp_path / "c5.json", "sq": tmp_path / "sq.json",
             "p3": tmp_path / "p3.json", "p5": tmp_path / "p5.json"}
    assert run("zoo", "prbox", "-o", paths["pr"])[0] == EXIT_OK
    assert run("zoo", "pentagon", "-o", paths["c5"])[0] == EXIT_OK
    assert run("zoo", "squarebit", "-o", paths["sq"])[0] == EXIT_OK
    assert run("zoo", "polygon", "3", "-o", paths["p3"])[0] == EXIT_OK
    assert run("zoo", "polygon", "5", "-o", paths["p5"])[0] == EXIT_OK
    paths["c5w"] = tmp_path / "c5.weight.json"
    paths["dir"] = tmp_path
    return paths


def parse_events(label: str) -> tuple[Event, ...]:
    events = []
    for part in label.strip("()").split("; "):
        y, x = part.split("|")
        events.append(Event(tuple(map(int, x)), tuple(map(int, y))))
    return tuple(events)


def reverify_lo(report: dict, behavior) -> None:
    """Recompute the witness weight and local orthogonality from the machine block alone."""
    cliques = [parse_events(w) for w in report["witness"]]
    for a, b in combinations(cliques, 2):
        assert any(locally_orthogonal(e, f) for e, f in zip(a, b))
    total = sum((_product(behavior.p(e.y, e.x) for e in c) for c in cliques), F(0))
    assert fmt_scalar(total) == report["value"]
    assert report["satisfied"] == (sign(total - 1) <= 0)


def _product(values):
    out = F(1)
    for v in values:
        out *= v
    return out


class TestFormatting:
    def test_scalars(self):
        assert fmt_scalar(F(5, 4)) == "5/4"
        assert fmt_scalar(F(1)) == "1/1"
        assert "±" in fmt_scalar(IntervalScalar(F(1, 3), F(1, 3) + F(1, 10 ** 30)))
        assert "√2" in fmt_scalar(QuadraticScalar(1, 1, 2)) or "sqrt" in fmt_scalar(QuadraticScalar(1, 1, 2))

    def test_machine_block_requires_marker(self):
        with pytest.raises(ValueError):
            parse_machine_block("nothing here")


class TestCheckLo:
    def test_pr_box_level_two(self, files):
        code, out, _ = run("check-lo", files["pr"], "-k", "2")
        assert code == EXIT_VIOLATED
        m = parse_machine_block(out)
        assert m["command"][0] == "check-lo"
        r1, r2 = m["reports"]
        assert r1["satisfied"] and r1["value"] == "1/1"
        assert not r2["satisfied"] and r2["value"] == "5/4" and len(r2["witness"]) == 5
        assert "witness" in out.split(MACHINE_MARKER)[0]
        b = load_behavior(files["pr"].read_text())
        for r in m["reports"]:
            reverify_lo(r, b)

    def test_lifted_level_three_reverifies(self, files):
        code, out, _ = run("check-lo", files["pr"], "-k", "3")
        assert code == EXIT_VIOLATED
        r3 = parse_machine_block(out)["reports"][2]
        assert r3["engine"] == "lifted" and not r3["exact"]
        reverify_lo(r3, load_behavior(files["pr"].read_text()))

    def test_deterministic_level_three(self, tmp_path):
        path = tmp_path / "det.json"
        path.write_text(dump_behavior(deterministic_behavior((2, 2), (2, 2), [[0, 1], [1, 0]])))
        code, out, _ = run("check-lo", path, "-k", "3")
        assert code == EXIT_OK
        assert all(r["satisfied"] for r in parse_machine_block(out)["reports"])

    def test_first_violation_flag(self, files):
        code, out, _ = run("check-lo", files["pr"], "-k", "2", "--first-violation")
        assert code == EXIT_VIOLATED
        reverify_lo(parse_machine_block(out)["reports"][1], load_behavior(files["pr"].read_text()))

    def test_malformed_file_reports_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"inputs": [1],\n "outputs": [2] "table": {}}')
        code, out, err = run("check-lo", path)
        assert code == EXIT_ERROR and out == ""
        assert re.search(r"line 2, column \d+", err)

    def test_missing_file(self, tmp_path):
        code, _, err = run("check-lo", tmp_path / "absent.json")
        assert code == EXIT_ERROR and "cannot read" in err

    def test_vertex_cap(self, files, monkeypatch):
        code, _, err = run("check-lo", files["pr"], "-k", "2", "--max-vertices", "10", "--no-lift")
        assert code == EXIT_ERROR and "ResourceCapExceeded" in err
        monkeypatch.setenv(CAP_ENV_VAR, "10")
        assert run("check-lo", files["pr"], "-k", "2", "--no-lift")[0] == EXIT_ERROR

    def test_level_cap(self, files):
        code, _, err = run("check-lo", files["pr"], "-k", "4", "--no-lift")
        assert code == EXIT_ERROR and "cap" in err

    def test_bad_level(self, files):
        assert run("check-lo", files["pr"], "-k", "0")[0] == EXIT_ERROR


class TestCheckCe:
    def test_pentagon(self, files):
        code, out, _ = run("check-ce", files["c5"], files["c5w"], "-k", "1")
        assert code == EXIT_OK and parse_machine_block(out)["reports"][0]["value"] == "1/1"
        code, out, _ = run("check-ce", files["c5"], files["c5w"], "-k", "2")
        assert code == EXIT_VIOLATED
        r2 = parse_machine_block(out)["reports"][1]
        assert r2["value"] == "5/4"
        # re-verify: pairwise exclusive in some coordinate, weights multiply
        h = load_hypergraph(files["c5"].read_text())
        w = load_weight(files["c5w"].read_text(), h)
        g = exclusivity_graph(h)
        idx = {v: i for i, v in enumerate(h.vertices)}
        cliques = [w_.strip("()").split("; ") for w_ in r2["witness"]]
        for a, b in combinations(cliques, 2):
            assert any(g.has_edge(idx[u], idx[v]) for u, v in zip(a, b))
        assert sum((w[a] * w[b] for a, b in cliques), F(0)) == F(5, 4)

    def test_third_weight_names_edge(self, files, tmp_path):
        path = tmp_path / "third.json"
        path.write_text(json.dumps({str(i): "1/3" for i in range(5)}))
        code, _, err = run("check-ce", files["c5"], path)
        assert code == EXIT_ERROR and "hyperedge 0" in err


class TestCheckSo:
    def test_triangle(self, files):
        code, out, _ = run("check-so", files["p3"], "a0", "a1", "a2")
        assert code == EXIT_OK and parse_machine_block(out)["satisfied"]

    def test_pentagon_violation_reverifies(self, files):
        code, out, _ = run("check-so", files["p5"], "a0", "a3")
        assert code == EXIT_VIOLATED
        m = parse_machine_block(out)
        s = load_system(files["p5"].read_text())
        phi = s.state(s.state_names.index(m["witness"]["state"]))
        total = pair(s.effect(0), phi) + pair(s.effect(3), phi)
        assert sign(total - 1) > 0
        assert sign(from_json(m["witness"]["total_probability"]) - 1) > 0
        assert "witness state" in out

    def test_square_bit_all_four(self, files):
        code, _, err = run("check-so", files["sq"], "a1", "a2", "a3", "a4")
        assert code == EXIT_ERROR and "NonOrthogonalInput" in err

    def test_impure_effect(self, files):
        code, _, err = run("check-so", files["sq"], "u")
        assert code == EXIT_ERROR and "ImpureInput" in err

    def test_index_and_underscore_tokens(self, files):
        assert run("check-so", files["sq"], "0", "a_3")[0] == EXIT_OK

    def test_unknown_effect(self, files):
        assert run("check-so", files["sq"], "z9")[0] == EXIT_ERROR


class TestCheckNs:
    def test_pr_box(self, files):
        code, out, _ = run("check-ns", files["pr"])
        assert code == EXIT_OK and parse_machine_block(out)["satisfied"]

    def test_signalling(self, tmp_path):
        path = tmp_path / "sig.json"
        # Alice outputs Bob's input
        path.write_text(dump_behavior(Behavior.from_function((1, 2), (2, 1), lambda y, x: F(int(y[0] == x[1])))))
        code, out, _ = run("check-ns", path)
        assert code == EXIT_VIOLATED and parse_machine_block(out)["witness"]


class TestZoo:
    def test_square_bit_file(self, files):
        s = load_system(files["sq"].read_text())
        assert s.effect_names[:4] == ("a1", "a2", "a3", "a4")
        for y in range(4):
            assert pair(s.effect(y), s.state(y)) == 1
            assert pair(s.effect((y + 2) % 4), s.state(y)) == 0

    def test_polygon_five_intervals(self, files):
        s = load_system(files["p5"].read_text())
        assert not s.exact and any(isinstance(x, IntervalScalar) for x in s.pure_states[0])

    def test_polygon_exact_flag(self, tmp_path):
        path = tmp_path / "p5x.json"
        assert run("zoo", "polygon", "5", "--exact", "-o", path)[0] == EXIT_OK
        assert load_system(path.read_text()).exact

    def test_prbox_file(self, files):
        assert load_behavior(files["pr"].read_text()) == zoo.pr_box()

    def test_stdout_export(self):
        code, out, _ = run("zoo", "classical", "2")
        assert code == EXIT_OK
        tail = out.split(MACHINE_MARKER + "\n", 1)[1]
        block, _, dumped = tail.partition("\n}\n")
        assert load_system(dumped).dim == 2

    def test_unknown_model(self):
        code, _, err = run("zoo", "nonesuch")
        assert code == EXIT_ERROR and "unknown model" in err

    def test_missing_parameter(self):
        assert run("zoo", "polygon")[0] == EXIT_ERROR


class TestValidate:
    @pytest.mark.parametrize("key, kind", [("pr", "behavior"), ("sq", "system"), ("c5", "hypergraph")])
    def test_kinds(self, files, key, kind):
        code, out, _ = run("validate", files[key])
        assert code == EXIT_OK and parse_machine_block(out)["kind"] == kind

    def test_weight_needs_hypergraph(self, files):
        assert run("validate", files["c5w"])[0] == EXIT_ERROR
        code, out, _ = run("validate", files["c5w"], "--hypergraph", files["c5"])
        assert code == EXIT_OK and parse_machine_block(out)["kind"] == "weight"


def test_usage_error_exit_code():
    assert run("no-such-command")[0] == EXIT_ERROR
    assert run("--help")[0] == EXIT_OK
