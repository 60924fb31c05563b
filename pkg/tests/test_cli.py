import json
import subprocess
import sys

import pytest

from shelogic import cli
from shelogic.model import clique, parse_structure, serialize_structure


def call(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def k3_file(tmp_path):
    p = tmp_path / "k3.txt"
    p.write_text(serialize_structure(clique(3)))
    return str(p)


class TestLoad:
    def test_file_and_fixture_agree(self, k3_file):
        assert cli.load_structure(k3_file) == cli.load_structure("fixture:clique:3")

    def test_errors(self, capsys, tmp_path):
        assert call(capsys, "she", str(tmp_path / "missing"))[0] == 2
        assert call(capsys, "she", "fixture:petersen")[0] == 2
        assert call(capsys, "she", "fixture:clique:x")[0] == 2
        bad = tmp_path / "bad.txt"
        bad.write_text("domain 2\nrel E 2\n0 9\nend\n")
        code, _, err = call(capsys, "she", str(bad))
        assert code == 2 and "out of domain" in err


class TestShe:
    def test_k3(self, capsys, k3_file):
        code, out, _ = call(capsys, "she", k3_file)
        assert code == 0
        assert out == "shes: 6\ngenerators: (0|2|1) (1|0|2)\n"

    def test_nae_all(self, capsys):
        code, out, _ = call(capsys, "she", "fixture:nae:2", "--all")
        assert code == 0 and out.splitlines()[-2:] == ["(0|1)", "(1|0)"]

    def test_one_element(self, capsys, tmp_path):
        p = tmp_path / "one.txt"
        p.write_text("domain 1\nrel E 2\n0 0\nend\n")
        code, out, _ = call(capsys, "she", str(p), "--all")
        assert code == 0 and out.startswith("shes: 1\n") and out.endswith("(0)\n")

    def test_cap(self, capsys):
        assert call(capsys, "she", "fixture:clique:4", "--cap", "3")[0] == 2


class TestClassify:
    def test_k2_plus_k1(self, capsys):
        code, out, _ = call(capsys, "classify", "fixture:k2_plus_k1")
        assert code == 0
        assert out.splitlines()[0] == "NP-complete (theorem)"
        assert "A-shop: (0|1|012) (at 2)" in out

    def test_equality(self, capsys):
        code, out, _ = call(capsys, "classify", "fixture:clique:3", "--equality")
        assert out.splitlines()[0] == "PSPACE-complete (theorem)"

    def test_empty_four(self, capsys, tmp_path):
        p = tmp_path / "empty4.txt"
        p.write_text("domain 4\nrel E 2\nend\n")
        code, out, _ = call(capsys, "classify", str(p))
        assert code == 0 and out.startswith("Logspace (theorem)\n")

    def test_json(self, capsys):
        code, out, _ = call(capsys, "classify", "fixture:clique:3", "--json")
        rec = json.loads(out)
        assert rec["verdict"] == "PSPACE-complete"
        assert rec["hardness_evidence"] == "permutation subgroup"


class TestEval:
    def test_k3(self, capsys):
        code, out, _ = call(capsys, "eval", "fixture:clique:3", "forall u exists v E(u,v)", "--verify")
        assert code == 0
        assert out.splitlines()[0] == "value: true"
        assert "brute-force: true (agree)" in out

    def test_file(self, capsys, tmp_path):
        f = tmp_path / "phi.txt"
        f.write_text("exists u E(u,u)\n")
        code, out, _ = call(capsys, "eval", "fixture:clique:3", "--file", str(f))
        assert code == 0 and out.startswith("value: false\n")

    def test_engines_agree(self, capsys):
        sentences = ["forall u exists v E(u,v)", "exists u forall v (E(u,v) | E(v,u))",
                     "forall u forall v (E(u,v) | E(v,u) | exists w E(w,w))",
                     "exists u exists v (E(u,v) & E(v,u))"]
        for s in sentences:
            values = set()
            for engine in ("auto", "brute"):
                code, out, _ = call(capsys, "eval", "fixture:k2_plus_k1", s, "--engine", engine)
                assert code == 0
                values.add(out.splitlines()[0])
            assert len(values) == 1

    def test_auto_engine_named(self, capsys):
        code, out, _ = call(capsys, "eval", "fixture:k2_plus_k1", "forall u exists v E(u,v)")
        assert "engine: A_reduce" in out

    @pytest.mark.parametrize("argv", [
        ["fixture:clique:3", "E(x,y)"],
        ["fixture:clique:3"],
        ["fixture:clique:3", "exists u F(u)"],
        ["fixture:clique:3", "exists u E(u"],
        ["fixture:clique:3", "exists u E(u,u)", "--engine", "forall:0"],
        ["fixture:clique:3", "exists u E(u,u)", "--engine", "warp"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, out, err = call(capsys, "eval", *argv)
        assert code == 2 and err.startswith("shelogic: error:")

    def test_mismatch_exit(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "evaluate_bruteforce", lambda B, phi, env=None: False)
        code, out, _ = call(capsys, "eval", "fixture:clique:3", "forall u exists v E(u,v)", "--verify")
        assert code == 1 and "MISMATCH" in out


class TestLattice:
    def test_boolean(self, capsys):
        code, out, _ = call(capsys, "lattice", "2")
        lines = out.splitlines()
        assert lines[:2] == ["dsms: 5", "covers: 6"]
        assert "4\tsize=7\t<(01|01)>\tLogspace" in lines

    def test_three(self, capsys):
        code, out, _ = call(capsys, "lattice", "3")
        assert out.splitlines()[:2] == ["dsms: 115", "covers: 276"]

    def test_dot_stdout(self, capsys):
        code, out, _ = call(capsys, "lattice", "2", "--dot", "-")
        assert code == 0 and out.startswith("digraph")
        assert out.count("PSPACE-complete") == 2 and out.count("Logspace") == 3

    def test_dot_file(self, capsys, tmp_path):
        p = tmp_path / "l.dot"
        code, out, _ = call(capsys, "lattice", "2", "--dot", str(p))
        assert code == 0 and p.read_text().count("->") == 6
        assert out.startswith("dsms: 5")

    def test_cap(self, capsys):
        assert call(capsys, "lattice", "4")[0] == 2
        assert call(capsys, "lattice", "x")[0] == 2


class TestGalois:
    def test_k3(self, capsys, k3_file):
        code, out, _ = call(capsys, "galois", k3_file, "--samples", "40")
        assert code == 0 and out.endswith("result: pass\n")

    def test_reproducible(self, capsys):
        argv = ["galois", "fixture:k2_plus_k1", "--samples", "30", "--seed", "7"]
        assert call(capsys, *argv) == call(capsys, *argv)

    def test_arity_cap(self, capsys):
        code, _, err = call(capsys, "galois", "fixture:clique:3", "--max-arity", "3")
        assert code == 2 and "max_arity" in err
        assert call(capsys, "galois", "fixture:clique:4")[0] == 2
        assert call(capsys, "galois", "fixture:clique:3", "--max-arity", "0")[0] == 2

    def test_violation_exit(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "preserves", lambda f, k, tuples: False)
        code, out, _ = call(capsys, "galois", "fixture:clique:3", "--samples", "3")
        assert code == 1 and out.endswith("result: FAIL\n")


class TestQuotient:
    def test_k2(self, capsys):
        code, out, _ = call(capsys, "quotient", "fixture:multipartite:2,1", "--shop", "(01|01|2)")
        assert code == 0 and parse_structure(out) == clique(2)

    def test_identity(self, capsys, k3_file):
        code, out, _ = call(capsys, "quotient", k3_file, "--shop", "(0|1|2)")
        assert out == serialize_structure(clique(3))

    def test_output_file(self, capsys, tmp_path):
        p = tmp_path / "q.txt"
        code, out, _ = call(capsys, "quotient", "fixture:multipartite:2,1", "--shop", "(01|01|2)", "-o", str(p))
        assert code == 0 and parse_structure(p.read_text()) == clique(2)

    @pytest.mark.parametrize("shop", ["(01|1|2)", "(01|01)", "(0|1|3)", "nonsense"])
    def test_errors(self, capsys, shop):
        assert call(capsys, "quotient", "fixture:multipartite:2,1", "--shop", shop)[0] == 2


class TestMisc:
    def test_fixtures(self, capsys):
        code, out, _ = call(capsys, "fixtures")
        assert code == 0
        assert [line.split("\t")[0] for line in out.splitlines()] == [
            "clique", "k2_plus_k1", "multipartite", "nae"]

    def test_no_command(self, capsys):
        assert call(capsys)[0] == 2

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "shelogic", "classify", "fixture:nae:2"],
                           capture_output=True, text=True, check=False)
        assert r.returncode == 0 and r.stdout.startswith("PSPACE-complete (theorem)")
