import io
import json
import subprocess
import sys

import pytest

from conftest import DATA
from pavelka.cli import main
from pavelka.kernel import TheoryHandle, check_proof, parse_proof
from pavelka.parser import parse_theory


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def d(name):
    return DATA / name


class TestExamples:
    def test_degree_toy(self, capsys):
        code, out, _ = run(capsys, "degree", d("toy.thy"), "(P c)", "--precision", "1/100")
        assert code == 0 and out.splitlines()[-1] == "1/3 1/3"

    def test_eval(self, capsys):
        code, out, _ = run(capsys, "eval", d("two.str"), "(forall x (P x))")
        assert (code, out) == (0, "1/2\n")

    def test_broken_proof(self, capsys):
        code, out, _ = run(capsys, "check", d("pq.thy"), d("bad.prf"))
        assert code == 3 and out.startswith("invalid-step 2")


class TestCommands:
    def test_prove_certificate_rechecks(self, capsys, tmp_path):
        code, out, _ = run(capsys, "prove", d("pq.thy"), "q", "--certificate")
        assert code == 0
        text = out.split("\n", 1)[1]
        T = TheoryHandle.from_file(parse_theory(d("pq.thy").read_text()))
        prf = tmp_path / "q.prf"
        prf.write_text(text)
        code, out, _ = run(capsys, "check", d("pq.thy"), prf)
        assert code == 0 and out.strip() == "(q)"
        assert check_proof(parse_proof(text, T.signature), T)

    def test_compare(self, capsys):
        code, out, _ = run(capsys, "compare", d("pq.thy"), "q", "p")
        assert code == 0 and out.split()[0] == "LE"

    def test_decide(self, capsys):
        assert run(capsys, "decide", d("pq.thy"), "q")[0] == 0
        code, out, _ = run(capsys, "decide", d("pq.thy"), "(not q)")
        assert code == 1 and out.startswith("false")

    def test_models(self, capsys):
        code, out, _ = run(capsys, "models", d("toy.str"), d("toy.thy"))
        assert (code, out.strip()) == (0, "yes")

    def test_models_uninterpreted_symbols(self, capsys):
        code, _, err = run(capsys, "models", d("two.str"), d("pq.thy"))
        assert code == 3 and "does not interpret" in err

    def test_models_negative(self, capsys):
        code, out, _ = run(capsys, "models", d("two.str"), d("toy.thy"))
        assert code == 1 and out.startswith("no")

    def test_check_moduli(self, capsys):
        assert run(capsys, "check-moduli", d("lip3.str"), d("lip.thy"))[0] == 0
        code, out, _ = run(capsys, "check-moduli", d("broken3.str"), d("lip.thy"))
        assert code == 1 and "P" in out

    def test_extract(self, capsys):
        assert run(capsys, "extract", d("classical.thy"), "q")[1].strip() == "true"
        code, out, _ = run(capsys, "extract", d("classical.thy"), "(not p)")
        assert (code, out.strip()) == (1, "false")

    def test_erratum(self, capsys):
        code, out, _ = run(capsys, "degree", d("toy.thy"), "(P c)", "--erratum")
        lines = out.splitlines()
        assert code == 1 and lines[:2] == ["0/1 1/1", "0/1 0/1"]
        assert lines[-1].startswith("inconsistent-stream")

    def test_henkin_build_query(self, capsys, tmp_path, monkeypatch):
        ext, trace, man = tmp_path / "ext.thy", tmp_path / "trace.jsonl", tmp_path / "m.json"
        code, out, _ = run(capsys, "henkin", d("toy_henkin.thy"), "--steps", 200,
                           "--oracle", f"model:{d('toy.str')}", "--out", ext, "--trace", trace)
        assert code == 0 and out.strip().endswith("h0")
        assert "(fresh)" in ext.read_text()
        assert all(json.loads(line)["action"] in ("added", "witness", "skipped")
                   for line in trace.read_text().splitlines())
        code, out, _ = run(capsys, "build", ext, "--out", man)
        assert (code, out.strip()) == (0, "universe c h0")
        monkeypatch.setattr(sys, "stdin", io.StringIO("(approx h0 h0)\n(P c)\n"))
        code, out, _ = run(capsys, "query", man, "--precision", "1/32")
        blocks = out.split(".\n")
        assert code == 0 and blocks[0].splitlines()[-1] == "0/1 0/1"
        assert blocks[1].splitlines()[-1] == "1/3 1/3"

    def test_reduce_cl(self, capsys):
        code, out, _ = run(capsys, "reduce-cl", d("lip.thy"), "--max-den", 3)
        assert code == 0 and "UL P i=0 eps=1/2 q=1/3 r=2/3" in out
        parse_theory(out)

    def test_enum_theorems(self, capsys):
        code, out, _ = run(capsys, "enum-theorems", d("pq.thy"), "--budget", 20)
        lines = out.splitlines()
        assert lines and lines[0].split()[0] == "0"

    def test_parse_round_trip(self, capsys):
        code, out, _ = run(capsys, "parse", d("toy.thy"))
        assert code == 0 and parse_theory(out) == parse_theory(d("toy.thy").read_text())


class TestErrorsAndFormats:
    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "eval", d("nope.str"), "(P c)")
        assert code == 3 and err.startswith("error:")

    def test_parse_error_has_position(self, capsys):
        code, _, err = run(capsys, "eval", d("two.str"), "(P c")
        assert code == 3 and "1:1" in err

    def test_usage_error_is_input_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["degree", str(d("toy.thy"))])
        assert info.value.code == 3

    def test_json_lines(self, capsys):
        code, out, _ = run(capsys, "--json", "degree", d("toy.thy"), "(P c)")
        recs = [json.loads(line) for line in out.splitlines()]
        assert recs[-1] == {"kind": "interval", "lo": "1/3", "hi": "1/3"}

    def test_budget_exhaustion(self, capsys):
        code, _, _ = run(capsys, "prove", d("pq.thy"), "(not p)", "--budget", 5)
        assert code == 2

    def test_env_budget(self, capsys, monkeypatch):
        monkeypatch.setenv("PAVELKA_DEFAULT_BUDGET", "5")
        assert run(capsys, "prove", d("pq.thy"), "(not p)")[0] == 2

    def test_deterministic(self, capsys):
        a = run(capsys, "enum-theorems", d("pq.thy"), "--budget", 30)
        b = run(capsys, "enum-theorems", d("pq.thy"), "--budget", 30)
        assert a == b


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "pavelka.cli", "eval", str(d("two.str")),
                          "(forall x (P x))"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "1/2\n"
