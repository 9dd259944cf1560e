import itertools
import random
from fractions import Fraction as F

import pytest

from gen import all_sentences, ground_sentence, toy_henkin
from pavelka.clbridge import classicalize
from pavelka.domains import FormalBall, RatInterval, interval_op, refine
from pavelka.errors import EmptyConstantSet, FlagViolation, OracleContradiction
from pavelka.henkin import (
    BudgetedOracle, CompletionPoint, SemanticOracle, as_existential, build_model,
    classical_extract, complete_metric_model, extend, interpret_function, model_degree,
)
from pavelka.kernel import TheoryHandle
from pavelka.search import SearchBudget, degree_stream
from pavelka.semantics import FiniteStructure, sentence_value
from pavelka.syntax import (
    App, Atom, Const, Exists, Forall, Implies, Not, Rat, Signature, Similar, Var, elaborate,
    substitute,
)

c, x = Const("c"), Var("x")


@pytest.fixture(scope="module")
def toy():
    return toy_henkin()


class TestExtension:
    def test_one_witness_per_existential(self, toy):
        T2, trace, M, _ = toy
        assert trace.fresh_constants() == ["h0"]
        assert {"henkin", "linear_complete"} <= T2.flags
        assert trace.sound and trace.provenance == "semantic"

    def test_additions_true_in_reference(self, toy):
        T2, trace, _, ref = toy
        ref = ref.with_constants({"h0": "a"})
        for phi in trace.additions():
            assert sentence_value(ref, phi) == 0

    def test_as_existential(self):
        body = Atom("P", (x,))
        assert as_existential(elaborate(Exists("x", body))) == ("x", body)
        assert as_existential(body) is None

    def test_zero_steps_is_identity(self):
        T = TheoryHandle(Signature(("c",), {}, {"P": 1}))
        ref = FiniteStructure(("a",), {"c": "a"}, {}, {"P": {("a",): F(0)}})
        T2, trace = extend(T, SemanticOracle(ref), 0)
        assert T2 is T and len(trace) == 0

    def test_budgeted_oracle_tagged_unsound(self):
        sig = Signature(("c",), {}, {"P": 1})
        T = TheoryHandle(sig, (Atom("P", (c,)),))
        T2, trace = extend(T, BudgetedOracle(SearchBudget(max_steps=2, max_candidates=20)), 6)
        assert not trace.sound and "potentially-unsound" in T2.provenance

    def test_audit_catches_lying_oracle(self):
        class Liar(SemanticOracle):
            def query(self, stage, phi, psi):
                return "certainly-unprovable"

        sig = Signature((), {}, {"p": 0})
        T = TheoryHandle(sig, (Atom("p"),))
        ref = FiniteStructure(("a",), {}, {}, {"p": {(): F(0)}})
        with pytest.raises(OracleContradiction):
            extend(T, Liar(ref), 50, seeds=[Atom("p"), Implies(Atom("p"), Atom("p"))],
                   audit=SearchBudget(max_steps=3, max_candidates=200))


class TestTermModel:
    def test_universe(self, toy):
        assert toy[2].universe == ("c", "h0")

    def test_diagonal_zero(self, toy):
        M = toy[2]
        for a in M.universe:
            assert refine(M.rho(a, a), F(1, 64), 50) == RatInterval(0, 0)

    def test_witness_degree(self, toy):
        M = toy[2]
        iv = refine(model_degree(M, Atom("P", (Const("h0"),))), F(1, 32), 200)
        assert iv.contains(F(1, 3))

    def test_agrees_with_degree_stream(self, toy):
        T2, _, M, _ = toy
        rng = random.Random(5)
        for _ in range(20):
            phi = ground_sentence(rng, M.universe)
            a = refine(model_degree(M, phi), F(1, 32), 400)
            b = refine(degree_stream(T2, phi), F(1, 32), 400)
            assert a.intersect(b) is not None

    def test_forall_is_max_stepwise(self, toy):
        M = toy[2]
        body = Implies(Atom("P", (x,)), Similar(x, c))
        whole = model_degree(M, Forall("x", body))
        parts = [model_degree(M, substitute(body, "x", Const(u))) for u in M.universe]
        for _ in range(30):
            try:
                iv = next(whole)
            except StopIteration:
                break
            cur = [next(p, p.current) if not p.finished else p.current for p in parts]
            expect = cur[0]
            for other in cur[1:]:
                expect = interval_op("max", expect, other)
            assert iv == expect

    def test_flags_required(self):
        T = TheoryHandle(Signature(("c",), {}, {"P": 1}))
        with pytest.raises(FlagViolation):
            build_model(T)

    def test_empty_universe(self):
        T = TheoryHandle(Signature((), {}, {"p": 0}))
        with pytest.raises(EmptyConstantSet):
            build_model(T, check_flags=False)

    def test_open_formula_rejected(self, toy):
        with pytest.raises(ValueError):
            model_degree(toy[2], Atom("P", (x,)))


class TestFunctions:
    def test_interpretation_found(self):
        sig = Signature(("a", "b"), {"f": 1}, {}, has_similarity=True)
        fa = App("f", (Const("a"),))
        T = TheoryHandle(sig, (Similar(fa, Const("b")),), packs={"S"})
        M = build_model(T, check_flags=False)
        assert interpret_function(M, "f", ["a"]) == "b"

    def test_undeclared(self):
        sig = Signature(("a",), {}, {}, has_similarity=True)
        M = build_model(TheoryHandle(sig), check_flags=False)
        with pytest.raises(ValueError):
            interpret_function(M, "g", ["a"])


class TestClassical:
    SIG = Signature(("k0", "k1"), {}, {"P": 1}, has_similarity=True)

    def diagram(self, M):
        lits = [Atom("P", (Const(k),)) for k in M.consts]
        lits += [Similar(Const(a), Const(b)) for a, b in itertools.product(M.consts, repeat=2)]
        ax = tuple(lit if sentence_value(M, lit) == 0 else Not(lit) for lit in lits)
        return classicalize(TheoryHandle(self.SIG, ax, packs={"S"}, flags={"consistent"}))

    def test_agrees_with_model(self):
        M = FiniteStructure(("u", "v"), {"k0": "u", "k1": "v"}, {},
                            {"P": {("u",): F(0), ("v",): F(1)}},
                            {(a, b): F(int(a != b)) for a in "uv" for b in "uv"})
        H = build_model(self.diagram(M), check_flags=False)
        for phi in itertools.islice(all_sentences(self.SIG, 6), 150):
            assert classical_extract(H, phi) == (sentence_value(M, phi) == 0)

    def test_requires_classical_theory(self, toy):
        with pytest.raises(FlagViolation):
            classical_extract(toy[2], Atom("P", (c,)))


class TestCompletion:
    def test_embedded_distance(self, toy):
        C = complete_metric_model(toy[2])
        d = C.distance(C.embed("c"), C.embed("c"))
        assert refine(d, F(1, 64), 50) == RatInterval(0, 0)

    def test_embedded_point_accepted(self, toy):
        C = complete_metric_model(toy[2])
        assert C.accepts(CompletionPoint.embed("c"), 4)

    def test_bad_chain_rejected(self, toy):
        C = complete_metric_model(toy[2])
        assert not C.accepts(CompletionPoint.of([FormalBall("c", F(1, 4)),
                                                 FormalBall("c", F(1, 2))]), 2)

    def test_requires_metric(self):
        T = TheoryHandle(Signature(("c",), {}, {"P": 1}))
        with pytest.raises(ValueError):
            complete_metric_model(build_model(T, check_flags=False))

    def test_rational_degree(self, toy):
        assert refine(model_degree(toy[2], Rat(F(1, 2))), F(1, 8), 1) == RatInterval(F(1, 2),
                                                                                       F(1, 2))
