from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gen import SIG, formula, rng_for, sentence
from pavelka.coding import (
    cantor_pair, cantor_unpair, encode_sentence, enumerate_sentences, farey_rational,
    farey_index,
)
from pavelka.parser import ParseError, parse_formula, to_sexpr
from pavelka.semantics import evaluate, random_structure
from pavelka.syntax import (
    Atom, Bottom, CaptureError, Const, Exists, Forall, Implies, NTimes, Not, Odot, Oplus, Rat,
    Signature, SignatureError, Similar, Var, elaborate, free_vars, is_core, substitute,
)

P = lambda t: Atom("P", (t,))  # noqa: E731
c, x, y = Const("c"), Var("x"), Var("y")
PSIG = Signature(("c", "d"), {}, {"P": 1, "Q": 1}, has_similarity=True)


class TestParse:
    def test_implication_with_rational(self):
        assert parse_formula("(-> (rat 1 3) (P c))", PSIG) == Implies(Rat(Fraction(1, 3)), P(c))

    def test_forall_similarity(self):
        assert parse_formula("(forall x (approx x x))", PSIG) == Forall("x", Similar(x, x))

    def test_arity_mismatch(self):
        with pytest.raises(ParseError):
            parse_formula("(P c d)", PSIG)

    def test_undeclared_symbol(self):
        with pytest.raises(ParseError):
            parse_formula("(Z c)", PSIG)

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as info:
            parse_formula("(-> (P c)\n  (P c d))", PSIG)
        assert info.value.pos is not None and info.value.pos[0] == 2

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6))
    def test_round_trip(self, seed):
        phi = formula(rng_for(seed), SIG, depth=4, sugar=True, free=("x",))
        assert parse_formula(to_sexpr(phi), SIG) == phi


class TestSubstitute:
    def test_under_binder(self):
        assert substitute(Forall("y", P(x)), "x", c) == Forall("y", P(c))

    def test_identity(self):
        assert substitute(P(x), "x", x) == P(x)

    def test_capture(self):
        with pytest.raises(CaptureError):
            substitute(Forall("y", P(x)), "x", y)

    def test_bound_occurrence_untouched(self):
        phi = Implies(P(x), Forall("x", P(x)))
        assert substitute(phi, "x", c) == Implies(P(c), Forall("x", P(x)))


class TestElaborate:
    def test_not(self):
        p = Atom("p")
        assert elaborate(Not(p)) == Implies(p, Bottom())

    def test_exists(self):
        body = P(x)
        neg = lambda f: Implies(f, Bottom())  # noqa: E731
        assert elaborate(Exists("x", body)) == neg(Forall("x", neg(body)))

    def test_ntimes_two_is_oplus(self):
        p = Atom("p")
        assert elaborate(NTimes(2, p)) == elaborate(Oplus(p, p))

    def test_odot_is_definable_form(self):
        # value max(x+y-1, 0); the displayed max(1-x-y, 0) disagrees
        sig = Signature((), {}, {"a": 0, "b": 0})
        a, b = Atom("a"), Atom("b")
        M = random_structure(sig, 1, 0)
        M = type(M)(M.universe, {}, {}, {"a": {(): Fraction(1, 5)}, "b": {(): Fraction(3, 10)}})
        assert evaluate(M, {}, elaborate(Odot(a, b))) == 0
        assert evaluate(M, {}, elaborate(Odot(Not(a), Not(b)))) == Fraction(1, 2)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**6))
    def test_core_and_value_preserving(self, seed):
        rng = rng_for(seed)
        phi = sentence(rng, SIG, depth=3, sugar=True)
        core = elaborate(phi)
        assert is_core(core)
        M = random_structure(SIG, rng.randint(1, 3), seed)
        assert evaluate(M, {}, core) == evaluate(M, {}, phi)


class TestFreeVars:
    def test_examples(self):
        R = Atom("R", (x, y))
        assert free_vars(Forall("x", R)) == {"y"}
        assert free_vars(Rat(Fraction(1, 2))) == set()
        assert free_vars(P(x)) == {"x"}


class TestSignature:
    def test_reserved_metric_name(self):
        with pytest.raises(SignatureError):
            Signature((), {}, {"d": 2})

    def test_fresh_namespace_reserved(self):
        with pytest.raises(SignatureError):
            Signature(("h0",))


class TestCoding:
    def test_first_sentence(self):
        assert enumerate_sentences(PSIG, 0) == Bottom()

    def test_decode_encode(self):
        phi = Forall("x", P(x))
        k = encode_sentence(PSIG, phi)
        assert enumerate_sentences(PSIG, k) == phi

    def test_bijective_prefix(self):
        seen = [enumerate_sentences(PSIG, k) for k in range(10_000)]
        assert len(set(seen)) == len(seen)
        for k in range(0, 10_000, 97):
            assert encode_sentence(PSIG, seen[k]) == k

    def test_sentences_are_closed(self):
        for k in range(500):
            assert not free_vars(enumerate_sentences(PSIG, k))

    @given(st.integers(0, 10**9), st.integers(0, 10**9))
    def test_cantor(self, a, b):
        assert cantor_unpair(cantor_pair(a, b)) == (a, b)

    def test_farey_order(self):
        head = [farey_rational(i) for i in range(7)]
        assert head == [0, 1, Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4),
                        Fraction(3, 4)]
        assert all(farey_index(farey_rational(i)) == i for i in range(300))
