import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from gen import SIG, formula, rng_for, sentence
from pavelka.errors import UncoveredVariable
from pavelka.moduli import Modulus
from pavelka.parser import parse_formula
from pavelka.semantics import (
    FiniteStructure, check_moduli, evaluate, is_pseudometric, max_falsity, models,
    parse_structure, print_structure, random_structure, sentence_value,
)
from pavelka.syntax import (
    Atom, Const, Exists, Forall, Implies, Signature, Var, elaborate, substitute,
)

TWO = FiniteStructure(("a", "b"), {"c": "a"}, {}, {"P": {("a",): F(0), ("b",): F(1, 2)}})


def test_implication_value():
    M = FiniteStructure(("a",), {}, {}, {"p": {(): F(3, 10)}, "q": {(): F(7, 10)}})
    assert evaluate(M, {}, Implies(Atom("p"), Atom("q"))) == F(2, 5)


def test_quantifiers_on_two_elements():
    x = Var("x")
    assert sentence_value(TWO, Forall("x", Atom("P", (x,)))) == F(1, 2)
    assert sentence_value(TWO, Exists("x", Atom("P", (x,)))) == 0


def test_uncovered_variable():
    with pytest.raises(UncoveredVariable):
        evaluate(TWO, {}, Atom("P", (Var("x"),)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_self_implication_true(seed):
    rng = rng_for(seed)
    phi = sentence(rng, SIG, 3, sugar=True)
    M = random_structure(SIG, rng.randint(1, 3), seed)
    assert sentence_value(M, Implies(phi, phi)) == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_forall_bounds_instances(seed):
    rng = rng_for(seed)
    body = formula(rng, SIG, 3, free=("x",))
    M = random_structure(SIG, rng.randint(1, 3), seed)
    whole = sentence_value(M, Forall("x", body))
    for cname in SIG.constants:
        try:
            inst = substitute(body, "x", Const(cname))
        except Exception:
            continue
        assert whole >= sentence_value(M, inst)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_vectorised_matches_pointwise(seed):
    rng = rng_for(seed)
    phi = elaborate(formula(rng, SIG, 3, free=("x", "y")))
    M = random_structure(SIG, rng.randint(1, 3), seed)
    brute = max(evaluate(M, {"x": a, "y": b}, phi) for a in M.universe for b in M.universe)
    assert max_falsity(M, phi)[0] == brute


def test_power_implication_disjunction_law():
    # min of the n-th powers of the two implications is always 0
    sig = Signature((), {}, {"a": 0, "b": 0})
    law = {n: parse_formula(f"(or (npower {n} (-> a b)) (npower {n} (-> b a)))", sig)
           for n in (1, 2, 3)}
    grid = [F(k, 12) for k in range(13)]
    for u, v in itertools.product(grid, repeat=2):
        M = FiniteStructure(("o",), {}, {}, {"a": {(): u}, "b": {(): v}})
        for n in (1, 2, 3):
            assert sentence_value(M, law[n]) == 0


class TestModels:
    def test_trivial_theory(self):
        phi = Atom("P", (Const("c"),))
        assert models(TWO, [Implies(phi, phi)]).ok

    def test_worst_axiom_reported(self):
        bad = Forall("x", Atom("P", (Var("x"),)))
        res = models(TWO, [Atom("P", (Const("c"),)), bad])
        assert not res.ok and res.worst_axiom == bad and res.falsity == F(1, 2)


class TestModuli:
    LIP = FiniteStructure(("u", "v", "w"), {}, {}, {"P": {("u",): 0, ("v",): F(1, 4),
                                                          ("w",): F(1, 2)}},
                          {(a, b): F(abs(i - j), 4) for i, a in enumerate("uvw")
                           for j, b in enumerate("uvw")})

    def test_lipschitz_ok(self):
        assert check_moduli(self.LIP, {"P": Modulus.lipschitz(1)}).ok

    def test_jump_reported(self):
        rels = {"P": {("u",): 0, ("v",): 1, ("w",): 1}}
        M = FiniteStructure(self.LIP.universe, {}, {}, rels, self.LIP.metric)
        res = check_moduli(M, {"P": Modulus.lipschitz(1)})
        assert not res.ok
        assert (res.eps, res.q, res.r) == (F(1, 2), F(3, 8), F(5, 8))

    def test_empty(self):
        assert check_moduli(self.LIP, {}).ok


class TestRandomStructure:
    def test_deterministic(self):
        assert random_structure(SIG, 3, 42) == random_structure(SIG, 3, 42)

    def test_size_one_quantifier_degenerates(self):
        M = random_structure(SIG, 1, 7)
        body = Atom("P", (Var("x"),))
        assert sentence_value(M, Forall("x", body)) == evaluate(M, {"x": M.universe[0]}, body)

    def test_similarity_tables_are_pseudometrics(self):
        for seed in range(100):
            M = random_structure(SIG, 1 + seed % 4, seed)
            assert is_pseudometric(M.metric, M.universe)


def test_structure_file_round_trip():
    text = print_structure(TestModuli.LIP)
    assert parse_structure(text) == TestModuli.LIP
