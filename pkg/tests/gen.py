"""Random formula and theory generators shared by the tests."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from fractions import Fraction

from pavelka.syntax import (
    And, Atom, Bottom, Const, Exists, Forall, Iff, Implies, Not, NPower, NTimes, Odot, Oplus,
    Or, Rat, Signature, Similar, TruncSub, Var,
)

SIG = Signature(("c", "e"), {}, {"P": 1, "Q": 1, "R": 2, "p": 0}, has_similarity=True)
GRID = [Fraction(k, 12) for k in range(13)]


def term(rng, sig, vars_):
    pool = [Var(v) for v in vars_] + [Const(c) for c in sig.constants]
    return rng.choice(pool)


def atom(rng, sig, vars_):
    choices = list(sig.relations.items())
    kinds = ["rel"] * len(choices) + (["sim"] if sig.has_similarity else []) + ["rat", "bot"]
    k = rng.choice(kinds)
    if k == "rel":
        rel, n = rng.choice(choices)
        return Atom(rel, tuple(term(rng, sig, vars_) for _ in range(n)))
    if k == "sim":
        return Similar(term(rng, sig, vars_), term(rng, sig, vars_))
    if k == "rat":
        return Rat(rng.choice(GRID))
    return Bottom()


def formula(rng, sig=SIG, depth=3, vars_=(), sugar=False, quantifiers=True, free=()):
    """Random formula whose free variables lie in ``vars_ + free``."""
    scope = tuple(vars_) + tuple(free)
    if depth <= 0 or rng.random() < 0.25:
        return atom(rng, sig, scope)
    ops = ["imp", "imp"]
    if quantifiers:
        ops.append("all")
    if sugar:
        ops += ["not", "oplus", "odot", "and", "or", "iff", "sub", "ntimes", "npower"]
        if quantifiers:
            ops.append("ex")
    op = rng.choice(ops)
    sub = lambda: formula(rng, sig, depth - 1, vars_, sugar, quantifiers, free)  # noqa: E731
    if op in ("all", "ex"):
        v = rng.choice(["x", "y", "z"])
        body = formula(rng, sig, depth - 1, tuple(vars_) + (v,), sugar, quantifiers, free)
        return Forall(v, body) if op == "all" else Exists(v, body)
    if op == "not":
        return Not(sub())
    if op in ("ntimes", "npower"):
        return (NTimes if op == "ntimes" else NPower)(rng.randint(1, 3), sub())
    cls = {"imp": Implies, "oplus": Oplus, "odot": Odot, "and": And, "or": Or, "iff": Iff,
           "sub": TruncSub}[op]
    return cls(sub(), sub())


def sentence(rng, sig=SIG, depth=3, sugar=False, quantifiers=True):
    return formula(rng, sig, depth, (), sugar, quantifiers)


def rng_for(seed) -> random.Random:
    return random.Random(seed)


def toy_henkin(steps=200):
    """The pinned toy theory plus one existential, extended against its one-point model.

    The pair sequence is seeded with the existential, the constant 0 and
    the atoms that mention the witness, so that a short run already pins
    every atomic degree.
    """
    from pavelka.henkin import SemanticOracle, build_model, extend
    from pavelka.kernel import TheoryHandle
    from pavelka.semantics import FiniteStructure

    sig = Signature(("c",), {}, {"P": 1}, has_similarity=True)
    c, x = Const("c"), Var("x")
    third = Rat(Fraction(1, 3))
    ex = Exists("x", Iff(Atom("P", (x,)), Atom("P", (c,))))
    T = TheoryHandle(sig, (Implies(third, Atom("P", (c,))), Implies(Atom("P", (c,)), third), ex),
                     packs={"S"}, flags={"consistent"})
    ref = FiniteStructure(("a",), {"c": "a"}, {}, {"P": {("a",): Fraction(1, 3)}},
                          {("a", "a"): Fraction(0)})
    h0 = Const("h0")
    seeds = [ex, Rat(Fraction(0)), Similar(c, h0), Atom("P", (h0,))]
    T2, trace = extend(T, SemanticOracle(ref), steps, seeds=seeds)
    return T2, trace, build_model(T2), ref


def ground_sentence(rng, universe, depth=3, quantifiers=False):
    """Sentence over ``P``, similarity and rationals with constants from ``universe``."""
    consts = [Const(u) for u in universe]

    def at(scope):
        pool = consts + [Var(v) for v in scope]
        k = rng.random()
        if k < 0.45:
            return Atom("P", (rng.choice(pool),))
        if k < 0.7:
            return Similar(rng.choice(pool), rng.choice(pool))
        return Rat(Fraction(rng.randint(0, 6), 6))

    def go(d, scope):
        if d == 0 or rng.random() < 0.3:
            return at(scope)
        if quantifiers and not scope:
            return Forall("x", go(d - 1, ("x",)))
        return Implies(go(d - 1, scope), go(d - 1, scope))

    return go(depth, ())


def all_sentences(sig, max_size):
    """Every rational-free core sentence of at most ``max_size`` nodes.

    Bound variables get canonical names by depth, so each sentence is
    produced once up to renaming.
    """
    consts = [Const(c) for c in sig.constants]

    @lru_cache(None)
    def forms(n, scope):
        terms = consts + [Var(v) for v in scope]
        out = []
        if n == 1:
            out.append(Bottom())
            out += [Atom(r) for r, k in sig.relations.items() if k == 0]
        for r, k in sig.relations.items():
            if k and n == 1 + k:
                out += [Atom(r, a) for a in itertools.product(terms, repeat=k)]
        if sig.has_similarity and n == 3:
            out += [Similar(a, b) for a in terms for b in terms]
        for i in range(1, n - 1):
            out += [Implies(a, b) for a in forms(i, scope) for b in forms(n - 1 - i, scope)]
        if n >= 2:
            v = f"x{len(scope)}"
            out += [Forall(v, b) for b in forms(n - 1, scope + (v,))]
        return tuple(out)

    for n in range(1, max_size + 1):
        yield from forms(n, ())
