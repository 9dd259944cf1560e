"""Continuous-logic theories as theories of rational Pavelka logic.

Continuous logic uses truncated subtraction ``φ ∸ ψ``, rational
constants and ``sup``.  They are rewritten as ``ψ → φ``, the same
constants and ``∀``; the continuity moduli become the UL axiom family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .coding import farey_rationals
from .errors import SequenceOrderViolation
from .kernel.schemas import ul_formula
from .kernel.theory import TheoryHandle
from .moduli import Modulus
from .parser import TheoryFile
from .semantics import FiniteStructure
from .syntax import (
    App, Atom, Bottom, Const, Dist, Exists, Forall, Formula, Iff, Implies, Not, Rat,
    Signature, Similar, Sup, TruncSub, Var, elaborate, substitute,
)

__all__ = [
    "CLSignature", "CLTheory", "ULInstance", "translate_formula", "untranslate_formula",
    "cl_axiom", "CL_SCHEMAS", "ul_instances", "reduce", "pr0_theory", "pr_theory",
    "measure_algebra", "atomlessness", "counterexample_theory", "classicalize", "pem_instances",
]


@dataclass(frozen=True)
class CLSignature:
    """A signature with a metric and a modulus for every function and relation.

    One modulus per symbol serves all of its argument positions.
    """

    base: Signature
    moduli: Mapping[str, Modulus] = field(default_factory=dict)

    def __post_init__(self):
        if not self.base.has_metric:
            raise ValueError("a continuous signature needs the metric d")
        syms = [s for s, k in (*self.base.functions.items(), *self.base.relations.items()) if k]
        missing = [s for s in syms if s not in self.moduli]
        if missing:
            raise ValueError(f"no modulus for {missing}")

    def kind(self, sym):
        return "rel" if sym in self.base.relations else "fun"

    def arity(self, sym):
        return self.base.relations.get(sym, self.base.functions.get(sym))


@dataclass(frozen=True)
class CLTheory:
    signature: CLSignature
    axioms: tuple = ()
    name: str = "cl"
    congruence: bool = False

    @classmethod
    def from_file(cls, tf: TheoryFile) -> "CLTheory":
        return cls(CLSignature(tf.signature, dict(tf.moduli)), tuple(tf.axioms), tf.name,
                   tf.congruence)


# --------------------------------------------------------- translation

def translate_formula(phi: Formula) -> Formula:
    """Rewrite ``∸`` and ``sup``; everything else is kept as is."""
    if isinstance(phi, TruncSub):
        return Implies(translate_formula(phi.right), translate_formula(phi.left))
    if isinstance(phi, Sup):
        return Forall(phi.var, translate_formula(phi.body))
    if isinstance(phi, Implies):
        return Implies(translate_formula(phi.ante), translate_formula(phi.cons))
    if isinstance(phi, Forall):
        return Forall(phi.var, translate_formula(phi.body))
    if isinstance(phi, (Bottom, Rat, Atom, Similar, Dist)):
        return phi
    return translate_formula(elaborate(phi))


def untranslate_formula(phi: Formula) -> Formula:
    """Read a core formula back with ``∸`` and ``sup``."""
    if isinstance(phi, Implies):
        return TruncSub(untranslate_formula(phi.cons), untranslate_formula(phi.ante))
    if isinstance(phi, Forall):
        return Sup(phi.var, untranslate_formula(phi.body))
    return phi


ONE = Rat(Fraction(1))


def _ts(a, b):
    return TruncSub(a, b)


CL_SCHEMAS = ("C1", "C2", "C3", "C4", "sup1", "sup2", "R1", "R2")


def cl_axiom(name: str, *params) -> Formula:
    """A continuous-logic axiom instance, still written with ``∸`` and ``sup``.

    ``sup1`` takes ``(x, φ, t)``, ``sup2`` takes ``(x, ψ, φ)``, ``R1`` and
    ``R2`` take two rationals; the others take formulas.
    """
    if name == "C1":
        p, s = params
        return _ts(_ts(p, s), p)
    if name == "C2":
        p, s, sg = params
        return _ts(_ts(_ts(sg, p), _ts(sg, s)), _ts(s, p))
    if name == "C3":
        p, s = params
        return _ts(_ts(p, _ts(p, s)), _ts(s, _ts(s, p)))
    if name == "C4":
        p, s = params
        return _ts(_ts(p, s), _ts(_ts(ONE, s), _ts(ONE, p)))
    if name == "sup1":
        x, p, t = params
        return _ts(substitute(p, x, t), Sup(x, p))
    if name == "sup2":
        x, s, p = params
        return _ts(_ts(Sup(x, s), p), Sup(x, _ts(s, p)))
    if name in ("R1", "R2"):
        r, s = (Fraction(v) for v in params)
        c = Rat(max(r - s, Fraction(0)))
        lhs = _ts(Rat(r), Rat(s))
        return _ts(lhs, c) if name == "R1" else _ts(c, lhs)
    raise ValueError(f"unknown CL schema {name!r}")


# ------------------------------------------------------------ UL family

@dataclass(frozen=True)
class ULInstance:
    symbol: str
    i: int
    eps: Fraction
    q: Fraction
    r: Fraction
    formula: Formula

    def comment(self) -> str:
        return f"UL {self.symbol} i={self.i} eps={self.eps} q={self.q} r={self.r}"


def ul_instances(sig: CLSignature, symbol: str, i: int, D: int) -> list:
    """Every ``(ε, q, r)`` with denominators at most ``D``, ``r > ε`` and ``q < δ(ε)``."""
    if D < 2:
        raise ValueError("denominator bound must be at least 2")
    mod = sig.moduli[symbol]
    kind, arity = sig.kind(symbol), sig.arity(symbol)
    grid = sorted(set(farey_rationals(D)))
    out = []
    for eps in grid:
        if eps == 0:
            continue
        d = mod.delta(eps)
        for q in grid:
            if not q < d:
                continue
            for r in grid:
                if r > eps:
                    out.append(ULInstance(symbol, i, eps, q, r,
                                          ul_formula(symbol, kind, arity, i, q, r)))
    return out


def reduce(T: CLTheory, packs: Optional[Iterable[str]] = None) -> TheoryHandle:
    """The translated theory plus the metric, similarity and UL packs."""
    sig = T.signature.base
    if packs is None:
        packs = {"SM", "UL"}
        if sig.has_similarity:
            packs.add("S")
            if T.congruence:
                packs.add("S4")
    axioms = tuple(translate_formula(a) for a in T.axioms)
    return TheoryHandle(sig, axioms, frozenset(packs), dict(T.signature.moduli), name=T.name,
                        provenance=("reduced from continuous logic",))


# ---------------------------------------------------------- probability

def _pr_signature() -> CLSignature:
    base = Signature(("zero", "one"), {"comp": 1, "cap": 2, "cup": 2}, {"mu": 1},
                     has_similarity=True, has_metric=True)
    one, half = Modulus.lipschitz(1), Modulus.lipschitz(2)
    return CLSignature(base, {"comp": one, "cap": half, "cup": half, "mu": one})


def _closed(body, *vs):
    for v in reversed(vs):
        body = Forall(v, body)
    return body


def _mu(t):
    return Atom("mu", (t,))


def _cap(a, b):
    return App("cap", (a, b))


def _cup(a, b):
    return App("cup", (a, b))


def _comp(a):
    return App("comp", (a,))


def _ba_axioms():
    x, y, z = Var("x"), Var("y"), Var("z")
    zero, one = Const("zero"), Const("one")

    eqs = [
        ((_cap(x, y), _cap(y, x)), "xy"),
        ((_cup(x, y), _cup(y, x)), "xy"),
        ((_cap(x, _cap(y, z)), _cap(_cap(x, y), z)), "xyz"),
        ((_cup(x, _cup(y, z)), _cup(_cup(x, y), z)), "xyz"),
        ((_cap(x, _cup(y, z)), _cup(_cap(x, y), _cap(x, z))), "xyz"),
        ((_cup(x, _cap(y, z)), _cap(_cup(x, y), _cup(x, z))), "xyz"),
        ((_cap(x, _cup(x, y)), x), "xy"),
        ((_cup(x, _cap(x, y)), x), "xy"),
        ((_cup(x, zero), x), "x"),
        ((_cap(x, one), x), "x"),
        ((_cap(x, _comp(x)), zero), "x"),
        ((_cup(x, _comp(x)), one), "x"),
    ]
    return [_closed(Dist(a, b), *vs) for (a, b), vs in eqs]


def _measure_axioms():
    x, y = Var("x"), Var("y")

    sym = _cup(_cap(x, _comp(y)), _cap(_comp(x), y))
    return [
        _mu(Const("zero")),
        Not(_mu(Const("one"))),
        _closed(Implies(_mu(x), _mu(_cap(x, y))), "x", "y"),
        _closed(Implies(_mu(_cup(x, y)), _mu(x)), "x", "y"),
        _closed(Iff(Implies(_mu(_cap(x, y)), _mu(x)), Implies(_mu(y), _mu(_cup(x, y)))), "x", "y"),
        _closed(Iff(Similar(x, y), _mu(sym)), "x", "y"),
    ]


def atomlessness() -> Formula:
    x, y = Var("x"), Var("y")
    return Forall("x", Exists("y", Iff(_mu(_cap(x, y)), _mu(_cap(x, _comp(y))))))


def pr0_theory() -> CLTheory:
    """Boolean-algebra equations, measure axioms and the metric link."""
    return CLTheory(_pr_signature(), tuple(_ba_axioms() + _measure_axioms()), "PR0")


def pr_theory() -> CLTheory:
    """``pr0_theory`` plus atomlessness."""
    return CLTheory(_pr_signature(), tuple(_ba_axioms() + _measure_axioms() + [atomlessness()]),
                    "PR")


def measure_algebra(n: int) -> FiniteStructure:
    """Uniform measure algebra on ``{1..n}``; subsets are named ``s<bitmask>``."""
    if n < 1:
        raise ValueError("n must be positive")
    full = (1 << n) - 1
    U = [f"s{m}" for m in range(full + 1)]

    def name(m):
        return U[m]

    pop = [bin(m).count("1") for m in range(full + 1)]
    rng = range(full + 1)
    funcs = {
        "comp": {(name(a),): name(full ^ a) for a in rng},
        "cap": {(name(a), name(b)): name(a & b) for a in rng for b in rng},
        "cup": {(name(a), name(b)): name(a | b) for a in rng for b in rng},
    }
    rels = {"mu": {(name(a),): Fraction(pop[a], n) for a in rng}}
    metric = {(name(a), name(b)): Fraction(pop[a ^ b], n) for a in rng for b in rng}
    return FiniteStructure(tuple(U), {"zero": name(0), "one": name(full)}, funcs, rels, metric)


# -------------------------------------------------------- counterexample

def counterexample_theory(lower: Iterable, upper: Iterable, n: Optional[int] = None) -> TheoryHandle:
    """Theory squeezing ``|c ≈ d|`` between the lower and upper sequences.

    With ``n`` set only the first ``n`` terms of each sequence are used,
    so infinite enumerators are accepted.
    """
    rs = [Fraction(v) for v in (itertools.islice(lower, n) if n is not None else lower)]
    ss = [Fraction(v) for v in (itertools.islice(upper, n) if n is not None else upper)]
    for seq in (rs, ss):
        for v in seq:
            if not 0 <= v <= 1:
                raise SequenceOrderViolation(f"{v} is outside [0, 1]")
    if any(b < a for a, b in zip(rs, rs[1:])):
        raise SequenceOrderViolation("lower sequence must be increasing")
    if any(b > a for a, b in zip(ss, ss[1:])):
        raise SequenceOrderViolation("upper sequence must be decreasing")
    if rs and ss and max(rs) > min(ss):
        raise SequenceOrderViolation("some lower term exceeds some upper term")
    sig = Signature(("c", "d"), has_similarity=True)
    cd = Similar(Const("c"), Const("d"))
    axioms = [Implies(Rat(s), cd) for s in ss] + [Implies(cd, Rat(r)) for r in rs]
    return TheoryHandle(sig, tuple(axioms), frozenset({"S"}), name="squeeze")


# ---------------------------------------------------------- classical

def classicalize(T: TheoryHandle, size_bound: Optional[int] = None) -> TheoryHandle:
    """``T`` plus excluded middle for every sentence, flagged classical.

    ``size_bound`` only limits :func:`pem_instances`; membership covers
    all sentences.
    """
    out = T.with_packs("PEM").with_flags("classical")
    if size_bound is not None:
        out = TheoryHandle(out.signature, out.axioms, out.packs, out.moduli, out.flags,
                           out.extras, out.name, out.provenance + (f"pem-size<={size_bound}",))
    return out


def pem_instances(T: TheoryHandle, size_bound: int, limit: int = 10_000) -> list:
    """Excluded-middle instances for enumerated sentences up to ``size_bound``."""
    from .coding import sentences
    from .kernel.schemas import _rational_free, pem_formula
    from .syntax import size
    out = []
    for k, phi in enumerate(sentences(T.signature)):
        if k >= limit:
            break
        if size(phi) <= size_bound and _rational_free(phi):
            out.append(pem_formula(phi))
    return out


