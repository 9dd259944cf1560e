"""Terms, formulas and signatures.

Formulas are immutable trees.  The core connectives are ``Implies``,
``Bottom`` and ``Forall`` together with rational constants and atoms;
everything else (``Not``, ``Oplus``, ``Exists`` ...) is sugar that
:func:`elaborate` rewrites into the core.

All truth values in this package are *falsity* degrees: 0 is fully true
and 1 is fully false.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

__all__ = [
    "Signature", "Term", "Var", "Const", "App", "Formula",
    "Bottom", "Rat", "Atom", "Similar", "Dist", "Implies", "Forall",
    "Not", "Oplus", "Odot", "And", "Or", "Iff", "TruncSub", "Exists", "Sup",
    "NTimes", "NPower", "BOT", "CaptureError", "SignatureError",
    "substitute", "is_substitutable", "free_vars", "term_vars", "elaborate",
    "is_core", "is_sentence", "constants_of", "size", "subformulas",
    "rat", "rational_value", "rat_const", "iter_nodes", "has_quantifier",
]


class SignatureError(ValueError):
    """Raised for ill-formed signatures or symbols used against them."""


class CaptureError(ValueError):
    """A free variable of the substituted term would become bound."""

    def __init__(self, var: str, binder: str):
        super().__init__(f"substituting for {var!r} captures variable {binder!r}")
        self.var = var
        self.binder = binder


def _cached_hash(self):
    try:
        return self._h
    except AttributeError:
        h = hash((type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self)))
        object.__setattr__(self, "_h", h)
        return h


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    # trees are hashed repeatedly by the proof machinery; cache it
    cls.__hash__ = _cached_hash
    return cls


# ---------------------------------------------------------------- terms

class Term:
    __slots__ = ()

    def __str__(self):
        from .parser import term_to_sexpr
        return term_to_sexpr(self)


@_node
class Var(Term):
    name: str


@_node
class Const(Term):
    name: str


@_node
class App(Term):
    fn: str
    args: tuple

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


# ------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def __str__(self):
        from .parser import to_sexpr
        return to_sexpr(self)

    # small conveniences used all over the tests and tactics
    def __rshift__(self, other: "Formula") -> "Implies":
        return Implies(self, other)


@_node
class Bottom(Formula):
    pass


@_node
class Rat(Formula):
    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value)
        if not 0 <= v <= 1:
            raise ValueError(f"rational constant {v} outside [0,1]")
        object.__setattr__(self, "value", v)


@_node
class Atom(Formula):
    rel: str
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@_node
class Similar(Formula):
    left: Term
    right: Term


@_node
class Dist(Formula):
    left: Term
    right: Term


@_node
class Implies(Formula):
    ante: Formula
    cons: Formula


@_node
class Forall(Formula):
    var: str
    body: Formula


# sugar

@_node
class Not(Formula):
    arg: Formula


@_node
class Oplus(Formula):
    left: Formula
    right: Formula


@_node
class Odot(Formula):
    left: Formula
    right: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Iff(Formula):
    left: Formula
    right: Formula


@_node
class TruncSub(Formula):
    """Continuous-logic ``left ∸ right``; reads as ``right → left``."""
    left: Formula
    right: Formula


@_node
class Exists(Formula):
    var: str
    body: Formula


@_node
class Sup(Formula):
    """Continuous-logic ``sup``; reads as ``Forall``."""
    var: str
    body: Formula


@_node
class NTimes(Formula):
    n: int
    arg: Formula

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("multiplicity must be >= 1")


@_node
class NPower(Formula):
    n: int
    arg: Formula

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("multiplicity must be >= 1")


BOT = Bottom()
CORE = (Bottom, Rat, Atom, Similar, Dist, Implies, Forall)
_BINARY = (Implies, Oplus, Odot, And, Or, Iff, TruncSub)
_BINDERS = (Forall, Exists, Sup)
_TERM_ATOMS = (Similar, Dist)


def rat(p, q=1) -> Rat:
    return Rat(Fraction(p, q))


def rational_value(f: Formula):
    """Value of a rational constant; ``Bottom`` counts as the constant 1."""
    if isinstance(f, Rat):
        return f.value
    if isinstance(f, Bottom):
        return Fraction(1)
    return None


def rat_const(v) -> Rat:
    return Rat(Fraction(v))


# ------------------------------------------------------------ signature

@dataclass(frozen=True)
class Signature:
    constants: tuple = ()
    functions: Mapping[str, int] = field(default_factory=dict)
    relations: Mapping[str, int] = field(default_factory=dict)
    has_similarity: bool = False
    has_metric: bool = False
    # infinite reserved supply h0, h1, ... of Henkin constants
    fresh_constants: bool = False

    FRESH_PREFIX = "h"

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "relations", dict(self.relations))
        seen = set()
        for name in (*self.constants, *self.functions, *self.relations):
            if name in seen:
                raise SignatureError(f"symbol {name!r} declared twice")
            seen.add(name)
            if self.is_fresh_name(name):
                raise SignatureError(f"{name!r} collides with the reserved Henkin namespace")
        for name, k in (*self.functions.items(), *self.relations.items()):
            if not isinstance(k, int) or k < 0:
                raise SignatureError(f"bad arity {k!r} for {name!r}")
        if "d" in self.relations or "d" in self.functions:
            raise SignatureError("'d' is reserved for the metric")

    @classmethod
    def is_fresh_name(cls, name: str) -> bool:
        return name.startswith(cls.FRESH_PREFIX) and name[1:].isdigit() and (
            name[1:] == "0" or not name[1:].startswith("0"))

    def is_constant(self, name: str) -> bool:
        return name in self.constants or (self.fresh_constants and self.is_fresh_name(name))

    def with_constants(self, extra: Iterable[str]) -> "Signature":
        extra = [c for c in extra if c not in self.constants]
        return Signature(self.constants + tuple(extra), self.functions, self.relations,
                         self.has_similarity, self.has_metric, self.fresh_constants)

    def with_fresh(self) -> "Signature":
        return Signature(self.constants, self.functions, self.relations,
                         self.has_similarity, self.has_metric, True)

    def union(self, other: "Signature") -> "Signature":
        funcs = dict(self.functions)
        rels = dict(self.relations)
        for src, dst in ((other.functions, funcs), (other.relations, rels)):
            for k, v in src.items():
                if dst.get(k, v) != v:
                    raise SignatureError(f"arity clash for {k!r}")
                dst[k] = v
        consts = self.constants + tuple(c for c in other.constants if c not in self.constants)
        return Signature(consts, funcs, rels, self.has_similarity or other.has_similarity,
                         self.has_metric or other.has_metric,
                         self.fresh_constants or other.fresh_constants)

    def check(self, phi: Formula) -> None:
        """Raise :class:`SignatureError` if ``phi`` uses undeclared symbols."""
        for node in iter_nodes(phi):
            if isinstance(node, Atom):
                if self.relations.get(node.rel) != len(node.args):
                    raise SignatureError(f"relation {node.rel}/{len(node.args)} not declared")
            elif isinstance(node, Similar) and not self.has_similarity:
                raise SignatureError("similarity not declared")
            elif isinstance(node, Dist) and not self.has_metric:
                raise SignatureError("metric not declared")
            elif isinstance(node, App):
                if self.functions.get(node.fn) != len(node.args):
                    raise SignatureError(f"function {node.fn}/{len(node.args)} not declared")
            elif isinstance(node, Const) and not self.is_constant(node.name):
                raise SignatureError(f"constant {node.name!r} not declared")


# ------------------------------------------------------------ traversal

def _children(x):
    if isinstance(x, (Atom, App)):
        return x.args
    if isinstance(x, _TERM_ATOMS):
        return (x.left, x.right)
    if isinstance(x, Implies):
        return (x.ante, x.cons)
    if isinstance(x, _BINARY):
        return (x.left, x.right)
    if isinstance(x, _BINDERS):
        return (x.body,)
    if isinstance(x, (Not, NTimes, NPower)):
        return (x.arg,)
    return ()


def iter_nodes(x):
    """Pre-order walk over formula and term nodes."""
    stack = [x]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(_children(node)))


def size(phi) -> int:
    return sum(1 for _ in iter_nodes(phi))


def has_quantifier(phi: Formula) -> bool:
    return any(isinstance(n, _BINDERS) for n in iter_nodes(phi))


def subformulas(phi: Formula):
    """Distinct formula subtrees of ``phi`` (including itself), outermost first."""
    seen = {}
    for node in iter_nodes(phi):
        if isinstance(node, Formula) and node not in seen:
            seen[node] = None
    return list(seen)


def constants_of(x) -> set:
    return {n.name for n in iter_nodes(x) if isinstance(n, Const)}


@lru_cache(maxsize=200_000)
def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, App):
        out = frozenset()
        for a in t.args:
            out |= term_vars(a)
        return out
    return frozenset()


@lru_cache(maxsize=200_000)
def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, Term):
        return term_vars(phi)
    if isinstance(phi, _BINDERS):
        return free_vars(phi.body) - {phi.var}
    out = frozenset()
    for c in _children(phi):
        out |= free_vars(c)
    return out


def is_sentence(phi: Formula) -> bool:
    return not free_vars(phi)


# --------------------------------------------------------- substitution

def _subst_term(t: Term, x: str, s: Term) -> Term:
    if isinstance(t, Var):
        return s if t.name == x else t
    if isinstance(t, App):
        return App(t.fn, tuple(_subst_term(a, x, s) for a in t.args))
    return t


def _rebuild(phi, kids):
    if isinstance(phi, Implies):
        return Implies(*kids)
    if isinstance(phi, _BINARY):
        return type(phi)(*kids)
    if isinstance(phi, _BINDERS):
        return type(phi)(phi.var, kids[0])
    if isinstance(phi, Not):
        return Not(kids[0])
    if isinstance(phi, (NTimes, NPower)):
        return type(phi)(phi.n, kids[0])
    raise TypeError(phi)


def substitute(phi: Formula, x: str, t: Term) -> Formula:
    """Replace the free occurrences of ``x`` in ``phi`` by ``t``.

    Raises :class:`CaptureError` when a free variable of ``t`` would be
    bound by a quantifier of ``phi``.
    """
    tv = term_vars(t)
    return _subst(phi, x, t, tv)


def _subst(phi, x, t, tv):
    if x not in free_vars(phi):
        return phi
    if isinstance(phi, Atom):
        return Atom(phi.rel, tuple(_subst_term(a, x, t) for a in phi.args))
    if isinstance(phi, _TERM_ATOMS):
        return type(phi)(_subst_term(phi.left, x, t), _subst_term(phi.right, x, t))
    if isinstance(phi, _BINDERS):
        if phi.var in tv:
            raise CaptureError(x, phi.var)
        return type(phi)(phi.var, _subst(phi.body, x, t, tv))
    return _rebuild(phi, [_subst(c, x, t, tv) for c in _children(phi)])


def is_substitutable(phi: Formula, x: str, t: Term) -> bool:
    try:
        substitute(phi, x, t)
    except CaptureError:
        return False
    return True


def rename_bound(phi: Formula, avoid: Iterable[str]) -> Formula:
    """Alpha-rename binders so none of them is in ``avoid``."""
    avoid = set(avoid)

    def go(f):
        if isinstance(f, _BINDERS):
            body = go(f.body)
            var = f.var
            if var in avoid:
                k = 0
                taken = avoid | free_vars(body) | {n.name for n in iter_nodes(body) if isinstance(n, Var)}
                while f"{var}{k}" in taken:
                    k += 1
                new = f"{var}{k}"
                body = substitute(body, var, Var(new))
                var = new
            return type(f)(var, body)
        kids = _children(f)
        if not kids or isinstance(f, (Atom, Similar, Dist)):
            return f
        return _rebuild(f, [go(c) for c in kids])

    return go(phi)


# ---------------------------------------------------------- elaboration

def _neg(a):
    return Implies(a, BOT)


@lru_cache(maxsize=200_000)
def elaborate(phi: Formula) -> Formula:
    """Rewrite derived connectives into ``Implies``/``Bottom``/``Forall``."""
    if isinstance(phi, (Bottom, Rat, Atom, Similar, Dist)):
        return phi
    if isinstance(phi, Implies):
        return Implies(elaborate(phi.ante), elaborate(phi.cons))
    if isinstance(phi, (Forall, Sup)):
        return Forall(phi.var, elaborate(phi.body))
    if isinstance(phi, Not):
        return _neg(elaborate(phi.arg))
    if isinstance(phi, Exists):
        return _neg(Forall(phi.var, _neg(elaborate(phi.body))))
    if isinstance(phi, TruncSub):
        return Implies(elaborate(phi.right), elaborate(phi.left))
    if isinstance(phi, NTimes):
        a = elaborate(phi.arg)
        out = a
        for _ in range(phi.n - 1):
            out = _oplus(a, out)
        return out
    if isinstance(phi, NPower):
        a = elaborate(phi.arg)
        out = a
        for _ in range(phi.n - 1):
            out = Implies(_neg(a), out)
        return out
    a, b = elaborate(phi.left), elaborate(phi.right)
    if isinstance(phi, Oplus):
        return _oplus(a, b)
    if isinstance(phi, Odot):
        return Implies(_neg(a), b)
    if isinstance(phi, And):
        return _oplus(a, Implies(a, b))
    if isinstance(phi, Or):
        return Implies(Implies(a, b), b)
    if isinstance(phi, Iff):
        return _oplus(Implies(a, b), Implies(b, a))
    raise TypeError(f"not a formula: {phi!r}")


def _oplus(a, b):
    return _neg(Implies(a, _neg(b)))


def is_core(phi: Formula) -> bool:
    return all(isinstance(n, (*CORE, Term)) for n in iter_nodes(phi))


Node = Union[Formula, Term]
