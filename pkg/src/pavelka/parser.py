"""S-expression front end for formulas, terms and theory files.

Grammar (``;`` starts a line comment)::

    theory  := (theory (name ID) decl*)
    decl    := (const ID+) | (fun ID NAT [modulus]) | (rel ID NAT [modulus])
             | (metric) | (similarity [congruence]) | (axiom formula)
             | (flags FLAG*) | (fresh)
    formula := bot | (rat NAT NAT) | (REL term*) | (approx t t) | (d t t)
             | (-> f g) | (forall x f) | (not f) | (oplus f g) | (odot f g)
             | (and f g) | (or f g) | (iff f g) | (sub f g) | (exists x f)
             | (sup x f) | (ntimes n f) | (npower n f)
    term    := ID | (FUN term*)
    modulus := (lipschitz RAT) | (lipschitz NAT NAT) | (table (eps delta)+)

Identifiers in term position resolve to constants when the signature
declares them and to variables otherwise.  Without a signature, names
that look like variables (``x``, ``y2``, ...) or are bound become
variables and everything else a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .syntax import (
    And, App, Atom, Bottom, Const, Dist, Exists, Forall, Formula, Iff, Implies,
    Not, NPower, NTimes, Odot, Oplus, Or, Rat, Signature, SignatureError,
    Similar, Sup, Term, TruncSub, Var,
)

__all__ = [
    "ParseError", "SExpr", "read_sexprs", "read_one", "parse_formula",
    "parse_term", "parse_theory", "TheoryFile", "to_sexpr", "term_to_sexpr",
    "print_theory", "parse_rational", "format_rational", "KEYWORDS",
]

KEYWORDS = frozenset({
    "bot", "rat", "approx", "d", "->", "forall", "not", "oplus", "odot", "and",
    "or", "iff", "sub", "exists", "sup", "ntimes", "npower",
})
FLAGS = ("consistent", "linear_complete", "henkin", "classical")
_VARLIKE = re.compile(r"^[u-z][0-9]*$")
_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s();]+))")


class ParseError(ValueError):
    """Syntax or resolution error carrying a ``line:col`` position."""

    def __init__(self, msg: str, pos: Optional[tuple] = None):
        self.pos = pos
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(where + msg)


class SAtom(str):
    pos: tuple = (0, 0)


class SList(list):
    pos: tuple = (0, 0)


SExpr = object


def _positions(text):
    line_starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            line_starts.append(i + 1)
    import bisect

    def at(offset):
        ln = bisect.bisect_right(line_starts, offset) - 1
        return (ln + 1, offset - line_starts[ln] + 1)
    return at


def read_sexprs(text: str) -> list:
    """Read every top-level s-expression of ``text``."""
    at = _positions(text)
    stack = [SList()]
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            if text[i:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[i]!r}", at(i))
        i = m.end()
        if m.group(1) is not None:
            continue
        start = m.start(m.lastindex)
        if m.group(2):
            lst = SList()
            lst.pos = at(start)
            stack[-1].append(lst)
            stack.append(lst)
        elif m.group(3):
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", at(start))
            stack.pop()
        else:
            tok = SAtom(m.group(4))
            tok.pos = at(start)
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ParseError("unclosed '('", stack[-1].pos)
    return stack[0]


def read_one(text: str):
    items = read_sexprs(text)
    if len(items) != 1:
        raise ParseError(f"expected exactly one expression, found {len(items)}",
                         items[1].pos if len(items) > 1 else (1, 1))
    return items[0]


def _pos(x):
    return getattr(x, "pos", None)


def _atom(x, what="identifier"):
    if not isinstance(x, str):
        raise ParseError(f"expected {what}", _pos(x))
    return str(x)


def _nat(x) -> int:
    s = _atom(x, "natural number")
    if not s.isdigit():
        raise ParseError(f"expected natural number, got {s!r}", _pos(x))
    return int(s)


def parse_rational(x) -> Fraction:
    s = _atom(x, "rational")
    try:
        if not re.fullmatch(r"\d+(/\d+)?", s):
            raise ValueError
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {s!r}", _pos(x)) from None


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


# ------------------------------------------------------------- formulas

class _Resolver:
    def __init__(self, sig: Optional[Signature]):
        self.sig = sig

    def term(self, x, bound) -> Term:
        if isinstance(x, SList):
            if not x:
                raise ParseError("empty term", x.pos)
            fn = _atom(x[0], "function symbol")
            args = tuple(self.term(a, bound) for a in x[1:])
            if self.sig is not None:
                if fn not in self.sig.functions:
                    raise ParseError(f"undeclared function {fn!r}", x.pos)
                if self.sig.functions[fn] != len(args):
                    raise ParseError(f"arity mismatch: {fn} expects {self.sig.functions[fn]}, "
                                     f"got {len(args)}", x.pos)
            return App(fn, args)
        name = _atom(x)
        if name in bound:
            return Var(name)
        if self.sig is not None:
            if self.sig.is_constant(name):
                return Const(name)
            if name in self.sig.functions or name in self.sig.relations:
                raise ParseError(f"{name!r} is not a constant", x.pos)
            return Var(name)
        return Var(name) if _VARLIKE.match(name) else Const(name)

    def formula(self, x, bound=frozenset()) -> Formula:
        if isinstance(x, str):
            if x == "bot":
                return Bottom()
            if self.sig is not None and self.sig.relations.get(x) == 0:
                return Atom(str(x), ())
            raise ParseError(f"expected formula, got {x!r}", x.pos)
        if not x:
            raise ParseError("empty formula", x.pos)
        head = _atom(x[0], "connective or relation")
        args = x[1:]

        def arity(k):
            if len(args) != k:
                raise ParseError(f"{head} takes {k} arguments, got {len(args)}", x.pos)

        if head == "bot":
            arity(0)
            return Bottom()
        if head == "rat":
            if len(args) == 1:
                v = parse_rational(args[0])
            else:
                arity(2)
                p, q = _nat(args[0]), _nat(args[1])
                if q == 0:
                    raise ParseError("zero denominator", x.pos)
                v = Fraction(p, q)
            if v > 1:
                raise ParseError(f"rational {v} outside [0,1]", x.pos)
            return Rat(v)
        if head in ("approx", "d"):
            arity(2)
            if self.sig is not None:
                if head == "approx" and not self.sig.has_similarity:
                    raise ParseError("similarity not declared", x.pos)
                if head == "d" and not self.sig.has_metric:
                    raise ParseError("metric not declared", x.pos)
            cls = Similar if head == "approx" else Dist
            return cls(self.term(args[0], bound), self.term(args[1], bound))
        if head in ("forall", "exists", "sup"):
            arity(2)
            v = _atom(args[0], "variable")
            if self.sig is not None and self.sig.is_constant(v):
                raise ParseError(f"cannot bind constant {v!r}", args[0].pos)
            body = self.formula(args[1], bound | {v})
            return {"forall": Forall, "exists": Exists, "sup": Sup}[head](v, body)
        if head == "not":
            arity(1)
            return Not(self.formula(args[0], bound))
        if head in ("ntimes", "npower"):
            arity(2)
            n = _nat(args[0])
            if n < 1:
                raise ParseError("multiplicity must be >= 1", x.pos)
            return (NTimes if head == "ntimes" else NPower)(n, self.formula(args[1], bound))
        binary = {"->": Implies, "oplus": Oplus, "odot": Odot, "and": And,
                  "or": Or, "iff": Iff, "sub": TruncSub}
        if head in binary:
            arity(2)
            return binary[head](self.formula(args[0], bound), self.formula(args[1], bound))
        terms = tuple(self.term(a, bound) for a in args)
        if self.sig is not None:
            if head not in self.sig.relations:
                raise ParseError(f"undeclared relation {head!r}", x.pos)
            if self.sig.relations[head] != len(terms):
                raise ParseError(f"arity mismatch: {head} expects {self.sig.relations[head]}, "
                                 f"got {len(terms)}", x.pos)
        return Atom(head, terms)


def parse_formula(text, sig: Optional[Signature] = None) -> Formula:
    """Parse one formula from text (or from an already-read s-expression)."""
    x = read_one(text) if isinstance(text, str) and not isinstance(text, SAtom) else text
    return _Resolver(sig).formula(x)


def parse_term(text, sig: Optional[Signature] = None, bound=frozenset()) -> Term:
    x = read_one(text) if isinstance(text, str) and not isinstance(text, SAtom) else text
    return _Resolver(sig).term(x, frozenset(bound))


def formula_from_sexpr(x, sig: Optional[Signature] = None, bound=frozenset()) -> Formula:
    return _Resolver(sig).formula(x, frozenset(bound))


# ------------------------------------------------------------- theories

@dataclass
class TheoryFile:
    name: str
    signature: Signature
    axioms: list = field(default_factory=list)
    flags: set = field(default_factory=set)
    moduli: dict = field(default_factory=dict)
    congruence: bool = False


def _parse_modulus(x):
    from .moduli import Modulus
    if not isinstance(x, SList) or not x:
        raise ParseError("expected modulus", _pos(x))
    kind = _atom(x[0])
    try:
        if kind == "lipschitz":
            if len(x) == 2:
                return Modulus.lipschitz(parse_rational(x[1]))
            if len(x) != 3:
                raise ParseError("lipschitz takes NAT NAT", x.pos)
            return Modulus.lipschitz(Fraction(_nat(x[1]), _nat(x[2]) or 1))
        if kind == "table":
            rows = []
            for row in x[1:]:
                if not isinstance(row, SList):
                    raise ParseError("table rows are (eps delta)", _pos(row))
                if len(row) == 2:
                    rows.append((parse_rational(row[0]), parse_rational(row[1])))
                elif len(row) == 4:
                    n = [_nat(t) for t in row]
                    rows.append((Fraction(n[0], n[1]), Fraction(n[2], n[3])))
                else:
                    raise ParseError("table rows are (eps delta)", row.pos)
            return Modulus.table(rows)
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), x.pos) from None
    raise ParseError(f"unknown modulus {kind!r}", x.pos)


def parse_theory(text: str) -> TheoryFile:
    top = read_one(text)
    if not isinstance(top, SList) or not top or top[0] != "theory":
        raise ParseError("expected (theory ...)", _pos(top))
    name = "anonymous"
    consts, funcs, rels = [], {}, {}
    metric = similarity = congruence = fresh = False
    moduli = {}
    flags = set()
    raw_axioms = []
    for decl in top[1:]:
        if not isinstance(decl, SList) or not decl:
            raise ParseError("expected declaration", _pos(decl))
        kind = _atom(decl[0])
        if kind == "name":
            name = _atom(decl[1]) if len(decl) == 2 else None
            if name is None:
                raise ParseError("(name ID)", decl.pos)
        elif kind == "const":
            if len(decl) < 2:
                raise ParseError("(const ID+)", decl.pos)
            consts.extend(_atom(t) for t in decl[1:])
        elif kind in ("fun", "rel"):
            if len(decl) not in (3, 4):
                raise ParseError(f"({kind} ID NAT [modulus])", decl.pos)
            sym = _atom(decl[1])
            if sym in KEYWORDS:
                raise ParseError(f"{sym!r} is a reserved word", decl[1].pos)
            (funcs if kind == "fun" else rels)[sym] = _nat(decl[2])
            if len(decl) == 4:
                moduli[sym] = _parse_modulus(decl[3])
        elif kind == "metric":
            metric = True
        elif kind == "fresh":
            fresh = True
        elif kind == "similarity":
            similarity = True
            for opt in decl[1:]:
                if opt != "congruence":
                    raise ParseError(f"unknown similarity option {opt!r}", opt.pos)
                congruence = True
        elif kind == "axiom":
            if len(decl) != 2:
                raise ParseError("(axiom formula)", decl.pos)
            raw_axioms.append(decl[1])
        elif kind == "flags":
            for f in decl[1:]:
                if f not in FLAGS:
                    raise ParseError(f"unknown flag {f!r}", _pos(f))
                flags.add(str(f))
        else:
            raise ParseError(f"unknown declaration {kind!r}", decl.pos)
    try:
        sig = Signature(tuple(consts), funcs, rels, similarity, metric, fresh)
    except SignatureError as e:
        raise ParseError(str(e), top.pos) from None
    axioms = [formula_from_sexpr(a, sig) for a in raw_axioms]
    return TheoryFile(name, sig, axioms, flags, moduli, congruence)


# ------------------------------------------------------------- printing

def term_to_sexpr(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    return "(" + " ".join([t.fn, *(term_to_sexpr(a) for a in t.args)]) + ")"


def to_sexpr(phi: Formula) -> str:
    out = []
    _emit(phi, out)
    return "".join(out)


_BIN_NAMES = {Implies: "->", Oplus: "oplus", Odot: "odot", And: "and", Or: "or",
              Iff: "iff", TruncSub: "sub"}
_Q_NAMES = {Forall: "forall", Exists: "exists", Sup: "sup"}


def _emit(phi, out):
    # iterative over the right spine to keep long implication chains shallow
    closers = 0
    while True:
        t = type(phi)
        if t in _BIN_NAMES:
            out.append(f"({_BIN_NAMES[t]} ")
            left = phi.ante if t is Implies else phi.left
            _emit(left, out)
            out.append(" ")
            phi = phi.cons if t is Implies else phi.right
            closers += 1
            continue
        if t in _Q_NAMES:
            out.append(f"({_Q_NAMES[t]} {phi.var} ")
            phi = phi.body
            closers += 1
            continue
        if t is Not:
            out.append("(not ")
            phi = phi.arg
            closers += 1
            continue
        if t in (NTimes, NPower):
            out.append(f"({'ntimes' if t is NTimes else 'npower'} {phi.n} ")
            phi = phi.arg
            closers += 1
            continue
        break
    if t is Bottom:
        out.append("bot")
    elif t is Rat:
        out.append(f"(rat {phi.value.numerator} {phi.value.denominator})")
    elif t is Atom:
        out.append("(" + " ".join([phi.rel, *(term_to_sexpr(a) for a in phi.args)]) + ")")
    elif t is Similar:
        out.append(f"(approx {term_to_sexpr(phi.left)} {term_to_sexpr(phi.right)})")
    elif t is Dist:
        out.append(f"(d {term_to_sexpr(phi.left)} {term_to_sexpr(phi.right)})")
    else:
        raise TypeError(f"not a formula: {phi!r}")
    out.append(")" * closers)


def _print_modulus(m) -> str:
    if m.kind == "lipschitz":
        L = m.L
        return f"(lipschitz {L.numerator} {L.denominator})"
    rows = " ".join(f"({format_rational(e)} {format_rational(d)})" for e, d in m.rows)
    return f"(table {rows})"


def print_theory(tf: TheoryFile, comments: Optional[dict] = None) -> str:
    """Render a theory file; ``comments`` maps axiom index to a comment line."""
    sig = tf.signature
    lines = [f"(theory (name {tf.name})"]
    if sig.constants:
        lines.append("  (const " + " ".join(sig.constants) + ")")
    for kind, table in (("fun", sig.functions), ("rel", sig.relations)):
        for sym, k in table.items():
            mod = tf.moduli.get(sym)
            lines.append(f"  ({kind} {sym} {k}" + (f" {_print_modulus(mod)}" if mod else "") + ")")
    if sig.has_metric:
        lines.append("  (metric)")
    if sig.has_similarity:
        lines.append("  (similarity congruence)" if tf.congruence else "  (similarity)")
    if sig.fresh_constants:
        lines.append("  (fresh)")
    if tf.flags:
        lines.append("  (flags " + " ".join(f for f in FLAGS if f in tf.flags) + ")")
    comments = comments or {}
    for i, ax in enumerate(tf.axioms):
        if i in comments:
            lines.append(f"  ; {comments[i]}")
        lines.append(f"  (axiom {to_sexpr(ax)})")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"
