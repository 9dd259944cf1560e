"""Axiom schemas.

The logical schemas are L1–L4, FORALL1, FORALL2 and R.  Similarity
(S1–S4), metric (SM1–SM3), uniform-continuity (UL) and excluded-middle
(PEM) schemas are *packs*: they are theory axioms that a
:class:`~pavelka.kernel.theory.TheoryHandle` switches on.

Every instance is returned in core form (only ``Implies``, ``Bottom``,
``Forall``, rational constants and atoms).
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import SideConditionViolation
from ..syntax import (
    App, Atom, Bottom, CaptureError, Dist, Forall, Formula, Implies, Rat,
    Similar, Term, Var, elaborate, free_vars, iter_nodes,
    rational_value, substitute, is_sentence,
)

__all__ = [
    "SCHEMAS", "LOGICAL", "PACKS", "PACK_OF", "instantiate_axiom", "ul_formula",
    "pem_formula", "match_pack", "neg", "oplus", "iff", "or_", "imp", "ul_eps_for",
]

BOT = Bottom()
LOGICAL = ("L1", "L2", "L3", "L4", "FORALL1", "FORALL2", "R")
PACK_OF = {
    "S1": "S", "S2": "S", "S3": "S", "S4_R": "S4", "S4_f": "S4",
    "SM1": "SM", "SM2": "SM", "SM3": "SM", "UL_R": "UL", "UL_f": "UL", "PEM": "PEM",
}
PACKS = tuple(PACK_OF)
SCHEMAS = LOGICAL + PACKS

# parameter kinds: f formula, v variable, t term, q rational, s symbol, n natural, T term list
SHAPES = {
    "L1": "ff", "L2": "fff", "L3": "ff", "L4": "ff", "FORALL1": "vft", "FORALL2": "vff",
    "R": "ff", "S1": "t", "S2": "tt", "S3": "ttt", "S4_R": "sTT", "S4_f": "sTT",
    "SM1": "t", "SM2": "tt", "SM3": "ttt", "UL_R": "snqqq", "UL_f": "snqqq", "PEM": "f",
}


def imp(a, b):
    return Implies(a, b)


def neg(a):
    return Implies(a, BOT)


def oplus(a, b):
    return neg(Implies(a, neg(b)))


def iff(a, b):
    return oplus(Implies(a, b), Implies(b, a))


def or_(a, b):
    return Implies(Implies(a, b), b)


def _rat_param(schema, f):
    v = rational_value(f)
    if v is None:
        raise SideConditionViolation(schema, "parameter must be a rational constant or bot", str(f))
    return v


def _sim_chain(xs, ys):
    pairs = [Similar(x, y) for x, y in zip(xs, ys)]
    out = pairs[-1]
    for p in reversed(pairs[:-1]):
        out = oplus(p, out)
    return out


def ul_formula(symbol: str, kind: str, arity: int, i: int, q, r) -> Formula:
    """Universally closed UL instance for argument ``i`` of ``symbol``."""
    if not 0 <= i < arity:
        raise SideConditionViolation("UL", "argument position out of range", f"{symbol}/{arity} at {i}")
    others = [Var(f"u{k}") for k in range(arity - 1)]
    x, y = Var("x"), Var("y")
    ax = tuple(others[:i]) + (x,) + tuple(others[i:])
    ay = tuple(others[:i]) + (y,) + tuple(others[i:])
    if kind == "rel":
        change = Implies(Atom(symbol, ay), Atom(symbol, ax))
    else:
        change = Dist(App(symbol, ax), App(symbol, ay))
    body = or_(Implies(Dist(x, y), Rat(q)), Implies(Rat(r), change))
    for v in reversed(["x", "y", *(o.name for o in others)]):
        body = Forall(v, body)
    return body


def _rational_free(phi):
    return all(not isinstance(n, Rat) or n.value in (0, 1) for n in iter_nodes(phi))


def pem_formula(phi: Formula) -> Formula:
    phi = elaborate(phi)
    return or_(phi, neg(phi))


def instantiate_axiom(schema: str, params, ctx=None) -> Formula:
    """Concrete (core) instance of ``schema``.

    ``ctx`` supplies the signature and moduli for the UL and S4 packs
    (anything with ``signature`` and ``moduli`` attributes).
    Raises :class:`SideConditionViolation` when a side condition fails.
    """
    params = tuple(params)
    shape = SHAPES.get(schema)
    if shape is None:
        raise SideConditionViolation(schema, "unknown schema")
    if len(params) != len(shape):
        raise SideConditionViolation(schema, f"expects {len(shape)} parameters, got {len(params)}")
    P = [elaborate(p) if k == "f" else p for k, p in zip(shape, params)]
    for k, p in zip(shape, P):
        if k == "f" and not isinstance(p, Formula):
            raise SideConditionViolation(schema, "expected a formula parameter", repr(p))
        if k == "t" and not isinstance(p, Term):
            raise SideConditionViolation(schema, "expected a term parameter", repr(p))
    if schema == "L1":
        a, b = P
        return imp(a, imp(b, a))
    if schema == "L2":
        a, b, c = P
        return imp(imp(a, b), imp(imp(b, c), imp(a, c)))
    if schema == "L3":
        a, b = P
        return imp(imp(imp(a, b), b), imp(imp(b, a), a))
    if schema == "L4":
        a, b = P
        return imp(imp(neg(a), neg(b)), imp(b, a))
    if schema == "FORALL1":
        x, phi, t = P
        try:
            inst = substitute(phi, x, t)
        except CaptureError as e:
            raise SideConditionViolation(schema, "term not substitutable", str(e)) from None
        return imp(Forall(x, phi), inst)
    if schema == "FORALL2":
        x, phi, psi = P
        if x in free_vars(phi):
            raise SideConditionViolation(schema, f"{x} is free in the antecedent")
        return imp(Forall(x, imp(phi, psi)), imp(phi, Forall(x, psi)))
    if schema == "R":
        r, s = P
        rv, sv = _rat_param(schema, r), _rat_param(schema, s)
        return iff(imp(r, s), Rat(max(sv - rv, Fraction(0))))
    if schema == "S1":
        (t,) = P
        return Similar(t, t)
    if schema == "S2":
        s, t = P
        return imp(Similar(s, t), Similar(t, s))
    if schema == "S3":
        r, s, t = P
        return imp(oplus(Similar(r, s), Similar(s, t)), Similar(r, t))
    if schema == "SM1":
        (t,) = P
        return Dist(t, t)
    if schema == "SM2":
        s, t = P
        return imp(Dist(t, s), Dist(s, t))
    if schema == "SM3":
        x, y, z = P
        return imp(Dist(y, z), imp(Dist(x, y), Dist(x, z)))
    if schema in ("S4_R", "S4_f"):
        sym, xs, ys = P
        xs, ys = tuple(xs), tuple(ys)
        if not xs or len(xs) != len(ys):
            raise SideConditionViolation(schema, "argument lists must be nonempty and equally long")
        if ctx is not None:
            table = ctx.signature.relations if schema == "S4_R" else ctx.signature.functions
            if table.get(sym) != len(xs):
                raise SideConditionViolation(schema, f"{sym} is not declared with arity {len(xs)}")
        if schema == "S4_R":
            return imp(_sim_chain(xs, ys), iff(Atom(sym, xs), Atom(sym, ys)))
        return imp(_sim_chain(xs, ys), Similar(App(sym, xs), App(sym, ys)))
    if schema in ("UL_R", "UL_f"):
        sym, i, eps, q, r = P
        eps, q, r = Fraction(eps), Fraction(q), Fraction(r)
        if ctx is None:
            raise SideConditionViolation(schema, "needs a signature with moduli")
        table = ctx.signature.relations if schema == "UL_R" else ctx.signature.functions
        if sym not in table:
            raise SideConditionViolation(schema, f"{sym} not declared")
        mod = ctx.moduli.get(sym)
        if mod is None:
            raise SideConditionViolation(schema, f"{sym} has no modulus")
        if not all(0 <= v <= 1 for v in (eps, q, r)) or eps == 0:
            raise SideConditionViolation(schema, "eps, q, r must be rationals in [0,1], eps > 0")
        if not r > eps:
            raise SideConditionViolation(schema, "r > eps", f"r={r}, eps={eps}")
        if not q < mod.delta(eps):
            raise SideConditionViolation(schema, "q < delta(eps)", f"q={q}, delta={mod.delta(eps)}")
        return ul_formula(sym, "rel" if schema == "UL_R" else "fun", table[sym], int(i), q, r)
    if schema == "PEM":
        (phi,) = P
        if not is_sentence(phi):
            raise SideConditionViolation(schema, "instances are sentences only")
        if not _rational_free(phi):
            raise SideConditionViolation(schema, "instances may only use the constants 0 and 1")
        return pem_formula(phi)
    raise SideConditionViolation(schema, "unknown schema")  # pragma: no cover


# ------------------------------------------------------------- matching

def _strip_forall(phi):
    while isinstance(phi, Forall):
        phi = phi.body
    return phi


def _is_neg(f):
    return isinstance(f, Implies) and isinstance(f.cons, Bottom)


def _match_oplus(f):
    """``(a, b)`` when ``f`` is the core form of ``a ⊕ b``."""
    if _is_neg(f) and isinstance(f.ante, Implies) and _is_neg(f.ante.cons):
        return f.ante.ante, f.ante.cons.ante
    return None


def _match_chain(f, n):
    pairs = []
    for k in range(n - 1):
        m = _match_oplus(f)
        if m is None or not isinstance(m[0], Similar):
            return None
        pairs.append(m[0])
        f = m[1]
    if not isinstance(f, Similar):
        return None
    pairs.append(f)
    return tuple(p.left for p in pairs), tuple(p.right for p in pairs)


def match_pack(phi: Formula, packs, ctx=None):
    """Decide membership of ``phi`` in the enabled packs.

    Accepts instances and their universal closures.  Returns
    ``(schema, params)`` or ``None``.  UL instances are recognised only in
    the canonical closed form produced by :func:`ul_formula`.
    """
    phi = elaborate(phi)
    packs = set(packs)
    if "UL" in packs and ctx is not None and isinstance(phi, Forall):
        hit = _match_ul(phi, ctx)
        if hit:
            return hit
    if "PEM" in packs and isinstance(phi, Implies) and isinstance(phi.ante, Implies):
        a = phi.ante.ante
        if phi.ante.cons == phi.cons == neg(a) and is_sentence(a) and _rational_free(a):
            return "PEM", (a,)
    body = _strip_forall(phi)
    if "S" in packs:
        if isinstance(body, Similar) and body.left == body.right:
            return "S1", (body.left,)
        if isinstance(body, Implies) and isinstance(body.ante, Similar) and isinstance(body.cons, Similar):
            s, t = body.ante.left, body.ante.right
            if body.cons == Similar(t, s):
                return "S2", (s, t)
        if isinstance(body, Implies) and isinstance(body.cons, Similar):
            m = _match_oplus(body.ante)
            if m and isinstance(m[0], Similar) and isinstance(m[1], Similar):
                (r, s1), (s2, t) = (m[0].left, m[0].right), (m[1].left, m[1].right)
                if s1 == s2 and body.cons == Similar(r, t):
                    return "S3", (r, s1, t)
    if "SM" in packs:
        if isinstance(body, Dist) and body.left == body.right:
            return "SM1", (body.left,)
        if isinstance(body, Implies) and isinstance(body.ante, Dist) and isinstance(body.cons, Dist):
            t, s = body.ante.left, body.ante.right
            if body.cons == Dist(s, t):
                return "SM2", (s, t)
        if (isinstance(body, Implies) and isinstance(body.ante, Dist) and isinstance(body.cons, Implies)
                and isinstance(body.cons.ante, Dist) and isinstance(body.cons.cons, Dist)):
            y, z = body.ante.left, body.ante.right
            x, y2 = body.cons.ante.left, body.cons.ante.right
            if y == y2 and body.cons.cons == Dist(x, z):
                return "SM3", (x, y, z)
    if "S4" in packs and ctx is not None and isinstance(body, Implies):
        sig = ctx.signature
        c = body.cons
        m = _match_oplus(c)
        if m and isinstance(m[0], Implies) and isinstance(m[0].ante, Atom):
            sym = m[0].ante.rel
            n = sig.relations.get(sym, 0)
            if n:
                ch = _match_chain(body.ante, n)
                if ch and instantiate_axiom("S4_R", (sym, ch[0], ch[1]), ctx) == body:
                    return "S4_R", (sym, ch[0], ch[1])
        if isinstance(c, Similar) and isinstance(c.left, App):
            sym = c.left.fn
            n = sig.functions.get(sym, 0)
            if n:
                ch = _match_chain(body.ante, n)
                if ch and instantiate_axiom("S4_f", (sym, ch[0], ch[1]), ctx) == body:
                    return "S4_f", (sym, ch[0], ch[1])
    return None


def _match_ul(phi, ctx):
    body = _strip_forall(phi)
    if not (isinstance(body, Implies) and isinstance(body.ante, Implies)):
        return None
    first = body.ante.ante
    second = body.cons
    if not (isinstance(first, Implies) and isinstance(first.ante, Dist) and isinstance(first.cons, Rat)):
        return None
    if not (isinstance(second, Implies) and isinstance(second.ante, Rat)):
        return None
    q, r = first.cons.value, second.ante.value
    change = second.cons
    if isinstance(change, Implies) and isinstance(change.cons, Atom):
        schema, sym, args = "UL_R", change.cons.rel, change.cons.args
        table = ctx.signature.relations
    elif isinstance(change, Dist) and isinstance(change.left, App):
        schema, sym, args = "UL_f", change.left.fn, change.left.args
        table = ctx.signature.functions
    else:
        return None
    if table.get(sym) != len(args) or Var("x") not in args:
        return None
    i = args.index(Var("x"))
    mod = ctx.moduli.get(sym)
    if mod is None or not mod.admits(q, r):
        return None
    if ul_formula(sym, "rel" if schema == "UL_R" else "fun", len(args), i, q, r) != phi:
        return None
    return schema, (sym, i, q, r)


def ul_eps_for(mod, q, r):
    """Some rational eps < r with q < delta(eps), or None."""
    q, r = Fraction(q), Fraction(r)
    if not mod.admits(q, r):
        return None
    den = max(r.denominator, 2)
    while True:
        for k in range(den * r.numerator // r.denominator, 0, -1):
            eps = Fraction(k, den)
            if eps < r and q < mod.delta(eps):
                return eps
        den *= 2



