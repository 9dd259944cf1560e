"""A structural bijection between natural numbers and sentences.

The coding is built from small enumeration combinators.  The sentences
at binder depth ``k`` (the formulas whose free variables are among the
first ``k`` canonical binder names) form a disjoint sum, visited as

* finite parts first: ``Bottom``;
* then the infinite parts round-robin (index ``j`` goes to part
  ``j mod m`` at position ``j div m``), in this fixed order: rational
  constants (Farey order 0, 1, 1/2, 1/3, 2/3, 1/4, ...), atoms of each
  relation in declaration order, ``approx``, ``d``, implications and
  universal quantifications.

Pairs use the Cantor pairing ``<a,b> = (a+b)(a+b+1)/2 + b``.  Binder
variables are canonical (``x, y, z, x3, x4, ...``, skipping names the
signature uses), so :func:`encode_sentence` first alpha-normalises.
This order is part of the package's stable interface.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterator, Optional

from .syntax import (
    App, Atom, Bottom, Const, Dist, Forall, Formula, Implies, Rat, Signature,
    Similar, Var, elaborate, free_vars,
)

__all__ = [
    "cantor_pair", "cantor_unpair", "enumerate_sentences", "encode_sentence",
    "sentences", "pair_stream", "farey_index", "farey_rational", "farey_rationals",
    "SentenceCoding", "canonical_names",
]


def cantor_pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def cantor_unpair(n: int) -> tuple:
    w = (isqrt(8 * n + 1) - 1) // 2
    b = n - w * (w + 1) // 2
    return w - b, b


# ------------------------------------------------------------ rationals

@lru_cache(maxsize=None)
def _phi(n: int) -> int:
    return sum(1 for k in range(1, n) if gcd(k, n) == 1) if n > 1 else 1


_cum = [0, 0, 2]  # _cum[q] = index of the first rational with denominator q (q >= 2)


def _cum_upto(q):
    while len(_cum) <= q:
        k = len(_cum) - 1
        _cum.append(_cum[k] + _phi(k))
    return _cum[q]


def farey_index(v) -> int:
    v = Fraction(v)
    if not 0 <= v <= 1:
        raise ValueError("rational outside [0,1]")
    p, q = v.numerator, v.denominator
    if q == 1:
        return p
    rank = sum(1 for k in range(1, p) if gcd(k, q) == 1)
    return _cum_upto(q) + rank


def farey_rational(i: int) -> Fraction:
    if i < 2:
        return Fraction(i)
    q = 2
    while _cum_upto(q + 1) <= i:
        q += 1
    rank = i - _cum_upto(q)
    for p in range(1, q):
        if gcd(p, q) == 1:
            if rank == 0:
                return Fraction(p, q)
            rank -= 1
    raise AssertionError("unreachable")


def farey_rationals(max_den: Optional[int] = None) -> Iterator[Fraction]:
    """Rationals of [0,1] by denominator then numerator, optionally bounded."""
    yield Fraction(0)
    yield Fraction(1)
    q = 2
    while max_den is None or q <= max_den:
        for p in range(1, q):
            if gcd(p, q) == 1:
                yield Fraction(p, q)
        q += 1


# ---------------------------------------------------------- combinators

class _Enum:
    size: Optional[int]  # None means infinite

    def get(self, i):
        raise NotImplementedError

    def index(self, x) -> int:
        raise NotImplementedError


class _Finite(_Enum):
    def __init__(self, items):
        self.items = list(items)
        self.pos = {x: i for i, x in enumerate(self.items)}
        self.size = len(self.items)

    def get(self, i):
        return self.items[i]

    def index(self, x):
        return self.pos[x]


class _Naturals(_Enum):
    size = None

    def get(self, i):
        return i

    def index(self, x):
        return x


class _Map(_Enum):
    def __init__(self, inner, fwd, back):
        self.inner, self.fwd, self.back = inner, fwd, back

    @property
    def size(self):
        return self.inner.size

    def get(self, i):
        return self.fwd(self.inner.get(i))

    def index(self, x):
        return self.inner.index(self.back(x))


class _Product(_Enum):
    """Binary product; mixed radix, or Cantor pairing when both are infinite."""

    def __init__(self, a, b):
        self.a, self.b = a, b

    @property
    def size(self):
        sa, sb = self.a.size, self.b.size
        if sa == 0 or sb == 0:
            return 0
        return None if sa is None or sb is None else sa * sb

    def get(self, i):
        sa, sb = self.a.size, self.b.size
        if sa is not None:
            return self.a.get(i % sa), self.b.get(i // sa)
        if sb is not None:
            return self.a.get(i // sb), self.b.get(i % sb)
        x, y = cantor_unpair(i)
        return self.a.get(x), self.b.get(y)

    def index(self, pair):
        x, y = pair
        sa, sb = self.a.size, self.b.size
        ia, ib = self.a.index(x), self.b.index(y)
        if sa is not None:
            return ib * sa + ia
        if sb is not None:
            return ia * sb + ib
        return cantor_pair(ia, ib)


class _Unit(_Enum):
    size = 1

    def get(self, i):
        if i:
            raise IndexError(i)
        return ()

    def index(self, x):
        return 0


def _tuples(elem_factory, k):
    """k-fold product as tuples (right nested pairs underneath)."""
    if k == 0:
        return _Unit()
    if k == 1:
        return _Map(elem_factory(), lambda x: (x,), lambda t: t[0])
    rest = _tuples(elem_factory, k - 1)
    return _Map(_Product(elem_factory(), rest), lambda p: (p[0],) + p[1], lambda t: (t[0], t[1:]))


class _Sum(_Enum):
    """Disjoint sum of tagged parts; parts are (tag, enum, predicate)."""

    def __init__(self, parts):
        self.parts = [p for p in parts if p[1].size != 0]
        self.finite = [p for p in self.parts if p[1].size is not None]
        self.infinite = [p for p in self.parts if p[1].size is None]
        self.n0 = sum(p[1].size for p in self.finite)

    @property
    def size(self):
        return None if self.infinite else self.n0

    def get(self, i):
        for tag, enum, _ in self.finite:
            if i < enum.size:
                return enum.get(i)
            i -= enum.size
        if not self.infinite:
            raise IndexError("index beyond finite enumeration")
        m = len(self.infinite)
        return self.infinite[i % m][1].get(i // m)

    def index(self, x):
        off = 0
        for tag, enum, owns in self.finite:
            if owns(x):
                return off + enum.index(x)
            off += enum.size
        m = len(self.infinite)
        for k, (tag, enum, owns) in enumerate(self.infinite):
            if owns(x):
                return self.n0 + enum.index(x) * m + k
        raise ValueError(f"value not in enumeration: {x!r}")


class _Lazy(_Enum):
    def __init__(self, thunk, size):
        self.thunk = thunk
        self._e = None
        self.size = size

    def _get(self):
        if self._e is None:
            self._e = self.thunk()
        return self._e

    def get(self, i):
        return self._get().get(i)

    def index(self, x):
        return self._get().index(x)


# --------------------------------------------------------- the coding

def canonical_names(sig: Signature):
    used = set(sig.constants) | set(sig.functions) | set(sig.relations)

    def gen():
        k = 0
        while True:
            name = "xyz"[k] if k < 3 else f"x{k}"
            if name not in used and not Signature.is_fresh_name(name):
                yield name
            k += 1
    return gen()


class SentenceCoding:
    """Bijection between naturals and sentences (core connectives only)."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self._names_gen = canonical_names(sig)
        self.names = []
        self._formulas = {}
        self._terms = {}
        self._consts = (_Map(_Naturals(), lambda i: Const(f"h{i}"), lambda c: int(c.name[1:]))
                        if sig.fresh_constants else None)

    def _name(self, k):
        while len(self.names) <= k:
            self.names.append(next(self._names_gen))
        return self.names[k]

    def _ground_term_count(self, depth):
        base = depth + len(self.sig.constants) + sum(1 for a in self.sig.functions.values() if a == 0)
        if self.sig.fresh_constants:
            return None
        if base == 0:
            return 0
        if any(a > 0 for a in self.sig.functions.values()):
            return None
        return base

    def terms(self, depth):
        if depth not in self._terms:
            size = self._ground_term_count(depth)
            self._terms[depth] = _Lazy(lambda: self._build_terms(depth), size)
        return self._terms[depth]

    def _build_terms(self, depth):
        sig = self.sig
        scope = [Var(self._name(k)) for k in range(depth)]
        consts = [Const(c) for c in sig.constants]
        nullary = [App(f, ()) for f, a in sig.functions.items() if a == 0]
        parts = [("var", _Finite(scope), lambda t: isinstance(t, Var)),
                 ("const", _Finite(consts), lambda t: isinstance(t, Const) and t.name in sig.constants),
                 ("nullary", _Finite(nullary), lambda t: isinstance(t, App) and not t.args)]
        if self._consts is not None:
            parts.append(("fresh", self._consts,
                          lambda t: isinstance(t, Const) and t.name not in sig.constants))
        if self._ground_term_count(depth) != 0:
            for f, a in sig.functions.items():
                if a > 0:
                    enum = _Map(_tuples(lambda: self.terms(depth), a),
                                lambda args, f=f: App(f, args), lambda t: t.args)
                    parts.append((f, enum, lambda t, f=f: isinstance(t, App) and t.fn == f and t.args))
        return _Sum(parts)

    def formulas(self, depth):
        if depth not in self._formulas:
            self._formulas[depth] = _Lazy(lambda: self._build_formulas(depth), None)
        return self._formulas[depth]

    def _build_formulas(self, depth):
        sig = self.sig
        T = lambda: self.terms(depth)  # noqa: E731
        F = lambda: self.formulas(depth)  # noqa: E731
        parts = [
            ("bot", _Finite([Bottom()]), lambda f: isinstance(f, Bottom)),
            ("rat", _Map(_Naturals(), lambda i: Rat(farey_rational(i)),
                         lambda f: farey_index(f.value)), lambda f: isinstance(f, Rat)),
        ]
        for rel, a in sig.relations.items():
            parts.append((rel, _Map(_tuples(T, a), lambda args, rel=rel: Atom(rel, args),
                                    lambda f: f.args),
                          lambda f, rel=rel: isinstance(f, Atom) and f.rel == rel))
        for flag, cls in ((sig.has_similarity, Similar), (sig.has_metric, Dist)):
            if flag:
                parts.append((cls.__name__, _Map(_Product(T(), T()), lambda p, cls=cls: cls(*p),
                                                 lambda f: (f.left, f.right)),
                              lambda f, cls=cls: isinstance(f, cls)))
        parts.append(("imp", _Map(_Product(F(), F()), lambda p: Implies(*p),
                                  lambda f: (f.ante, f.cons)), lambda f: isinstance(f, Implies)))
        name = self._name(depth)
        parts.append(("all", _Map(self.formulas(depth + 1), lambda b: Forall(name, b),
                                  lambda f: f.body), lambda f: isinstance(f, Forall)))
        return _Sum(parts)

    # public API

    def decode(self, n: int) -> Formula:
        if n < 0:
            raise ValueError("negative index")
        return self.formulas(0).get(n)

    def normalize(self, phi: Formula) -> Formula:
        """Elaborate and rename binders canonically by depth."""
        phi = elaborate(phi)
        if free_vars(phi):
            raise ValueError("only sentences have codes")
        return self._norm(phi, {}, 0)

    def _norm(self, f, env, depth):
        if isinstance(f, Forall):
            inner = dict(env)
            inner[f.var] = self._name(depth)
            return Forall(self._name(depth), self._norm(f.body, inner, depth + 1))
        if isinstance(f, Implies):
            return Implies(self._norm(f.ante, env, depth), self._norm(f.cons, env, depth))
        if isinstance(f, Atom):
            return Atom(f.rel, tuple(self._nterm(t, env) for t in f.args))
        if isinstance(f, (Similar, Dist)):
            return type(f)(self._nterm(f.left, env), self._nterm(f.right, env))
        return f

    def _nterm(self, t, env):
        if isinstance(t, Var):
            return Var(env[t.name])
        if isinstance(t, App):
            return App(t.fn, tuple(self._nterm(a, env) for a in t.args))
        return t

    def encode(self, phi: Formula) -> int:
        return self._encode(self.normalize(phi), 0)

    def _encode(self, f, depth):
        return self.formulas(depth).index(f)


_codings = {}


def _coding(sig: Signature) -> SentenceCoding:
    key = (sig.constants, tuple(sig.functions.items()), tuple(sig.relations.items()),
           sig.has_similarity, sig.has_metric, sig.fresh_constants)
    c = _codings.get(key)
    if c is None:
        c = _codings[key] = SentenceCoding(sig)
    return c


def enumerate_sentences(sig: Signature, k: int) -> Formula:
    """The ``k``-th sentence of ``sig`` in the documented order."""
    return _coding(sig).decode(k)


def encode_sentence(sig: Signature, phi: Formula) -> int:
    return _coding(sig).encode(phi)


def sentences(sig: Signature, start: int = 0) -> Iterator[Formula]:
    k = start
    coding = _coding(sig)
    while True:
        yield coding.decode(k)
        k += 1


def pair_stream(seq_get, start: int = 0):
    """Yield ``(n, i, j)`` so that every ``(i, j)`` recurs infinitely often.

    ``n = <<i, j>, m>`` with ``m`` the repetition count.
    """
    n = start
    while True:
        a, _m = cantor_unpair(n)
        i, j = cantor_unpair(a)
        yield n, seq_get(i), seq_get(j)
        n += 1
