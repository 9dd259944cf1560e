"""Finite standard structures and exact falsity-degree evaluation."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import UncoveredVariable
from .moduli import Modulus
from .parser import ParseError, SList, _atom, parse_rational, read_one, format_rational
from .syntax import (
    And, Atom, Bottom, Const, Dist, Exists, Forall, Formula, Iff, Implies,
    Not, NPower, NTimes, Odot, Oplus, Or, Rat, Signature, Similar, Sup,
    TruncSub, Var, free_vars, iter_nodes,
)

__all__ = [
    "FiniteStructure", "evaluate", "eval_formula", "max_falsity", "models", "ModelsResult",
    "check_moduli", "ModuliResult", "random_structure", "parse_structure",
    "print_structure", "metric_closure", "is_pseudometric", "sentence_value",
]

_0, _1 = Fraction(0), Fraction(1)


@dataclass(frozen=True)
class FiniteStructure:
    universe: tuple
    consts: Mapping = field(default_factory=dict)
    funcs: Mapping = field(default_factory=dict)  # name -> {args tuple: element}
    rels: Mapping = field(default_factory=dict)   # name -> {args tuple: Fraction}
    metric: Optional[Mapping] = None              # (a, b) -> Fraction; read by both approx and d

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        if not self.universe:
            raise ValueError("universe must be nonempty")
        U = set(self.universe)
        for c, a in self.consts.items():
            if a not in U:
                raise ValueError(f"constant {c} interpreted outside the universe")
        for name, table in self.funcs.items():
            arity = _arity(table)
            for args in itertools.product(self.universe, repeat=arity):
                if table.get(args) not in U:
                    raise ValueError(f"function {name} not total at {args}")
        for name, table in self.rels.items():
            arity = _arity(table)
            for args in itertools.product(self.universe, repeat=arity):
                v = table.get(args)
                if v is None or not 0 <= v <= 1:
                    raise ValueError(f"relation {name} missing or out of range at {args}")
        if self.metric is not None:
            for a in self.universe:
                for b in self.universe:
                    if (a, b) not in self.metric:
                        raise ValueError(f"metric missing at {(a, b)}")

    def with_constants(self, extra: Mapping) -> "FiniteStructure":
        consts = dict(self.consts)
        consts.update(extra)
        return FiniteStructure(self.universe, consts, self.funcs, self.rels, self.metric)

    def signature(self) -> Signature:
        fresh = [c for c in self.consts if Signature.is_fresh_name(c)]
        return Signature(tuple(c for c in self.consts if c not in fresh),
                         {f: _arity(t) for f, t in self.funcs.items()},
                         {r: _arity(t) for r, t in self.rels.items()},
                         self.metric is not None, self.metric is not None,
                         fresh_constants=bool(fresh))

    def rho(self, a, b) -> Fraction:
        if self.metric is None:
            raise ValueError("structure has no metric")
        return self.metric[(a, b)]


def _arity(table):
    for k in table:
        return len(k)
    return 0


# ---------------------------------------------------------- exact eval

def _term(M, v, t):
    if isinstance(t, Var):
        try:
            return v[t.name]
        except KeyError:
            raise UncoveredVariable(f"variable {t.name!r} has no value") from None
    if isinstance(t, Const):
        try:
            return M.consts[t.name]
        except KeyError:
            raise UncoveredVariable(f"constant {t.name!r} is not interpreted") from None
    return M.funcs[t.fn][tuple(_term(M, v, a) for a in t.args)]


def evaluate(M: FiniteStructure, v: Mapping, phi: Formula) -> Fraction:
    """Exact falsity degree of ``phi`` in ``M`` under valuation ``v``.

    Derived connectives are evaluated by their own value tables rather
    than through elaboration, so the two routes can be compared.
    """
    t = type(phi)
    if t is Implies:
        a = evaluate(M, v, phi.ante)
        return max(evaluate(M, v, phi.cons) - a, _0)
    if t is Bottom:
        return _1
    if t is Rat:
        return phi.value
    if t is Atom:
        return M.rels[phi.rel][tuple(_term(M, v, a) for a in phi.args)]
    if t is Similar or t is Dist:
        return M.rho(_term(M, v, phi.left), _term(M, v, phi.right))
    if t in (Forall, Sup, Exists):
        vals = (evaluate(M, {**v, phi.var: a}, phi.body) for a in M.universe)
        return min(vals) if t is Exists else max(vals)
    if t is Not:
        return 1 - evaluate(M, v, phi.arg)
    if t in (NTimes, NPower):
        x = evaluate(M, v, phi.arg)
        n = phi.n
        return min(n * x, _1) if t is NTimes else max(n * x - (n - 1), _0)
    x, y = evaluate(M, v, phi.left), evaluate(M, v, phi.right)
    if t is Oplus:
        return min(x + y, _1)
    if t is Odot:
        return max(x + y - 1, _0)
    if t is And:
        return max(x, y)
    if t is Or:
        return min(x, y)
    if t is Iff:
        return abs(x - y)
    if t is TruncSub:
        return max(x - y, _0)
    raise TypeError(f"not a formula: {phi!r}")


eval_formula = evaluate


def sentence_value(M: FiniteStructure, phi: Formula) -> Fraction:
    """Falsity of ``phi`` taken as a sup over valuations of its free variables."""
    fv = sorted(free_vars(phi))
    best = _0
    for vals in itertools.product(M.universe, repeat=len(fv)):
        best = max(best, evaluate(M, dict(zip(fv, vals)), phi))
        if best == 1:
            break
    return best


# ----------------------------------------------------- vectorized eval

class _Vec:
    """Evaluator over all valuations at once with int64 numerators.

    Each variable gets its own array axis; values are numerators over a
    common denominator ``D``.
    """

    def __init__(self, M: FiniteStructure, phis: Iterable[Formula]):
        self.M = M
        self.idx = {a: i for i, a in enumerate(M.universe)}
        n = len(M.universe)
        dens = [1]
        for table in M.rels.values():
            dens.extend(x.denominator for x in table.values())
        if M.metric is not None:
            dens.extend(x.denominator for x in M.metric.values())
        for phi in phis:
            dens.extend(node.value.denominator for node in iter_nodes(phi) if isinstance(node, Rat))
        self.D = lcm(*dens)
        self.rel = {}
        for name, table in M.rels.items():
            k = _arity(table)
            arr = np.zeros((n,) * k, dtype=np.int64)
            for args, val in table.items():
                arr[tuple(self.idx[a] for a in args)] = val.numerator * (self.D // val.denominator)
            self.rel[name] = arr
        self.fun = {}
        for name, table in M.funcs.items():
            k = _arity(table)
            arr = np.zeros((n,) * k, dtype=np.int64)
            for args, val in table.items():
                arr[tuple(self.idx[a] for a in args)] = self.idx[val]
            self.fun[name] = arr
        if M.metric is not None:
            arr = np.zeros((n, n), dtype=np.int64)
            for (a, b), val in M.metric.items():
                arr[self.idx[a], self.idx[b]] = val.numerator * (self.D // val.denominator)
            self.met = arr

    def term(self, t, axes, fixed):
        if isinstance(t, Var):
            if t.name in fixed:
                return np.int64(fixed[t.name])
            if t.name not in axes:
                raise UncoveredVariable(f"variable {t.name!r} has no value")
            shape = [1] * _nd(axes)
            shape[axes[t.name]] = len(self.M.universe)
            return np.arange(len(self.M.universe)).reshape(shape)
        if isinstance(t, Const):
            return np.int64(self.idx[self.M.consts[t.name]])
        return self.fun[t.fn][tuple(self.term(a, axes, fixed) for a in t.args)]

    def val(self, phi, axes, fixed):
        D = self.D
        t = type(phi)
        if t is Implies:
            return np.maximum(self.val(phi.cons, axes, fixed) - self.val(phi.ante, axes, fixed), 0)
        if t is Bottom:
            return np.int64(D)
        if t is Rat:
            return np.int64(phi.value.numerator * (D // phi.value.denominator))
        if t is Atom:
            arr = self.rel[phi.rel]
            if not phi.args:
                return arr[()]
            return arr[tuple(self.term(a, axes, fixed) for a in phi.args)]
        if t is Similar or t is Dist:
            return self.met[self.term(phi.left, axes, fixed), self.term(phi.right, axes, fixed)]
        if t in (Forall, Sup, Exists):
            inner = dict(axes)
            inner[phi.var] = _nd(axes)
            inner_fixed = {k: w for k, w in fixed.items() if k != phi.var}
            body = self.val(phi.body, inner, inner_fixed)
            body = np.broadcast_to(body, _full_shape(body, _nd(inner), len(self.M.universe), inner[phi.var]))
            red = np.min if t is Exists else np.max
            out = red(body, axis=inner[phi.var])
            return out
        if t is Not:
            return D - self.val(phi.arg, axes, fixed)
        if t in (NTimes, NPower):
            x = self.val(phi.arg, axes, fixed)
            n = phi.n
            return np.minimum(n * x, D) if t is NTimes else np.maximum(n * x - (n - 1) * D, 0)
        x, y = self.val(phi.left, axes, fixed), self.val(phi.right, axes, fixed)
        if t is Oplus:
            return np.minimum(x + y, D)
        if t is Odot:
            return np.maximum(x + y - D, 0)
        if t is And:
            return np.maximum(x, y)
        if t is Or:
            return np.minimum(x, y)
        if t is Iff:
            return np.abs(x - y)
        if t is TruncSub:
            return np.maximum(x - y, 0)
        raise TypeError(f"not a formula: {phi!r}")


def _nd(axes):
    return max(axes.values()) + 1 if axes else 0


def _full_shape(arr, ndim, n, axis):
    shape = list(np.shape(arr))
    shape = [1] * (ndim - len(shape)) + shape
    shape[axis] = n
    return tuple(shape)


def max_falsity(M: FiniteStructure, phi: Formula, _vec: Optional[_Vec] = None):
    """Sup over valuations of the free variables and leading universal quantifiers.

    Returns ``(falsity, witness valuation)``.  The outermost variable is
    looped over so the working arrays stay one dimension smaller.
    """
    vec = _vec or _Vec(M, [phi])
    body = phi
    while isinstance(body, (Forall, Sup)):
        body = body.body
    names = sorted(free_vars(body))
    if not names:
        val = int(np.asarray(vec.val(body, {}, {})))
        return Fraction(val, vec.D), {}
    n = len(M.universe)
    loop_var, rest = names[0], names[1:]
    axes = {x: i for i, x in enumerate(rest)}
    best, wit = -1, None
    for i in range(n):
        arr = np.asarray(vec.val(body, axes, {loop_var: i}))
        arr = np.broadcast_to(arr, (n,) * len(rest)) if rest else arr
        m = int(arr.max())
        if m > best:
            best = m
            pos = np.unravel_index(int(arr.argmax()), arr.shape) if rest else ()
            wit = {loop_var: M.universe[i], **{x: M.universe[int(p)] for x, p in zip(rest, pos)}}
            if best == vec.D:
                break
    return Fraction(best, vec.D), wit


@dataclass(frozen=True)
class ModelsResult:
    ok: bool
    worst_axiom: Optional[Formula] = None
    falsity: Fraction = _0
    witness: Optional[dict] = None

    def __bool__(self):
        return self.ok


def models(M: FiniteStructure, axioms: Iterable[Formula]) -> ModelsResult:
    """Check that every axiom (universally closed) has falsity 0 in ``M``."""
    axioms = list(axioms)
    vec = _Vec(M, axioms)
    worst = None
    for ax in axioms:
        val, wit = max_falsity(M, ax, vec)
        if val > 0 and (worst is None or val > worst[1]):
            worst = (ax, val, wit)
            if val == 1:
                break
    if worst is None:
        return ModelsResult(True)
    return ModelsResult(False, worst[0], worst[1], worst[2])


# --------------------------------------------------------------- moduli

@dataclass(frozen=True)
class ModuliResult:
    ok: bool
    symbol: Optional[str] = None
    position: Optional[int] = None
    eps: Optional[Fraction] = None
    q: Optional[Fraction] = None
    r: Optional[Fraction] = None
    args: Optional[tuple] = None  # (tuple with x, tuple with y)

    def __bool__(self):
        return self.ok


def _violation_triple(dd, delta_gap, mod: Modulus):
    """Least grid triple (eps, q, r) whose UL instance fails for this pair."""
    den = 8
    while True:
        grid = [Fraction(k, den) for k in range(den + 1)]
        for eps in grid[1:]:
            d = mod.delta(eps)
            for q in grid:
                if not (dd < q < d):
                    continue
                for r in grid:
                    if eps < r < delta_gap:
                        return eps, q, r
        den *= 2
        if den > 1 << 16:
            return None


def check_moduli(M: FiniteStructure, moduli: Mapping[str, Modulus]) -> ModuliResult:
    """Decide whether every symbol respects its declared modulus in ``M``.

    Exact: a pair at distance ``dd`` with output change ``gap`` violates
    the modulus iff the left limit of delta at ``gap`` exceeds ``dd``.
    Violations are reported with the least (eps, q, r) found on the
    uniform grids k/8, k/16, ...
    """
    if not moduli:
        return ModuliResult(True)
    if M.metric is None:
        raise ValueError("check_moduli needs a metric table")
    U = M.universe
    symbols = [(s, "rel", M.rels[s]) for s in M.rels] + [(s, "fun", M.funcs[s]) for s in M.funcs]
    for name, kind, table in symbols:
        mod = moduli.get(name)
        if mod is None:
            continue
        k = _arity(table)
        for i in range(k):
            for base in itertools.product(U, repeat=k - 1):
                for x in U:
                    for y in U:
                        if x == y:
                            continue
                        ax = base[:i] + (x,) + base[i:]
                        ay = base[:i] + (y,) + base[i:]
                        dd = M.rho(x, y)
                        if kind == "rel":
                            gap = table[ax] - table[ay]
                        else:
                            gap = M.rho(table[ax], table[ay])
                        if gap > 0 and mod.delta_left(gap) > dd:
                            trip = _violation_triple(dd, gap, mod)
                            eps, q, r = trip if trip else (None, None, None)
                            return ModuliResult(False, name, i, eps, q, r, (ax, ay))
    return ModuliResult(True)


# ------------------------------------------------------- random models

def metric_closure(table: dict, universe) -> dict:
    """Shortest paths under truncated addition, with a zero diagonal."""
    d = dict(table)
    for a in universe:
        d[(a, a)] = _0
    for k in universe:
        for i in universe:
            dik = d[(i, k)]
            for j in universe:
                alt = min(dik + d[(k, j)], _1)
                if alt < d[(i, j)]:
                    d[(i, j)] = alt
    return d


def is_pseudometric(table: Mapping, universe) -> bool:
    for a in universe:
        if table[(a, a)] != 0:
            return False
        for b in universe:
            if table[(a, b)] != table[(b, a)]:
                return False
            for c in universe:
                if table[(a, c)] > min(table[(a, b)] + table[(b, c)], _1):
                    return False
    return True


def random_structure(sig: Signature, size: int, seed, grid: int = 12,
                     extra_constants: Iterable[str] = ()) -> FiniteStructure:
    """Deterministic random structure; declared similarity/metric is repaired to S1–S3."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = random.Random(seed)
    U = tuple(f"e{i}" for i in range(size))

    def val():
        return Fraction(rng.randint(0, grid), grid)

    consts = {c: rng.choice(U) for c in (*sig.constants, *extra_constants)}
    funcs = {f: {args: rng.choice(U) for args in itertools.product(U, repeat=k)}
             for f, k in sig.functions.items()}
    rels = {r: {args: val() for args in itertools.product(U, repeat=k)}
            for r, k in sig.relations.items()}
    metric = None
    if sig.has_similarity or sig.has_metric:
        raw = {}
        for i, a in enumerate(U):
            for b in U[i:]:
                raw[(a, b)] = raw[(b, a)] = val()
        metric = metric_closure(raw, U)
    return FiniteStructure(U, consts, funcs, rels, metric)


# ------------------------------------------------------ structure files

def parse_structure(text: str) -> FiniteStructure:
    top = read_one(text)
    if not isinstance(top, SList) or not top or top[0] != "structure":
        raise ParseError("expected (structure ...)", getattr(top, "pos", None))
    universe, consts, funcs, rels, metric = None, {}, {}, {}, None
    for item in top[1:]:
        if not isinstance(item, SList) or not item:
            raise ParseError("expected structure clause", getattr(item, "pos", None))
        kind = _atom(item[0])
        if kind == "universe":
            universe = [_atom(a) for a in item[1:]]
        elif kind == "const":
            if len(item) != 3:
                raise ParseError("(const NAME ELEMENT)", item.pos)
            consts[_atom(item[1])] = _atom(item[2])
        elif kind in ("fun", "rel"):
            name = _atom(item[1])
            table = {}
            for entry in item[2:]:
                if not isinstance(entry, SList) or len(entry) != 2 or not isinstance(entry[0], SList):
                    raise ParseError("entries are ((args...) value)", getattr(entry, "pos", None))
                args = tuple(_atom(a) for a in entry[0])
                table[args] = _atom(entry[1]) if kind == "fun" else parse_rational(entry[1])
            (funcs if kind == "fun" else rels)[name] = table
        elif kind == "metric":
            metric = {}
            for entry in item[1:]:
                if not isinstance(entry, SList) or len(entry) != 2 or len(entry[0]) != 2:
                    raise ParseError("metric entries are ((a b) value)", getattr(entry, "pos", None))
                a, b = _atom(entry[0][0]), _atom(entry[0][1])
                metric[(a, b)] = metric[(b, a)] = parse_rational(entry[1])
        else:
            raise ParseError(f"unknown structure clause {kind!r}", item.pos)
    if not universe:
        raise ParseError("structure needs a nonempty universe", top.pos)
    if metric is not None:
        for a in universe:
            metric.setdefault((a, a), _0)
    try:
        return FiniteStructure(tuple(universe), consts, funcs, rels, metric)
    except ValueError as e:
        raise ParseError(str(e), top.pos) from None


def print_structure(M: FiniteStructure) -> str:
    lines = ["(structure", "  (universe " + " ".join(M.universe) + ")"]
    for c, a in M.consts.items():
        lines.append(f"  (const {c} {a})")
    for name, table in M.funcs.items():
        entries = " ".join(f"(({' '.join(k)}) {v})" for k, v in table.items())
        lines.append(f"  (fun {name} {entries})")
    for name, table in M.rels.items():
        entries = " ".join(f"(({' '.join(k)}) {format_rational(v)})" for k, v in table.items())
        lines.append(f"  (rel {name} {entries})")
    if M.metric is not None:
        U = M.universe
        entries = " ".join(f"(({a} {b}) {format_rational(M.metric[(a, b)])})"
                           for i, a in enumerate(U) for b in U[i:])
        lines.append(f"  (metric {entries})")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"
