"""Certified interval bounds on falsity degrees.

For every formula ``X`` in its node set the prover keeps a lower bound
``l`` witnessed by a derivation of ``X → l̄`` and an upper bound ``h``
witnessed by a derivation of ``h̄ → X``.  Bounds start at 0 and 1 and
are tightened to a fixed point by

* the truth functions of ``→`` and ``∀`` (instances at known constants
  for the lower bound of ``∀``, generalisation for the upper bound),
* implications that are theorems (``X → Y`` pushes ``lo`` down the arrow
  against its direction and ``hi`` along it),
* the inverse rule for ``A → k̄`` (an upper bound on ``A → k̄`` forces a
  lower bound on ``A``),
* excluded-middle instances when the theory carries that pack.

Derivations are recorded symbolically and turned into proofs only when
a certificate is requested, so the fixed-point loop stays cheap.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Optional

from ..errors import SideConditionViolation
from ..kernel.builder import ProofBuilder
from ..kernel.proof import Proof
from ..kernel.schemas import _match_oplus, _rational_free
from ..syntax import (
    Bottom, CaptureError, Const, Forall, Formula, Implies, Rat, constants_of,
    elaborate, free_vars, is_sentence, rational_value, substitute,
)

__all__ = ["BoundsProver", "Exhausted"]

ZERO, ONE = Fraction(0), Fraction(1)
BOT = Bottom()


class Exhausted(Exception):
    """The prover ran out of ticks."""


class _Rec:
    __slots__ = ("kind", "value", "args")

    def __init__(self, kind, value, args=()):
        self.kind = kind
        self.value = value
        self.args = args


def _const(v) -> Rat:
    return Rat(Fraction(v))


def _tsub(a, b):
    return a - b if a > b else ZERO


class BoundsProver:
    """Fixed-point bound propagation over a theory, with lazy proof certificates."""

    def __init__(self, T, builder: Optional[ProofBuilder] = None, max_axioms: int = 2000,
                 max_rounds: int = 64, ticks: Optional[int] = None,
                 max_instances: int = 4000):
        self.T = T
        self.B = builder or ProofBuilder(T)
        self.lo = {}
        self.hi = {}
        self.out = defaultdict(dict)
        self.inn = defaultdict(dict)
        self.nodes = []
        self._nodeset = set()
        self.theorems = {}
        self.max_rounds = max_rounds
        self.ticks = ticks
        self.used = 0
        self.max_instances = max_instances
        self._instances = 0
        self.pem = "PEM" in T.packs
        self._refs = {}
        self._dirty = True
        consts = set(T.signature.constants)
        for a in T.axioms:
            consts |= constants_of(a)
        self.constants = sorted(consts)
        self._seed(max_axioms)

    # ------------------------------------------------------------ plumbing

    def _tick(self):
        self.used += 1
        if self.ticks is not None and self.used > self.ticks:
            raise Exhausted()

    def _seed(self, max_axioms):
        finite, _streams = self.T._pack_streams()
        seeds = list(self.T.axioms) + list(finite)
        for e in self.T.extras:
            it = e.enumerate()
            for _ in range(max_axioms):
                try:
                    seeds.append(next(it))
                except StopIteration:
                    break
        for ax in seeds[:max_axioms]:
            try:
                self.add_theorem(self.B.thy(ax))
            except Exhausted:
                return

    def add_constants(self, names):
        new = [c for c in names if c not in self.constants]
        if not new:
            return
        self.constants = sorted(set(self.constants) | set(new))
        for F, ref in list(self.theorems.items()):
            if isinstance(F, Forall):
                self._instantiate(F, ref, new)
        for F in list(self.nodes):
            if isinstance(F, Forall):
                for c in new:
                    self._instance_node(F, c)
        self._dirty = True

    # --------------------------------------------------------------- nodes

    def add_node(self, F: Formula, pem: bool = True):
        F = elaborate(F)
        if F in self._nodeset:
            return F
        self._tick()
        # children first, so running out of ticks never leaves a dangling node
        if isinstance(F, Implies):
            self.add_node(F.ante, pem)
            self.add_node(F.cons, pem)
        elif isinstance(F, Forall):
            self.add_node(F.body, pem)
        self._nodeset.add(F)
        self.nodes.append(F)
        self._dirty = True
        v = rational_value(F)
        if v is not None:
            self.lo[F] = _Rec("const", v)
            self.hi[F] = _Rec("const", v)
        else:
            self.lo[F] = _Rec("zero", ZERO)
            self.hi[F] = _Rec("one", ONE)
        if isinstance(F, Forall):
            for c in self.constants:
                self._instance_node(F, c)
        if pem and self.pem and v is None and is_sentence(F) and _rational_free(F):
            self._pem(F)
        return F

    def _instance_node(self, F, c):
        if self._instances >= self.max_instances:
            return
        try:
            inst = substitute(F.body, F.var, Const(c))
        except CaptureError:
            return
        self._instances += 1
        self.add_node(inst)

    def _pem(self, F):
        for G in (F, Implies(F, BOT)):
            try:
                ref = self.B.ax("PEM", G)
            except SideConditionViolation:
                continue
            self._add_theorem_no_pem(ref)
        nn = Implies(Implies(F, BOT), BOT)
        if nn in self._nodeset:
            self.add_edge(nn, F, self.B.dne(F))

    def _add_theorem_no_pem(self, ref):
        F = self.B.f(ref)
        if F in self.theorems:
            return
        self.add_node(F, pem=False)
        self.theorems[F] = ref
        self._set_hi(F, _Rec("thm", ZERO, (ref,)))
        self.add_edge(F.ante, F.cons, ref, pem=False)
        nn = F.cons if isinstance(F.cons, Implies) else None
        if nn is not None and isinstance(nn.ante, Implies) and nn.cons == BOT and nn.ante.cons == BOT:
            base = nn.ante.ante
            self.add_edge(nn, base, self.B.dne(base), pem=False)

    def add_edge(self, X, Y, ref, pem=True):
        self.add_node(X, pem)
        self.add_node(Y, pem)
        if Y not in self.out[X]:
            self.out[X][Y] = ref
            self.inn[Y][X] = ref
            self._dirty = True

    def add_theorem(self, ref):
        F = self.B.f(ref)
        if F in self.theorems:
            return
        self._tick()
        self.add_node(F)
        self.theorems[F] = ref
        self._set_hi(F, _Rec("thm", ZERO, (ref,)))
        parts = _match_oplus(F)
        if parts is not None:
            self.add_theorem(self.B.oplus_left(ref))
            self.add_theorem(self.B.oplus_right(ref))
        elif isinstance(F, Implies):
            self.add_edge(F.ante, F.cons, ref)
        elif isinstance(F, Forall):
            self._instantiate(F, ref, self.constants)
        for x in sorted(free_vars(F)):
            if self.constants:
                self.add_theorem(self.B.gen(ref, x))

    def _instantiate(self, F, ref, consts):
        for c in consts:
            if self._instances >= self.max_instances:
                return
            try:
                inst = self.B.ax("FORALL1", F.var, F.body, Const(c))
            except (SideConditionViolation, CaptureError):
                continue
            self._instances += 1
            self.add_theorem(self.B.mp(ref, inst))

    # ------------------------------------------------------------ fixpoint

    def _set_lo(self, F, rec) -> bool:
        if rec.value > self.lo[F].value:
            self._tick()
            self.lo[F] = rec
            return True
        return False

    def _set_hi(self, F, rec) -> bool:
        if rec.value < self.hi[F].value:
            self._tick()
            self.hi[F] = rec
            return True
        return False

    def run(self) -> bool:
        """Propagate to a fixed point (or the round cap); False when out of ticks."""
        if not self._dirty:
            return True
        try:
            for _ in range(self.max_rounds):
                if not self._round():
                    break
        except Exhausted:
            return False
        self._dirty = False
        return True

    def _round(self) -> bool:
        changed = False
        lo, hi = self.lo, self.hi
        for F in self.nodes:
            if isinstance(F, Implies):
                A, B = F.ante, F.cons
                v = _tsub(lo[B].value, hi[A].value)
                if v > lo[F].value:
                    changed |= self._set_lo(F, _Rec("imp", v, (lo[B], hi[A])))
                v = _tsub(hi[B].value, lo[A].value)
                if v < hi[F].value:
                    changed |= self._set_hi(F, _Rec("imp", v, (hi[B], lo[A])))
                k = rational_value(B)
                if k is not None:
                    v = _tsub(k, hi[F].value)
                    if v > lo[A].value:
                        changed |= self._set_lo(A, _Rec("inv", v, (F, hi[F])))
            elif isinstance(F, Forall):
                for c in self.constants:
                    try:
                        inst = substitute(F.body, F.var, Const(c))
                    except CaptureError:
                        continue
                    r = lo.get(inst)
                    if r is not None and r.value > lo[F].value:
                        changed |= self._set_lo(F, _Rec("inst", r.value, (c, inst, r)))
                r = hi[F.body]
                if r.value < hi[F].value:
                    changed |= self._set_hi(F, _Rec("gen", r.value, (r,)))
        for X, targets in list(self.out.items()):
            for Y, ref in targets.items():
                if lo[Y].value > lo[X].value:
                    changed |= self._set_lo(X, _Rec("edge", lo[Y].value, (ref, lo[Y])))
                if hi[X].value < hi[Y].value:
                    changed |= self._set_hi(Y, _Rec("edge", hi[X].value, (ref, hi[X])))
        return changed

    # ------------------------------------------------------------- queries

    def ensure(self, F) -> Formula:
        F = elaborate(F)
        try:
            self.add_node(F)
        except Exhausted:
            pass
        self.run()
        return F

    def bounds(self, F):
        F = self.ensure(F)
        if F not in self.lo:
            return ZERO, ONE
        return self.lo[F].value, self.hi[F].value

    # -------------------------------------------------------- certificates

    def _build_lo(self, F, rec):
        key = ("lo", F, id(rec))
        hit = self._refs.get(key)
        if hit is not None:
            return hit[0]
        B = self.B
        k, a = rec.kind, rec.args
        if k == "zero":
            ref = B.weaken(B.zero(), F)
        elif k == "const":
            ref = B.identity(F) if isinstance(F, Rat) else B.rat_le(F, _const(ONE))
        elif k == "imp":
            loB, hiA = a
            A, Bf = F.ante, F.cons
            h, b = _const(hiA.value), _const(loB.value)
            ref = B.chain(B.suffix(self._build_hi(A, hiA), Bf),
                          B.prefix(self._build_lo(Bf, loB), h),
                          B.rat_bridge(h, b)[0])
        elif k == "inst":
            c, inst, r = a
            ref = B.hs(B.ax("FORALL1", F.var, F.body, Const(c)), self._build_lo(inst, r))
        elif k == "edge":
            e, r = a
            ref = B.hs(e, self._build_lo(B.f(e).cons, r))
        elif k == "inv":
            G, r = a
            h = _const(r.value)
            step = B.exch(self._build_hi(G, r))
            ref = B.mp(step, B.prefix(B.rat_bridge(h, G.cons)[0], F))
        else:  # pragma: no cover
            raise AssertionError(k)
        self._refs[key] = (ref, rec)
        return ref

    def _build_hi(self, F, rec):
        key = ("hi", F, id(rec))
        hit = self._refs.get(key)
        if hit is not None:
            return hit[0]
        B = self.B
        k, a = rec.kind, rec.args
        if k == "one":
            ref = B.hs(B.one_to_bot(), B.efq(F))
        elif k == "const":
            ref = B.identity(F) if isinstance(F, Rat) else B.one_to_bot()
        elif k == "thm":
            ref = B.mp(a[0], B.ax("L1", F, _const(ZERO)))
        elif k == "imp":
            hiB, loA = a
            A, Bf = F.ante, F.cons
            lA, h = _const(loA.value), _const(hiB.value)
            ref = B.chain(B.rat_bridge(lA, h)[1],
                          B.prefix(self._build_hi(Bf, hiB), lA),
                          B.suffix(self._build_lo(A, loA), Bf))
        elif k == "gen":
            (r,) = a
            h = _const(r.value)
            g = B.gen(self._build_hi(F.body, r), F.var)
            ref = B.mp(g, B.ax("FORALL2", F.var, h, F.body))
        elif k == "edge":
            e, r = a
            ref = B.hs(self._build_hi(B.f(e).ante, r), e)
        else:  # pragma: no cover
            raise AssertionError(k)
        self._refs[key] = (ref, rec)
        return ref

    def lower_ref(self, F, q=None):
        """Step id of ``F → q̄`` (default: the current lower bound)."""
        F = elaborate(F)
        rec = self.lo[F]
        ref = self._build_lo(F, rec)
        if q is None or Fraction(q) == rec.value:
            return ref
        q = Fraction(q)
        if q > rec.value:
            raise ValueError(f"lower bound {rec.value} does not reach {q}")
        return self.B.hs(ref, self.B.rat_le(_const(rec.value), _const(q)))

    def upper_ref(self, F, q=None):
        """Step id of ``q̄ → F`` (default: the current upper bound)."""
        F = elaborate(F)
        rec = self.hi[F]
        ref = self._build_hi(F, rec)
        if q is None or Fraction(q) == rec.value:
            return ref
        q = Fraction(q)
        if q < rec.value:
            raise ValueError(f"upper bound {rec.value} is above {q}")
        return self.B.hs(self.B.rat_le(_const(q), _const(rec.value)), ref)

    def proof(self, ref) -> Proof:
        return self.B.extract(ref)

    def prove(self, F) -> Optional[int]:
        """Step id of ``F`` itself when its upper bound is 0."""
        F = self.ensure(F)
        if F in self.theorems:
            return self.theorems[F]
        if F not in self.hi or self.hi[F].value != 0:
            return None
        return self.B.mp(self.B.zero(), self.upper_ref(F))

    def prove_implication(self, X, Y) -> Optional[int]:
        """Step id of ``X → Y`` via identity, a chain of edges or the bounds."""
        X, Y = elaborate(X), elaborate(Y)
        B = self.B
        if X == Y:
            return B.identity(X)
        self.ensure(X)
        self.ensure(Y)
        if X not in self.lo or Y not in self.lo:
            return None
        path = self._edge_path(X, Y)
        if path is not None:
            return B.chain(*path)
        l, h = self.lo[X].value, self.hi[Y].value
        if h <= l:
            lx = self.lower_ref(X)
            hy = self.upper_ref(Y)
            mid_a, mid_b = B.f(lx).cons, B.f(hy).ante
            if mid_a == mid_b:
                return B.hs(lx, hy)
            return B.chain(lx, B.rat_le(mid_a, mid_b), hy)
        return self.prove(Implies(X, Y))

    def _edge_path(self, X, Y, limit=5000):
        prev = {X: None}
        queue = [X]
        i = 0
        while i < len(queue) and i < limit:
            cur = queue[i]
            i += 1
            for nxt, ref in self.out.get(cur, {}).items():
                if nxt in prev:
                    continue
                prev[nxt] = (cur, ref)
                if nxt == Y:
                    refs = []
                    node = Y
                    while prev[node] is not None:
                        p, r = prev[node]
                        refs.append(r)
                        node = p
                    return refs[::-1]
                queue.append(nxt)
        return None

