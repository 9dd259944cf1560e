"""Fair, budgeted enumeration of theorems of a theory.

Round ``k`` widens three dials at once: the number of theory axioms
taken from the handle's enumerator, the pool of formulas used to
instantiate logical schemas, and the denominators admitted in R
instances.  After each widening the known theorems are closed under
modus ponens and generalisation, keeping only proofs of at most
``max_steps`` steps.  Every provable formula shows up once all three
dials and the step bound are large enough.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from ..coding import enumerate_sentences, farey_rationals
from ..errors import SideConditionViolation
from ..kernel.builder import ProofBuilder
from ..kernel.proof import Proof
from ..syntax import (
    CaptureError, Const, Forall, Formula, Implies, Rat, elaborate, free_vars,
    size, subformulas,
)

__all__ = ["SearchBudget", "TheoremEvent", "enumerate_theorems", "search_proof",
           "default_budget"]

ENV_BUDGET = "PAVELKA_DEFAULT_BUDGET"


@dataclass(frozen=True)
class SearchBudget:
    """Finite stand-in for an unbounded proof search.

    ``max_steps`` bounds proof length, ``max_candidates`` the number of
    emitted theorems, and ``ticks`` (when set) the total work units,
    where one tick is one candidate formula considered.
    """

    max_steps: int = 8
    max_candidates: int = 2000
    ticks: Optional[int] = None

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_candidates <= 0:
            raise ValueError("budgets must be positive")
        if self.ticks is not None and self.ticks <= 0:
            raise ValueError("budgets must be positive")

    def scaled(self, factor: int) -> "SearchBudget":
        t = None if self.ticks is None else self.ticks * factor
        return SearchBudget(self.max_steps, self.max_candidates * factor, t)


def default_budget() -> SearchBudget:
    """Budget from ``PAVELKA_DEFAULT_BUDGET`` (a tick count) or the built-in default."""
    raw = os.environ.get(ENV_BUDGET)
    if raw:
        n = int(raw)
        return SearchBudget(ticks=n, max_candidates=max(n, 1))
    return SearchBudget()


@dataclass(frozen=True)
class TheoremEvent:
    formula: Formula
    proof: Proof
    ordinal: int


class _Ticks:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spend(self, n=1) -> bool:
        self.used += n
        return self.limit is None or self.used <= self.limit


def _pool(T, k, seeds, axioms):
    out = list(seeds)
    for ax in axioms[:k]:
        out.extend(f for f in subformulas(ax) if not free_vars(f))
    sig = T.signature
    for i in range(k):
        try:
            out.append(enumerate_sentences(sig, i))
        except Exception:
            break
    return list(dict.fromkeys(out))


def enumerate_theorems(T, b: Optional[SearchBudget] = None,
                       seeds: Iterable[Formula] = ()) -> Iterator[TheoremEvent]:
    """Yield checked theorems of ``T`` until the budget runs out.

    ``seeds`` are extra formulas to put at the front of the instantiation
    pool; goal-directed callers pass the subformulas of their goal.
    """
    b = b or default_budget()
    B = ProofBuilder(T)
    ticks = _Ticks(b.ticks)
    seeds = [elaborate(s) for s in seeds]
    known = {}          # formula -> (ref, proof size)
    emitted = 0
    axioms_iter = T.enumerate()
    axioms = []
    tried = set()
    constants = sorted(T.signature.constants)

    def add(ref):
        nonlocal emitted
        f = B.f(ref)
        if f in known:
            return None
        n = B.size(ref)
        if n > b.max_steps:
            return None
        known[f] = (ref, n)
        ev = TheoremEvent(f, B.extract(ref), emitted)
        emitted += 1
        return ev

    def attempt(kind, args):
        key = (kind, args)
        if key in tried:
            return None
        tried.add(key)
        if not ticks.spend():
            raise _Stop
        try:
            ref = B.thy(args[0]) if kind == "thy" else B.ax(kind, *args)
        except (SideConditionViolation, CaptureError, ValueError):
            return None
        return add(ref)

    try:
        for k in range(1, b.max_candidates + 1):
            for ax in itertools.islice(axioms_iter, 1):
                axioms.append(ax)
            pool = _pool(T, k, seeds, axioms)[:k + 1]
            for ax in axioms:
                ev = attempt("thy", (ax,))
                if ev is not None:
                    yield ev
                    if emitted >= b.max_candidates:
                        return
            # theory-only consequences first, so short modus ponens chains surface early
            yield from _close(B, known, add, ticks, b, lambda: emitted)
            if emitted >= b.max_candidates:
                return
            steps = []
            for a, c in itertools.product(pool, repeat=2):
                steps += [("L1", (a, c)), ("L3", (a, c)), ("L4", (a, c))]
            steps += [("L2", t) for t in itertools.product(pool, repeat=3)]
            rats = [Rat(q) for q in farey_rationals(k + 1)]
            steps += [("R", t) for t in itertools.product(rats, repeat=2)]
            for f in pool:
                if isinstance(f, Forall):
                    steps += [("FORALL1", (f.var, f.body, Const(c))) for c in constants]
            for kind, args in steps:
                ev = attempt(kind, args)
                if ev is not None:
                    yield ev
                    if emitted >= b.max_candidates:
                        return
            yield from _close(B, known, add, ticks, b, lambda: emitted)
            if emitted >= b.max_candidates:
                return
    except _Stop:
        return


class _Stop(Exception):
    pass


def _close(B, known, add, ticks, b, count):
    """Close ``known`` under mp and gen (bounded by proof size)."""
    changed = True
    while changed:
        changed = False
        items = list(known.items())
        by_ante = {}
        for f, (ref, n) in items:
            if isinstance(f, Implies):
                by_ante.setdefault(f.ante, []).append((f, ref, n))
        for f, (ref, n) in items:
            for g, gref, gn in by_ante.get(f, ()):
                if g.cons in known or n + gn + 1 > b.max_steps:
                    continue
                if not ticks.spend():
                    raise _Stop
                ev = add(B.mp(ref, gref))
                if ev is not None:
                    changed = True
                    yield ev
                    if count() >= b.max_candidates:
                        return
        for f, (ref, n) in items:
            if n + 1 > b.max_steps:
                continue
            for x in sorted(free_vars(f)):
                if Forall(x, f) in known:
                    continue
                if not ticks.spend():
                    raise _Stop
                ev = add(B.gen(ref, x))
                if ev is not None:
                    changed = True
                    yield ev
                    if count() >= b.max_candidates:
                        return


def search_proof(T, goal: Formula, b: Optional[SearchBudget] = None) -> Optional[Proof]:
    """Blind goal-directed search: the first enumerated proof of ``goal``, if any."""
    goal = elaborate(goal)
    seeds = sorted(set(subformulas(goal)), key=size)
    for ev in enumerate_theorems(T, b, seeds=seeds):
        if ev.formula == goal:
            return ev.proof
    return None
