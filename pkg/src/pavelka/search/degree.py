"""Provability degrees: streaming, comparison and the classical decision procedure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..coding import farey_rational
from ..domains import DegreeStream, RatInterval, StreamEvent
from ..errors import FlagViolation, InconsistentStream
from ..kernel.proof import Proof, check_proof
from ..syntax import Formula, Implies, Rat, Bottom, elaborate, free_vars, subformulas, size
from .bounds import BoundsProver
from .saturate import SearchBudget, enumerate_theorems

__all__ = [
    "Verdict", "prover_for", "degree_stream", "compare_degrees", "decide_complete",
    "weak_entailment_check", "prove",
]

_CACHE = {}
# cheap blind pass tried before the bounds prover, so short proofs stay short
_QUICK = SearchBudget(max_steps=3, max_candidates=64, ticks=400)
_CACHE_MAX = 64


def prover_for(T, budget: Optional[SearchBudget] = None) -> BoundsProver:
    """Shared bounds prover for ``T``; a tick-limited budget gets a private one."""
    if budget is not None and budget.ticks is not None:
        return BoundsProver(T, ticks=budget.ticks)
    hit = _CACHE.get(id(T))
    if hit is not None and hit[0] is T:
        return hit[1]
    if len(_CACHE) >= _CACHE_MAX:
        _CACHE.pop(next(iter(_CACHE)))
    bp = BoundsProver(T)
    _CACHE[id(T)] = (T, bp)
    return bp


@dataclass(frozen=True)
class Verdict:
    answer: str
    proof: Optional[Proof] = None
    note: str = ""

    def __eq__(self, other):
        if isinstance(other, str):
            return self.answer == other
        return isinstance(other, Verdict) and (self.answer, self.proof) == (other.answer, other.proof)

    def __hash__(self):
        return hash(self.answer)

    def __str__(self):
        return self.answer


def _require_sentence(phi):
    phi = elaborate(phi)
    if free_vars(phi):
        raise ValueError(f"expected a sentence, got free variables {sorted(free_vars(phi))}")
    return phi


def _blind(T, goals, b):
    """First enumerated proof of any goal: ``(index, proof)`` or ``None``."""
    goals = [elaborate(g) for g in goals]
    seeds = sorted({s for g in goals for s in subformulas(g)}, key=size)
    for ev in enumerate_theorems(T, b, seeds=seeds):
        for i, g in enumerate(goals):
            if ev.formula == g:
                return i, ev.proof
    return None


def prove(T, phi: Formula, b: Optional[SearchBudget] = None) -> Optional[Proof]:
    """A checked proof of ``phi`` from ``T``, or ``None`` within the budget."""
    phi = elaborate(phi)
    hit = _blind(T, [phi], _QUICK)
    if hit is not None:
        return hit[1]
    bp = prover_for(T, b)
    ref = bp.prove(phi)
    if ref is not None:
        p = bp.proof(ref)
        check_proof(p, T)
        return p
    if b is None:
        return None
    hit = _blind(T, [phi], b)
    return hit[1] if hit else None


def _implication(T, bp, X, Y, b):
    ref = bp.prove_implication(X, Y)
    if ref is not None:
        return bp.proof(ref)
    return None


def degree_stream(T, phi: Formula, *, erratum: bool = False, prover: Optional[BoundsProver] = None,
                  search_budget: Optional[SearchBudget] = None, verify: bool = True) -> DegreeStream:
    """Nested intervals around the provability degree of the sentence ``phi``.

    Rationals are visited in Farey order.  For each ``q`` the stream tries
    both ``φ → q̄`` (certifying ``q ≤ |φ|``, so the lower end rises) and
    ``q̄ → φ`` (certifying ``|φ| ≤ q``, so the upper end falls), emitting
    the resulting interval with the certificates.  ``erratum=True``
    swaps the two assignments, reproducing the transposed printed loop;
    it skips no rationals, so a false step surfaces as crossing bounds.
    """
    phi = _require_sentence(phi)

    def factory():
        bp = prover or prover_for(T)
        bp.ensure(phi)
        r, s = Fraction(0), Fraction(1)
        yield StreamEvent(RatInterval(r, s), None, "start")
        for i in itertools.count():
            q = farey_rational(i)
            if not erratum:
                if r == s:
                    return
                if not r <= q <= s:
                    continue
            bp.run()
            lo, hi = bp.lo[phi].value, bp.hi[phi].value
            certs = []
            lower = upper = None
            if lo >= q:
                lower = bp.proof(bp.lower_ref(phi, q))
            if hi <= q:
                upper = bp.proof(bp.upper_ref(phi, q))
            if lower is None and upper is None and search_budget is not None:
                hit = _blind(T, [Implies(phi, Rat(q)), Implies(Rat(q), phi)], search_budget)
                if hit is not None:
                    if hit[0] == 0:
                        lower = hit[1]
                    else:
                        upper = hit[1]
            for p in (lower, upper):
                if p is not None:
                    if verify:
                        check_proof(p, T)
                    certs.append(p)
            nr, ns = r, s
            if erratum:
                if lower is not None:
                    ns = q
                if upper is not None:
                    nr = q
            else:
                if lower is not None:
                    nr = max(r, q)
                if upper is not None:
                    ns = min(s, q)
            if nr > ns:
                raise InconsistentStream(
                    f"bounds crossed at q={q}: lower {nr} above upper {ns}",
                    RatInterval(r, s), (nr, ns), certs)
            r, s = nr, ns
            yield StreamEvent(RatInterval(r, s), tuple(certs) or None, f"q={q}")

    st = DegreeStream(factory, label=str(phi))
    st.meta["mode"] = "erratum" if erratum else "corrected"
    return st


def compare_degrees(T, phi: Formula, psi: Formula, b: Optional[SearchBudget] = None) -> Verdict:
    """``LE`` with a proof of ``ψ → φ``, ``GE`` with a proof of ``φ → ψ``, or ``exhausted``."""
    phi, psi = _require_sentence(phi), _require_sentence(psi)
    bp = prover_for(T, b)
    p = _implication(T, bp, psi, phi, b)
    if p is not None:
        check_proof(p, T)
        return Verdict("LE", p)
    p = _implication(T, bp, phi, psi, b)
    if p is not None:
        check_proof(p, T)
        return Verdict("GE", p)
    if b is not None:
        hit = _blind(T, [Implies(psi, phi), Implies(phi, psi)], b)
        if hit is not None:
            return Verdict("LE" if hit[0] == 0 else "GE", hit[1])
    return Verdict("exhausted")


def decide_complete(T, phi: Formula, b: Optional[SearchBudget] = None) -> Verdict:
    """``true`` with a proof of ``φ``, ``false`` with a proof of ``¬φ``, or ``exhausted``."""
    phi = _require_sentence(phi)
    neg = Implies(phi, Bottom())
    bp = prover_for(T, b)
    found = {}
    for key, goal in (("true", phi), ("false", neg)):
        ref = bp.prove(goal)
        if ref is not None:
            found[key] = bp.proof(ref)
    if len(found) == 2:
        raise FlagViolation(f"both {phi} and its negation are provable; the theory is not consistent")
    if not found and b is not None:
        hit = _blind(T, [phi, neg], b)
        if hit is not None:
            found["true" if hit[0] == 0 else "false"] = hit[1]
    if not found:
        return Verdict("exhausted")
    (key, p), = found.items()
    check_proof(p, T)
    return Verdict(key, p)


def weak_entailment_check(T, phi: Formula, q, b: Optional[SearchBudget] = None) -> Verdict:
    """``proved`` with a proof of ``q̄ → φ`` (that is, ``φ ∸ q``), else ``exhausted``."""
    q = Fraction(q)
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    phi = _require_sentence(phi)
    bp = prover_for(T, b)
    if bp.bounds(phi)[1] <= q:
        p = bp.proof(bp.upper_ref(phi, q))
        check_proof(p, T)
        return Verdict("proved", p)
    if b is not None:
        hit = _blind(T, [Implies(Rat(q), phi)], b)
        if hit is not None:
            return Verdict("proved", hit[1])
    return Verdict("exhausted")
