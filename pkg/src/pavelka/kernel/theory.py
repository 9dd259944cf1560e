"""Theory handles: decidable membership plus a fair axiom enumerator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Optional

from ..coding import farey_rationals
from ..syntax import Forall, Formula, Signature, Var, elaborate
from .schemas import instantiate_axiom, match_pack, ul_formula, ul_eps_for

__all__ = ["TheoryHandle", "ExtraAxioms"]

FLAG_NAMES = frozenset({"consistent", "linear_complete", "henkin", "classical"})


@dataclass(frozen=True)
class ExtraAxioms:
    """An infinite (or large) decidable axiom family.

    ``member`` decides membership of core formulas; ``enumerate`` returns
    a fresh iterator over the family.
    """

    name: str
    member: Callable[[Formula], bool]
    enumerate: Callable[[], Iterator[Formula]]


@dataclass(frozen=True)
class TheoryHandle:
    signature: Signature
    axioms: tuple = ()
    packs: frozenset = frozenset()
    moduli: dict = field(default_factory=dict)
    flags: frozenset = frozenset()
    extras: tuple = ()
    name: str = "T"
    provenance: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(dict.fromkeys(elaborate(a) for a in self.axioms)))
        object.__setattr__(self, "packs", frozenset(self.packs))
        object.__setattr__(self, "flags", frozenset(self.flags))
        object.__setattr__(self, "extras", tuple(self.extras))
        bad = self.flags - FLAG_NAMES
        if bad:
            raise ValueError(f"unknown flags {sorted(bad)}")
        object.__setattr__(self, "_axset", frozenset(self.axioms))

    # construction helpers

    @classmethod
    def from_file(cls, tf, packs: Optional[Iterable[str]] = None) -> "TheoryHandle":
        """Handle for a parsed theory file; packs default from its declarations."""
        sig = tf.signature
        if packs is None:
            packs = set()
            if sig.has_similarity:
                packs.add("S")
                if tf.congruence:
                    packs.add("S4")
            if sig.has_metric:
                packs.add("SM")
                if tf.moduli:
                    packs.add("UL")
            if "classical" in tf.flags:
                packs.add("PEM")
        return cls(sig, tuple(tf.axioms), frozenset(packs), dict(tf.moduli),
                   frozenset(tf.flags), name=tf.name)

    def extend(self, formulas: Iterable[Formula], signature: Optional[Signature] = None,
               note: str = "") -> "TheoryHandle":
        new = tuple(self.axioms) + tuple(elaborate(f) for f in formulas)
        return replace(self, axioms=new, signature=signature or self.signature,
                       provenance=self.provenance + ((note,) if note else ()))

    def with_flags(self, *flags) -> "TheoryHandle":
        return replace(self, flags=self.flags | set(flags))

    def with_packs(self, *packs) -> "TheoryHandle":
        return replace(self, packs=self.packs | set(packs))

    def with_extras(self, *extras) -> "TheoryHandle":
        return replace(self, extras=self.extras + tuple(extras))

    # membership

    def member(self, phi: Formula) -> bool:
        phi = elaborate(phi)
        if phi in self._axset:
            return True
        if self.packs and match_pack(phi, self.packs, self) is not None:
            return True
        return any(e.member(phi) for e in self.extras)

    __contains__ = member

    # enumeration

    def _pack_streams(self):
        sig = self.signature
        x, y, z = Var("x"), Var("y"), Var("z")

        def closed(f, *vs):
            for v in reversed(vs):
                f = Forall(v, f)
            return f

        finite, streams = [], []
        if "SM" in self.packs:
            finite.extend([closed(instantiate_axiom("SM1", (x,)), "x"),
                           closed(instantiate_axiom("SM2", (x, y)), "x", "y"),
                           closed(instantiate_axiom("SM3", (x, y, z)), "x", "y", "z")])
        if "S" in self.packs:
            finite.extend([closed(instantiate_axiom("S1", (x,)), "x"),
                           closed(instantiate_axiom("S2", (x, y)), "x", "y"),
                           closed(instantiate_axiom("S3", (x, y, z)), "x", "y", "z")])
        if "S4" in self.packs:
            items = []
            for kind, table in (("S4_R", sig.relations), ("S4_f", sig.functions)):
                for sym, k in table.items():
                    if k:
                        xs = tuple(Var(f"x{i}") for i in range(k))
                        ys = tuple(Var(f"y{i}") for i in range(k))
                        f = instantiate_axiom(kind, (sym, xs, ys), self)
                        items.append(closed(f, *(v.name for v in xs + ys)))
            finite.extend(items)
        if "UL" in self.packs and self.moduli:
            streams.append(self.ul_stream())
        if "PEM" in self.packs:
            streams.append(self.pem_stream())
        return finite, streams

    def ul_stream(self, max_den: Optional[int] = None):
        """UL instances by increasing denominator bound D = 2, 3, ..."""
        sig = self.signature
        D = 2
        seen = set()
        while max_den is None or D <= max_den:
            for sym, mod in self.moduli.items():
                kind = "rel" if sym in sig.relations else "fun"
                arity = (sig.relations if kind == "rel" else sig.functions).get(sym, 0)
                for i in range(arity):
                    for q in farey_rationals(D):
                        for r in farey_rationals(D):
                            key = (sym, i, q, r)
                            if key in seen or not mod.admits(q, r):
                                continue
                            seen.add(key)
                            yield ul_formula(sym, kind, arity, i, q, r)
            D += 1

    def pem_stream(self):
        from ..coding import sentences
        from .schemas import pem_formula, _rational_free
        for phi in sentences(self.signature):
            if _rational_free(phi):
                yield pem_formula(phi)

    def enumerate(self) -> Iterator[Formula]:
        """Fair enumeration: explicit axioms, finite packs, then infinite families round-robin."""
        yield from self.axioms
        finite, streams = self._pack_streams()
        yield from finite
        streams = streams + [e.enumerate() for e in self.extras]
        while streams:
            alive = []
            for s in streams:
                try:
                    yield next(s)
                    alive.append(s)
                except StopIteration:
                    pass
            streams = alive

    def first_axioms(self, n: int) -> list:
        out = []
        for f in self.enumerate():
            if len(out) >= n:
                break
            out.append(f)
        return out

    def ul_instances_with_eps(self, max_den: int):
        """``(symbol, i, eps, q, r, formula)`` records for the UL stream up to ``max_den``."""
        sig = self.signature
        out = []
        for sym, mod in self.moduli.items():
            kind = "rel" if sym in sig.relations else "fun"
            arity = (sig.relations if kind == "rel" else sig.functions).get(sym, 0)
            for i in range(arity):
                for q in farey_rationals(max_den):
                    for r in farey_rationals(max_den):
                        eps = ul_eps_for(mod, q, r)
                        if eps is not None:
                            out.append((sym, i, eps, q, r, ul_formula(sym, kind, arity, i, q, r)))
        return out


