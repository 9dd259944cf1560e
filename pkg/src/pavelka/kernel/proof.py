"""Proof objects, the checker and the proof file format.

A proof file looks like::

    (proof
      (1 (thy (p)))
      (2 (thy (-> (p) (q))))
      (3 (mp 1 2) (q)))

Step indices are 1-based.  ``(mp i j)`` takes the minor premise ``φ``
from step ``i`` and the major premise ``φ → ψ`` from step ``j``.  A
trailing formula after the justification is optional; when present the
checker verifies it against the re-derived conclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from ..errors import InvalidStep, MembershipRejected, SideConditionViolation
from ..parser import (
    ParseError, SList, _atom, _nat, format_rational, formula_from_sexpr,
    parse_rational, read_one, term_to_sexpr, to_sexpr, _Resolver,
)
from ..syntax import Forall, Formula, Implies, elaborate
from .schemas import SHAPES, PACK_OF, instantiate_axiom

__all__ = ["Ax", "Thy", "MP", "Gen", "ProofStep", "Proof", "check_proof",
           "parse_proof", "print_proof"]


@dataclass(frozen=True)
class Ax:
    schema: str
    params: tuple


@dataclass(frozen=True)
class Thy:
    formula: Formula


@dataclass(frozen=True)
class MP:
    minor: int
    major: int


@dataclass(frozen=True)
class Gen:
    premise: int
    var: str


Justification = Union[Ax, Thy, MP, Gen]


@dataclass(frozen=True)
class ProofStep:
    just: Justification
    formula: Optional[Formula] = None


@dataclass(frozen=True)
class Proof:
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("a proof needs at least one step")

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.steps[-1].formula

    def __len__(self):
        return len(self.steps)


def _derive(i, just, done, theory):
    if isinstance(just, Ax):
        if just.schema not in SHAPES:
            raise InvalidStep(i, f"unknown schema {just.schema}")
        pack = PACK_OF.get(just.schema)
        if pack is not None and (theory is None or pack not in theory.packs):
            raise InvalidStep(i, f"schema {just.schema} belongs to the {pack} pack, "
                                 "which the theory does not enable")
        try:
            return instantiate_axiom(just.schema, just.params, theory)
        except SideConditionViolation as e:
            raise InvalidStep(i, f"side condition: {e}") from None
    if isinstance(just, Thy):
        f = elaborate(just.formula)
        if theory is None or not theory.member(f):
            raise MembershipRejected(i, f)
        return f
    if isinstance(just, MP):
        for k in (just.minor, just.major):
            if not 1 <= k < i:
                raise InvalidStep(i, f"mp refers to step {k}, which is not earlier")
        a, b = done[just.minor - 1], done[just.major - 1]
        if isinstance(b, Implies) and b.ante == a:
            return b.cons
        if isinstance(a, Implies) and a.ante == b:
            return a.cons
        raise InvalidStep(i, f"mp shapes do not match (steps {just.minor} and {just.major})")
    if isinstance(just, Gen):
        if not 1 <= just.premise < i:
            raise InvalidStep(i, f"gen refers to step {just.premise}, which is not earlier")
        return Forall(just.var, done[just.premise - 1])
    raise InvalidStep(i, f"unknown justification {just!r}")


def check_proof(p: Proof, T=None) -> Formula:
    """Validate every step of ``p`` against theory ``T`` and return the conclusion."""
    done = []
    for i, step in enumerate(p.steps, start=1):
        f = _derive(i, step.just, done, T)
        if step.formula is not None and elaborate(step.formula) != f:
            raise InvalidStep(i, "stated formula differs from the derived one")
        done.append(f)
    return done[-1]


# ---------------------------------------------------------------- files

def _param_from_sexpr(kind, x, sig, schema):
    R = _Resolver(sig)
    if kind == "f":
        return formula_from_sexpr(x, sig)
    if kind == "t":
        return R.term(x, frozenset())
    if kind == "v":
        return _atom(x, "variable")
    if kind == "q":
        return parse_rational(x)
    if kind == "n":
        return _nat(x)
    if kind == "s":
        return _atom(x, "symbol")
    if kind == "T":
        if not isinstance(x, SList):
            raise ParseError(f"{schema}: expected a term list", getattr(x, "pos", None))
        return tuple(R.term(t, frozenset()) for t in x)
    raise AssertionError(kind)


def _param_to_sexpr(kind, v):
    if kind == "f":
        return to_sexpr(v)
    if kind == "t":
        return term_to_sexpr(v)
    if kind == "q":
        return format_rational(Fraction(v))
    if kind == "T":
        return "(" + " ".join(term_to_sexpr(t) for t in v) + ")"
    return str(v)


def parse_proof(text, sig=None) -> Proof:
    top = read_one(text) if isinstance(text, str) else text
    if not isinstance(top, SList) or not top or top[0] != "proof":
        raise ParseError("expected (proof ...)", getattr(top, "pos", None))
    steps = []
    for k, item in enumerate(top[1:], start=1):
        if not isinstance(item, SList) or len(item) not in (2, 3):
            raise ParseError("step must be (N justification [formula])", getattr(item, "pos", None))
        if _nat(item[0]) != k:
            raise ParseError(f"expected step number {k}", item[0].pos)
        j = item[1]
        if not isinstance(j, SList) or not j:
            raise ParseError("bad justification", getattr(j, "pos", None))
        kind = _atom(j[0])
        if kind in ("thy", "hyp"):
            if len(j) != 2:
                raise ParseError(f"({kind} formula)", j.pos)
            just = Thy(formula_from_sexpr(j[1], sig))
        elif kind == "ax":
            if len(j) < 2:
                raise ParseError("(ax SCHEMA params...)", j.pos)
            schema = _atom(j[1])
            shape = SHAPES.get(schema)
            if shape is None:
                raise ParseError(f"unknown schema {schema!r}", j[1].pos)
            if len(j) - 2 != len(shape):
                raise ParseError(f"{schema} takes {len(shape)} parameters", j.pos)
            just = Ax(schema, tuple(_param_from_sexpr(s, x, sig, schema)
                                    for s, x in zip(shape, j[2:])))
        elif kind == "mp":
            if len(j) != 3:
                raise ParseError("(mp i j)", j.pos)
            just = MP(_nat(j[1]), _nat(j[2]))
        elif kind == "gen":
            if len(j) != 3:
                raise ParseError("(gen i x)", j.pos)
            just = Gen(_nat(j[1]), _atom(j[2]))
        else:
            raise ParseError(f"unknown justification {kind!r}", j.pos)
        f = formula_from_sexpr(item[2], sig) if len(item) == 3 else None
        steps.append(ProofStep(just, f))
    if not steps:
        raise ParseError("empty proof", top.pos)
    return Proof(tuple(steps))


def _just_to_sexpr(j) -> str:
    if isinstance(j, Thy):
        return f"(thy {to_sexpr(j.formula)})"
    if isinstance(j, Ax):
        params = " ".join(_param_to_sexpr(k, v) for k, v in zip(SHAPES[j.schema], j.params))
        return f"(ax {j.schema}" + (f" {params}" if params else "") + ")"
    if isinstance(j, MP):
        return f"(mp {j.minor} {j.major})"
    return f"(gen {j.premise} {j.var})"


def print_proof(p: Proof, with_formulas: bool = True) -> str:
    lines = ["(proof"]
    for i, s in enumerate(p.steps, start=1):
        f = f" {to_sexpr(s.formula)}" if with_formulas and s.formula is not None else ""
        lines.append(f"  ({i} {_just_to_sexpr(s.just)}{f})")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


