"""Henkin-style extensions and the term model they induce.

The extension walks the pair stream of sentences and, at each step,
either linearizes the pair or adds a witness for an existential.  The
non-provability test it needs is not computable, so it is delegated to
a :class:`NonprovabilityOracle`.  Two are shipped: a sound semantic one
backed by a finite reference model and a heuristic budgeted one.

The model built from an extended theory has the theory's constants as
its universe; every degree is a stream of certified intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .coding import cantor_unpair, enumerate_sentences
from .domains import (
    DegreeStream, FormalBall, RatInterval, StreamEvent, ball_order, interval_op, refine,
)
from .errors import (
    BudgetExhausted, EmptyConstantSet, FlagViolation, OracleContradiction,
)
from .kernel.theory import TheoryHandle
from .search.bounds import BoundsProver
from .search.degree import degree_stream, prove
from .search.saturate import SearchBudget
from .semantics import FiniteStructure, evaluate, sentence_value
from .syntax import (
    App, Atom, Bottom, Const, Dist, Forall, Formula, Implies, Signature, Similar,
    constants_of, elaborate, free_vars, rational_value, substitute,
)

__all__ = [
    "NonprovabilityOracle", "SemanticOracle", "BudgetedOracle", "TraceStep", "ExtensionTrace",
    "extend", "HenkinModel", "build_model", "model_degree", "interpret_function",
    "classical_extract", "CompletionPoint", "CompletionPresentation", "complete_metric_model",
    "as_existential",
]

UNPROVABLE = "certainly-unprovable"
ADD_SAFE = "add-safe"
UNKNOWN = "unknown"


# ------------------------------------------------------------- oracles

class NonprovabilityOracle:
    """Answers whether ``φ → ψ`` is unprovable from the current stage."""

    provenance = "external"
    sound = False

    def query(self, stage: TheoryHandle, phi: Formula, psi: Formula) -> str:
        raise NotImplementedError

    def proves_existential(self, stage: TheoryHandle, phi: Formula) -> bool:
        """Whether the stage may be taken to prove the existential ``phi``."""
        raise NotImplementedError

    def witness(self, stage, var: str, body: Formula, name: str) -> None:
        """Hook called once a fresh constant ``name`` witnesses ``∃ var body``."""

    def interprets(self, phi: Formula) -> bool:
        return True


class SemanticOracle(NonprovabilityOracle):
    """Sound oracle: ``φ → ψ`` is unprovable whenever the reference model refutes it.

    Fresh witnesses are interpreted as elements where the existential's
    body attains its minimum falsity.
    """

    provenance = "semantic"
    sound = True

    def __init__(self, model: FiniteStructure):
        self.model = model

    def interprets(self, phi):
        return all(c in self.model.consts for c in constants_of(phi))

    def value(self, phi):
        return sentence_value(self.model, phi)

    def query(self, stage, phi, psi):
        return UNPROVABLE if self.value(Implies(phi, psi)) > 0 else ADD_SAFE

    def proves_existential(self, stage, phi):
        return self.value(phi) == 0

    def witness(self, stage, var, body, name):
        M = self.model
        best, arg = None, None
        for a in M.universe:
            v = evaluate(M, {var: a}, body)
            if best is None or v < best:
                best, arg = v, a
        self.model = M.with_constants({name: arg})


class BudgetedOracle(NonprovabilityOracle):
    """Heuristic oracle: whatever the budgeted search cannot prove counts as unprovable.

    It may be wrong, so everything built with it is tagged unsound.
    """

    provenance = "budgeted"
    sound = False

    def __init__(self, budget: SearchBudget):
        self.budget = budget

    def query(self, stage, phi, psi):
        return UNKNOWN if prove(stage, Implies(phi, psi), self.budget) else UNPROVABLE

    def proves_existential(self, stage, phi):
        return prove(stage, phi, self.budget) is not None


# --------------------------------------------------------------- trace

@dataclass(frozen=True)
class TraceStep:
    n: int
    phi: Formula
    psi: Formula
    action: str                  # "added", "witness" or "skipped"
    added: Optional[Formula] = None
    fresh: tuple = ()
    note: str = ""


@dataclass
class ExtensionTrace:
    steps: list = field(default_factory=list)
    provenance: str = ""
    sound: bool = True

    def additions(self):
        return [s.added for s in self.steps if s.added is not None]

    def fresh_constants(self):
        return [c for s in self.steps for c in s.fresh]

    def __len__(self):
        return len(self.steps)


def as_existential(phi: Formula):
    """``(var, body)`` when ``phi`` is the core form of ``∃ var body``."""
    if (isinstance(phi, Implies) and isinstance(phi.cons, Bottom) and isinstance(phi.ante, Forall)
            and isinstance(phi.ante.body, Implies) and isinstance(phi.ante.body.cons, Bottom)):
        return phi.ante.var, phi.ante.body.ante
    return None


def _fresh_names(sig: Signature, used):
    for k in itertools.count():
        name = f"{Signature.FRESH_PREFIX}{k}"
        if name not in used and name not in sig.constants:
            yield name


def extend(T: TheoryHandle, oracle: NonprovabilityOracle, steps: int,
           seeds: Sequence[Formula] = (), audit: Optional[SearchBudget] = None):
    """Run ``steps`` stages of the linearizing, witnessing extension.

    The sentence sequence starts with ``seeds`` and continues with the
    signature's sentence enumeration (fresh constants included).  Pairs
    are visited by Cantor pairing, so every pair recurs forever.  A
    sentence that mentions a fresh constant not yet introduced, or one
    the oracle cannot interpret, is skipped.

    With ``audit`` set, each "unprovable" answer is double-checked by a
    budgeted proof search; a hit raises :class:`OracleContradiction`.
    """
    sig = T.signature.with_fresh()
    seeds = [elaborate(s) for s in seeds]
    trace = ExtensionTrace(provenance=oracle.provenance, sound=oracle.sound)
    introduced = []
    witnessed = set()
    fresh = _fresh_names(T.signature, set())
    stage = T.extend([], signature=sig)
    if steps <= 0:
        return T, trace

    def seq(i):
        if i < len(seeds):
            return seeds[i]
        return enumerate_sentences(sig, i - len(seeds))

    cache = {}

    def get(i):
        if i not in cache:
            cache[i] = seq(i)
        return cache[i]

    def usable(f):
        for c in constants_of(f):
            if Signature.is_fresh_name(c) and c not in introduced and c not in T.signature.constants:
                return False
        return oracle.interprets(f)

    for n in range(steps):
        a, _m = cantor_unpair(n)
        i, j = cantor_unpair(a)
        phi, psi = get(i), get(j)
        if not (usable(phi) and usable(psi)):
            trace.steps.append(TraceStep(n, phi, psi, "skipped", note="uninterpreted symbols"))
            continue
        added = None
        if phi != psi:
            ans = oracle.query(stage, phi, psi)
            if ans == UNPROVABLE:
                if audit is not None and prove(stage, Implies(phi, psi), audit) is not None:
                    raise OracleContradiction(
                        f"oracle called {phi} -> {psi} unprovable, but a proof exists")
                added = Implies(psi, phi)
            elif ans == ADD_SAFE:
                added = Implies(phi, psi)
        if added is not None and not stage.member(added):
            stage = stage.extend([added], note=f"pair {n}")
            trace.steps.append(TraceStep(n, phi, psi, "added", added))
        else:
            trace.steps.append(TraceStep(n, phi, psi, "skipped"))
        ex = as_existential(phi)
        if ex is not None and phi not in witnessed and oracle.proves_existential(stage, phi):
            witnessed.add(phi)
            var, body = ex
            name = next(fresh)
            oracle.witness(stage, var, body, name)
            introduced.append(name)
            w = substitute(body, var, Const(name))
            stage = stage.extend([w], note=f"witness {name}")
            note = "semantically justified" if oracle.provenance == "semantic" else oracle.provenance
            trace.steps.append(TraceStep(n, phi, psi, "witness", w, (name,), note))
    flags = set(stage.flags) | {"linear_complete", "henkin"}
    prov = stage.provenance + (f"extension:{oracle.provenance}:{steps} steps",)
    if not oracle.sound:
        prov += ("potentially-unsound",)
    out = TheoryHandle(sig, stage.axioms, stage.packs, stage.moduli, frozenset(flags),
                       stage.extras, stage.name, prov)
    return out, trace


# --------------------------------------------------------------- model

@dataclass
class HenkinModel:
    theory: TheoryHandle
    universe: tuple
    prover: BoundsProver
    function_table: dict = field(default_factory=dict)
    provenance: list = field(default_factory=list)
    _atoms: dict = field(default_factory=dict)

    def degree(self, phi: Formula) -> DegreeStream:
        return model_degree(self, phi)

    def rho(self, a: str, b: str) -> DegreeStream:
        """Pseudo-metric stream between two constants."""
        A, B = Const(a), Const(b)
        if self.theory.signature.has_similarity:
            return model_degree(self, Similar(A, B))
        return model_degree(self, Dist(A, B))


REQUIRED_FLAGS = ("consistent", "linear_complete", "henkin")


def build_model(T: TheoryHandle, check_flags: bool = True) -> HenkinModel:
    """Term model over the constants of ``T``."""
    if check_flags:
        missing = [f for f in REQUIRED_FLAGS if f not in T.flags]
        if missing:
            raise FlagViolation(f"build_model needs the flags {missing}")
    consts = set(T.signature.constants)
    for a in T.axioms:
        consts |= constants_of(a)
    if not consts:
        raise EmptyConstantSet("the theory has no constants to form a universe")
    C = tuple(sorted(consts, key=_const_key))
    bp = BoundsProver(T)
    bp.add_constants(C)
    return HenkinModel(T, C, bp)


def _const_key(c):
    fresh = Signature.is_fresh_name(c)
    return (fresh, int(c[1:]) if fresh else 0, c)


def _combine(children, op):
    """Stream combining child streams pointwise with ``op`` (monotone in each argument)."""

    def factory():
        streams = [c() for c in children]
        cur = [None] * len(streams)
        done = [False] * len(streams)
        while True:
            for k, s in enumerate(streams):
                if done[k]:
                    continue
                try:
                    cur[k] = next(s)
                except StopIteration:
                    done[k] = True
            yield op(cur)
            if all(done):
                return

    return factory


def model_degree(M: HenkinModel, phi: Formula) -> DegreeStream:
    """Stream for the truth value of a sentence in the term model.

    Atoms come from the provability-degree stream; ``→`` and ``∀`` are
    computed from their parts (``∀`` as the maximum over the universe).
    """
    phi = elaborate(phi)
    if free_vars(phi):
        raise ValueError("model_degree needs a sentence")
    return DegreeStream(_factory(M, phi), label=str(phi))


def _factory(M, phi) -> Callable[[], Iterator]:
    v = rational_value(phi)
    if v is not None:
        return lambda: iter([RatInterval(v, v)])
    if isinstance(phi, (Atom, Similar, Dist)):
        return _memo_atom(M, phi)
    if isinstance(phi, Implies):
        a, b = _factory(M, phi.ante), _factory(M, phi.cons)
        return _combine([lambda: iter(_Pull(a)), lambda: iter(_Pull(b))],
                        lambda cur: interval_op("implies", cur[0], cur[1]))
    if isinstance(phi, Forall):
        parts = [_factory(M, substitute(phi.body, phi.var, Const(c))) for c in M.universe]

        def mx(cur):
            out = cur[0]
            for iv in cur[1:]:
                out = interval_op("max", out, iv)
            return out
        return _combine([(lambda f=f: iter(_Pull(f))) for f in parts], mx)
    raise TypeError(f"cannot evaluate {phi!r}")


def _memo_atom(M, phi):
    """Replayable atom stream; each interval is computed once per model."""
    entry = M._atoms.get(phi)
    if entry is None:
        entry = M._atoms[phi] = {"src": None, "items": [], "done": False}

    def gen():
        k = 0
        while True:
            if k < len(entry["items"]):
                yield entry["items"][k]
                k += 1
                continue
            if entry["done"]:
                return
            if entry["src"] is None:
                entry["src"] = iter(degree_stream(M.theory, phi, prover=M.prover, verify=False))
            try:
                entry["items"].append(next(entry["src"]))
            except StopIteration:
                entry["done"] = True
                return

    return gen


class _Pull:
    """Adapts a factory into an interval iterator."""

    def __init__(self, factory):
        self.factory = factory

    def __iter__(self):
        for item in self.factory():
            yield item.interval if isinstance(item, StreamEvent) else item


def interpret_function(M: HenkinModel, f: str, args: Sequence[str],
                       b: Optional[SearchBudget] = None) -> str:
    """First constant ``c`` of the universe with a checked proof of ``f(args) ≈ c``."""
    key = (f, tuple(args))
    hit = M.function_table.get(key)
    if hit is not None:
        return hit[0]
    sig = M.theory.signature
    if sig.functions.get(f) != len(args):
        raise ValueError(f"function {f}/{len(args)} not declared")
    term = App(f, tuple(Const(a) for a in args))
    for c in M.universe:
        goal = Similar(term, Const(c))
        ref = M.prover.prove(goal)
        if ref is not None:
            M.function_table[key] = (c, M.prover.proof(ref))
            return c
    if b is not None:
        for c in M.universe:
            p = prove(M.theory, Similar(term, Const(c)), b)
            if p is not None:
                M.function_table[key] = (c, p)
                return c
    raise BudgetExhausted(f"no constant c with a proof of {f}{tuple(args)} ≈ c", None)


def classical_extract(M: HenkinModel, phi: Formula, fuel: int = 256) -> bool:
    """Truth of ``phi`` in a classical term model: True for degree 0, False for 1."""
    if "PEM" not in M.theory.packs and "classical" not in M.theory.flags:
        raise FlagViolation("classical_extract needs a classical theory")
    st = model_degree(M, phi)
    for _ in range(fuel):
        try:
            iv = next(st)
        except StopIteration:
            break
        if iv.hi < 1:
            return True
        if iv.lo > 0:
            return False
    raise BudgetExhausted(f"fuel exhausted deciding {phi}; the classical flag is suspect",
                          st.current)


# ------------------------------------------------------------ completion

@dataclass
class CompletionPoint:
    """A point of the completion: formal balls with radii decreasing to 0."""

    balls: Callable[[], Iterator[FormalBall]]
    embedded: Optional[str] = None

    @classmethod
    def embed(cls, c: str) -> "CompletionPoint":
        def gen():
            for k in itertools.count():
                yield FormalBall(c, Fraction(1, 2 ** k))
        return cls(gen, embedded=c)

    @classmethod
    def of(cls, balls: Sequence[FormalBall]) -> "CompletionPoint":
        items = list(balls)
        return cls(lambda: iter(items))

    def prefix(self, n: int):
        return list(itertools.islice(self.balls(), n))


@dataclass
class CompletionPresentation:
    model: HenkinModel
    precision: Fraction

    def embed(self, c: str) -> CompletionPoint:
        if c not in self.model.universe:
            raise ValueError(f"{c} is not in the universe")
        return CompletionPoint.embed(c)

    def distance(self, p: CompletionPoint, q: CompletionPoint) -> DegreeStream:
        M = self.model
        if p.embedded is not None and q.embedded is not None:
            return M.rho(p.embedded, q.embedded)

        def factory():
            cur = RatInterval(0, 1)
            for b1, b2 in zip(p.balls(), q.balls()):
                iv = refine(M.rho(b1.center, b2.center), max(b1.radius + b2.radius, self.precision),
                            4096)
                slack = b1.radius + b2.radius
                lo = max(iv.lo - slack, Fraction(0))
                hi = min(iv.hi + slack, Fraction(1))
                nxt = cur.intersect(RatInterval(lo, hi))
                cur = nxt if nxt is not None else cur
                yield cur
        return DegreeStream(factory, label="distance")

    def accepts(self, point: CompletionPoint, n: int, step_budget: int = 4096) -> bool:
        """Check that the first ``n`` balls form a strictly way-below chain."""
        balls = point.prefix(n)
        for b1, b2 in zip(balls, balls[1:]):
            if not b2.radius < b1.radius:
                return False
            gap = b1.radius - b2.radius
            st = self.model.rho(b1.center, b2.center)
            ok = False
            for _ in range(step_budget):
                try:
                    iv = next(st)
                except StopIteration:
                    break
                if iv.hi < gap:
                    ok = True
                    break
                if iv.lo >= gap:
                    return False
            if not ok:
                return False
            assert ball_order(b1, b2, lambda a, b: st.current.hi) == "way_below"
        return True

    def evaluate(self, phi: Formula) -> DegreeStream:
        return model_degree(self.model, phi)


def complete_metric_model(M: HenkinModel, precision=Fraction(1, 64)) -> CompletionPresentation:
    """Presentation of the metric completion of the term model."""
    precision = Fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    sig = M.theory.signature
    if not (sig.has_similarity or sig.has_metric):
        raise ValueError("the theory declares neither similarity nor a metric")
    return CompletionPresentation(M, precision)


