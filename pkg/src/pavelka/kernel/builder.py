"""A deduplicating proof DAG with derived rules of Łukasiewicz logic.

Steps are stored once per formula; :meth:`ProofBuilder.extract` prunes
the DAG to what a conclusion needs and renumbers it into a linear
:class:`~pavelka.kernel.proof.Proof`.

The propositional lemmas (identity, exchange, double negation, ...) are
replayed from condensed-detachment terms over L1–L4: ``D(a, b)`` applies
modus ponens with major premise ``a`` and minor premise ``b``.  The
metavariables left open by the most general unifier are filled with
``bot``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from ..syntax import Bottom, Formula, Forall, Implies, Rat, rational_value
from .proof import Ax, Gen, MP, Proof, ProofStep, Thy
from .schemas import instantiate_axiom, neg

__all__ = ["ProofBuilder", "LEMMAS"]

BOT = Bottom()

# ------------------------------------------------ condensed detachment

# terms: int metavariable | ("C", a, b) | ("F",) | ("K", formula)


def _C(a, b):
    return ("C", a, b)


_F = ("F",)


def _N(a):
    return _C(a, _F)


_AXIOM_PATTERNS = {
    "1": (_C(0, _C(1, 0)), (0, 1)),
    "2": (_C(_C(0, 1), _C(_C(1, 2), _C(0, 2))), (0, 1, 2)),
    "3": (_C(_C(_C(0, 1), 1), _C(_C(1, 0), 0)), (0, 1)),
    "4": (_C(_C(_N(0), _N(1)), _C(1, 0)), (0, 1)),
}

# name -> (statement pattern over metavars 0,1,2, parameter order, D-term)
LEMMAS = {
    "ID": (_C(0, 0), (0,), "D(4,D(D(2,1),4))"),
    "ASSERT": (_C(0, _C(_C(0, 1), 1)), (0, 1), "D(D(2,1),3)"),
    "DNE": (_C(_N(_N(0)), 0), (0,), "D(4,D(D(2,1),3))"),
    "EFQ": (_C(_F, 0), (0,), "D(4,D(1,D(4,D(4,3))))"),
    "EXCH": (_C(_C(0, _C(1, 2)), _C(1, _C(0, 2))), (0, 1, 2), "D(D(2,2),D(2,D(D(2,1),3)))"),
    "INTRO": (_C(0, _C(1, _N(_C(0, _N(1))))), (0, 1), "D(D(2,ASSERT),EXCH)"),
    "ER": (_C(_N(_C(0, _N(1))), 1), (0, 1), "D(4,D(EXCH,D(2,1)))"),
    "EL": (_C(_N(_C(0, _N(1))), 0), (0, 1), "D(4,D(EXCH,D(2,D(D(2,1),4))))"),
}


def _walk(t, s):
    while isinstance(t, int) and t in s:
        t = s[t]
    return t


def _occurs(v, t, s):
    t = _walk(t, s)
    if isinstance(t, int):
        return t == v
    if t[0] == "C":
        return _occurs(v, t[1], s) or _occurs(v, t[2], s)
    return False


def _unify(a, b, s):
    a, b = _walk(a, s), _walk(b, s)
    if a == b:
        return s
    if isinstance(a, int):
        if _occurs(a, b, s):
            raise ValueError("occurs check")
        s[a] = b
        return s
    if isinstance(b, int):
        return _unify(b, a, s)
    if a[0] != b[0]:
        raise ValueError("clash")
    if a[0] == "C":
        _unify(a[1], b[1], s)
        return _unify(a[2], b[2], s)
    if a != b:
        raise ValueError("clash")
    return s


def _resolve(t, s):
    t = _walk(t, s)
    if isinstance(t, tuple) and t[0] == "C":
        return _C(_resolve(t[1], s), _resolve(t[2], s))
    return t


def _rename(t, off):
    if isinstance(t, int):
        return t + off
    if t[0] == "C":
        return _C(_rename(t[1], off), _rename(t[2], off))
    return t


def _parse_dterm(text):
    toks = re.findall(r"D|\(|\)|,|[A-Z]+|\d", text)
    pos = 0

    def go():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok == "D":
            assert toks[pos] == "("
            pos += 1
            a = go()
            assert toks[pos] == ","
            pos += 1
            b = go()
            assert toks[pos] == ")"
            pos += 1
            return ("D", a, b)
        return ("leaf", tok)
    tree = go()
    assert pos == len(toks)
    return tree


@lru_cache(maxsize=None)
def _template(name):
    """Leaf parameters of lemma ``name`` as terms over its statement metavars."""
    stmt, order, dterm = LEMMAS[name]
    counter = [100]
    s = {}

    def leaf_pattern(tok):
        if tok in _AXIOM_PATTERNS:
            pat, params = _AXIOM_PATTERNS[tok]
        else:
            pat, params = LEMMAS[tok][0], LEMMAS[tok][1]
        off = counter[0]
        counter[0] += 10
        return _rename(pat, off), tuple(p + off for p in params)

    def build(node):
        if node[0] == "leaf":
            pat, params = leaf_pattern(node[1])
            return pat, ("leaf", node[1], params)
        maj_pat, maj = build(node[1])
        min_pat, mnr = build(node[2])
        head = _walk(maj_pat, s)
        if isinstance(head, int):
            fresh_a, fresh_b = counter[0], counter[0] + 1
            counter[0] += 2
            _unify(head, _C(fresh_a, fresh_b), s)
            head = _walk(maj_pat, s)
        _unify(head[1], min_pat, s)
        return head[2], ("D", maj, mnr)

    result, tree = build(_parse_dterm(dterm))
    _unify(result, stmt, s)

    def finish(node):
        if node[0] == "leaf":
            return ("leaf", node[1], tuple(_resolve(p, s) for p in node[2]))
        return ("D", finish(node[1]), finish(node[2]))
    for v in order:
        if not isinstance(_walk(v, s), int) or (_walk(v, s) != v and _walk(v, s) < 100):
            raise AssertionError(f"lemma {name} is less general than stated")
    return finish(tree), tuple(_walk(v, s) for v in order)


def _to_formula(t, env):
    if isinstance(t, int):
        return env.get(t, BOT)
    if t[0] == "C":
        return Implies(_to_formula(t[1], env), _to_formula(t[2], env))
    if t[0] == "F":
        return BOT
    return t[1]


# ------------------------------------------------------------- builder

def _as_const(x):
    return x if isinstance(x, Formula) else Rat(Fraction(x))


class ProofBuilder:
    """Shared store of derived formulas; every method returns a step id."""

    def __init__(self, theory=None):
        self.theory = theory
        self.formulas = []
        self.justs = []
        self.by_formula = {}
        self._zero = None

    # primitive steps

    def _add(self, f, just):
        ref = self.by_formula.get(f)
        if ref is not None:
            return ref
        ref = len(self.formulas)
        self.formulas.append(f)
        self.justs.append(just)
        self.by_formula[f] = ref
        return ref

    def f(self, ref) -> Formula:
        return self.formulas[ref]

    def ax(self, schema, *params):
        f = instantiate_axiom(schema, params, self.theory)
        return self._add(f, ("ax", schema, tuple(params)))

    def thy(self, phi):
        if self.theory is not None and not self.theory.member(phi):
            raise ValueError(f"not an axiom of the theory: {phi}")
        return self._add(phi, ("thy",))

    def mp(self, minor, major):
        a, b = self.formulas[minor], self.formulas[major]
        if not (isinstance(b, Implies) and b.ante == a):
            raise ValueError(f"mp mismatch: {a} vs {b}")
        return self._add(b.cons, ("mp", minor, major))

    def gen(self, ref, var):
        return self._add(Forall(var, self.formulas[ref]), ("gen", ref, var))

    def has(self, phi):
        return self.by_formula.get(phi)

    # extraction

    def extract(self, ref) -> Proof:
        need = set()
        stack = [ref]
        while stack:
            r = stack.pop()
            if r in need:
                continue
            need.add(r)
            j = self.justs[r]
            if j[0] == "mp":
                stack.extend((j[1], j[2]))
            elif j[0] == "gen":
                stack.append(j[1])
        order = sorted(need)
        num = {r: i + 1 for i, r in enumerate(order)}
        steps = []
        for r in order:
            j = self.justs[r]
            if j[0] == "ax":
                just = Ax(j[1], j[2])
            elif j[0] == "thy":
                just = Thy(self.formulas[r])
            elif j[0] == "mp":
                just = MP(num[j[1]], num[j[2]])
            else:
                just = Gen(num[j[1]], j[2])
            steps.append(ProofStep(just, self.formulas[r]))
        return Proof(tuple(steps))

    def size(self, ref) -> int:
        return len(self.extract(ref).steps)

    # lemmas

    def lemma(self, name, *args):
        stmt, order, _ = LEMMAS[name]
        tree, slots = _template(name)
        env = dict(zip(slots, args))
        want = _to_formula(stmt, dict(zip(order, args)))
        hit = self.by_formula.get(want)
        if hit is not None:
            return hit

        def build(node):
            if node[0] == "leaf":
                params = tuple(_to_formula(p, env) for p in node[2])
                if node[1] in _AXIOM_PATTERNS:
                    return self.ax("L" + node[1], *params)
                return self.lemma(node[1], *params)
            major = build(node[1])
            minor = build(node[2])
            return self.mp(minor, major)
        ref = build(tree)
        if self.formulas[ref] != want:
            raise AssertionError(f"lemma {name} replay produced {self.formulas[ref]}")
        return ref

    def identity(self, p):
        return self.lemma("ID", p)

    def efq(self, p):
        return self.lemma("EFQ", p)

    def dne(self, p):
        return self.lemma("DNE", p)

    # derived rules (each takes step ids of premises)

    def hs(self, ab, bc):
        """A→B, B→C ⊢ A→C."""
        A, B = self._imp(ab)
        B2, C = self._imp(bc)
        if B != B2:
            raise ValueError("hs: middle formulas differ")
        return self.mp(bc, self.mp(ab, self.ax("L2", A, B, C)))

    def chain(self, *refs):
        out = refs[0]
        for r in refs[1:]:
            out = self.hs(out, r)
        return out

    def suffix(self, ab, C):
        """A→B ⊢ (B→C)→(A→C)."""
        A, B = self._imp(ab)
        return self.mp(ab, self.ax("L2", A, B, C))

    def exch(self, ref):
        """A→(B→C) ⊢ B→(A→C)."""
        A, BC = self._imp(ref)
        B, C = self._imp_f(BC)
        return self.mp(ref, self.lemma("EXCH", A, B, C))

    def prefix(self, bc, A):
        """B→C ⊢ (A→B)→(A→C)."""
        B, C = self._imp(bc)
        l2 = self.ax("L2", A, B, C)
        return self.mp(bc, self.mp(l2, self.lemma("EXCH", Implies(A, B), Implies(B, C), Implies(A, C))))

    def lift(self, ref, antecedents):
        """B→C ⊢ (A1→…→Ak→B)→(A1→…→Ak→C), innermost antecedent last."""
        for A in reversed(antecedents):
            ref = self.prefix(ref, A)
        return ref

    def weaken(self, ref, psi):
        """φ ⊢ ψ→φ."""
        return self.mp(ref, self.ax("L1", self.formulas[ref], psi))

    def contra(self, ab):
        """A→B ⊢ ¬B→¬A."""
        return self.suffix(ab, BOT)

    def el(self, a, b):
        return self.lemma("EL", a, b)

    def er(self, a, b):
        return self.lemma("ER", a, b)

    def oplus_left(self, ref):
        """¬(A→¬B) ⊢ A."""
        a, b = self._oplus_parts(self.formulas[ref])
        return self.mp(ref, self.el(a, b))

    def oplus_right(self, ref):
        a, b = self._oplus_parts(self.formulas[ref])
        return self.mp(ref, self.er(a, b))

    def oplus_intro(self, ra, rb):
        """A, B ⊢ ¬(A→¬B)."""
        A, B = self.formulas[ra], self.formulas[rb]
        return self.mp(rb, self.mp(ra, self.lemma("INTRO", A, B)))

    def import_thm(self, X, Y, B):
        """⊢ (X→(Y→B))→(¬(X→¬Y)→B)."""
        s1 = self.prefix(self.ax("L2", Y, B, BOT), X)
        s2 = self.lemma("EXCH", X, neg(B), neg(Y))
        s3 = self.ax("L2", neg(B), Implies(X, neg(Y)), BOT)
        s4 = self.prefix(self.dne(B), neg(Implies(X, neg(Y))))
        return self.chain(s1, s2, s3, s4)

    def import_rule(self, ref):
        """X→(Y→B) ⊢ ¬(X→¬Y)→B."""
        X, YB = self._imp(ref)
        Y, B = self._imp_f(YB)
        return self.mp(ref, self.import_thm(X, Y, B))

    # rational constants

    def zero(self):
        """⊢ 0̄."""
        if self._zero is None:
            z = Rat(Fraction(0))
            r = self.ax("R", z, z)  # (0̄→0̄) ↔ 0̄
            self._zero = self.mp(self.identity(z), self.oplus_left(r))
        return self._zero

    def rat_bridge(self, r, s):
        """For constants r, s: (r̄→s̄)→c̄ and c̄→(r̄→s̄) with c = s ∸ r."""
        ref = self.ax("R", _as_const(r), _as_const(s))
        return self.oplus_left(ref), self.oplus_right(ref)

    def rat_le(self, r, s):
        """⊢ r̄→s̄ for constant formulas with value(s) ≤ value(r)."""
        r, s = _as_const(r), _as_const(s)
        rv, sv = rational_value(r), rational_value(s)
        if rv is None or sv is None or sv > rv:
            raise ValueError(f"rat_le needs constants with {s} <= {r}")
        if r == s:
            return self.identity(r)
        _, back = self.rat_bridge(r, s)
        return self.mp(self.zero(), back)

    def one_to_bot(self):
        """⊢ 1̄→⊥."""
        return self.rat_le(Rat(Fraction(1)), BOT)

    # helpers

    def _imp(self, ref):
        return self._imp_f(self.formulas[ref])

    @staticmethod
    def _imp_f(f):
        if not isinstance(f, Implies):
            raise ValueError(f"expected an implication, got {f}")
        return f.ante, f.cons

    @staticmethod
    def _oplus_parts(f):
        if (isinstance(f, Implies) and isinstance(f.cons, Bottom) and isinstance(f.ante, Implies)
                and isinstance(f.ante.cons, Implies) and isinstance(f.ante.cons.cons, Bottom)):
            return f.ante.ante, f.ante.cons.ante
        raise ValueError(f"not a ⊕-form: {f}")
