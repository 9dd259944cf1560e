"""Weak deduction: turn a proof of ψ from T ∪ {φ} into a proof of nφ → ψ from T.

Each step ``A`` of the input is mapped to a proof of the curried form
``φ → (φ → … (φ → A))`` with ``k`` copies of ``φ``, where ``k`` counts
how often the hypothesis is used below that step (shared steps count
once per use).  Modus ponens adds the counts; generalisation commutes
with the prefix through FORALL2, which needs φ closed.  At the end the
curried prefix is folded into ``φ ⊕ (φ ⊕ …)`` with the import theorem.
"""

from __future__ import annotations

from ..errors import InvalidStep
from ..syntax import Formula, Forall, Implies, NTimes, elaborate, free_vars
from .builder import ProofBuilder
from .proof import Ax, MP, Proof, Thy, check_proof

__all__ = ["weak_deduction", "hypothesis_uses", "InputProofInvalid"]


class InputProofInvalid(ValueError):
    pass


def _curry(phi, k, a):
    for _ in range(k):
        a = Implies(phi, a)
    return a


class _Deducer:
    def __init__(self, phi, T):
        self.phi = phi
        self.b = ProofBuilder(T)
        self._E = {}
        self._G = {}
        self._U = {}

    def E(self, b, A, B):
        """⊢ C_b(A→B) → (A → C_b(B))."""
        key = (b, A, B)
        if key not in self._E:
            bb = self.b
            if b == 0:
                ref = bb.identity(Implies(A, B))
            else:
                inner = self.E(b - 1, A, B)
                ref = bb.hs(bb.prefix(inner, self.phi),
                            bb.lemma("EXCH", self.phi, A, _curry(self.phi, b - 1, B)))
            self._E[key] = ref
        return self._E[key]

    def G(self, k, x, A):
        """⊢ ∀x C_k(A) → C_k(∀x A)."""
        key = (k, x, A)
        if key not in self._G:
            bb = self.b
            if k == 0:
                ref = bb.identity(Forall(x, A))
            else:
                rest = _curry(self.phi, k - 1, A)
                step = bb.ax("FORALL2", x, self.phi, rest)
                ref = bb.hs(step, bb.prefix(self.G(k - 1, x, A), self.phi))
            self._G[key] = ref
        return self._G[key]

    def U(self, n, psi):
        """⊢ C_n(ψ) → (nφ → ψ)."""
        key = (n, psi)
        if key not in self._U:
            bb = self.b
            if n == 1:
                ref = bb.identity(Implies(self.phi, psi))
            else:
                prev = self.U(n - 1, psi)
                lifted = bb.prefix(prev, self.phi)
                rest = elaborate(NTimes(n - 1, self.phi))
                ref = bb.hs(lifted, bb.import_thm(self.phi, rest, psi))
            self._U[key] = ref
        return self._U[key]


def _input_steps(p: Proof, phi, T):
    try:
        check_proof(p, T.extend([phi]))
    except InvalidStep as e:
        raise InputProofInvalid(str(e)) from None


def hypothesis_uses(p: Proof, phi: Formula) -> int:
    """How often the hypothesis feeds the conclusion, counting shared steps per use."""
    phi = elaborate(phi)
    k = []
    for step in p.steps:
        j = step.just
        if isinstance(j, Thy):
            k.append(1 if elaborate(j.formula) == phi else 0)
        elif isinstance(j, Ax):
            k.append(0)
        elif isinstance(j, MP):
            k.append(k[j.minor - 1] + k[j.major - 1])
        else:
            k.append(k[j.premise - 1])
    return k[-1]


def weak_deduction(p: Proof, phi: Formula, T) -> tuple:
    """Return ``(n, proof)`` where ``proof`` derives ``nφ → ψ`` from ``T`` alone."""
    phi = elaborate(phi)
    if free_vars(phi):
        raise ValueError("the hypothesis must be a sentence")
    _input_steps(p, phi, T)
    D = _Deducer(phi, T)
    bb = D.b
    formulas, ks, refs = [], [], []
    for step in p.steps:
        j = step.just
        if isinstance(j, Thy):
            f = elaborate(j.formula)
            if f == phi:
                k, ref = 1, bb.identity(phi)
            else:
                k, ref = 0, bb.thy(f)
        elif isinstance(j, Ax):
            ref = bb.ax(j.schema, *j.params)
            k, f = 0, bb.f(ref)
        elif isinstance(j, MP):
            i1, i2 = j.minor - 1, j.major - 1
            a_f, b_f = formulas[i1], formulas[i2]
            if not (isinstance(b_f, Implies) and b_f.ante == a_f):
                i1, i2 = i2, i1
                a_f, b_f = b_f, a_f
            A, B = b_f.ante, b_f.cons
            a, b = ks[i1], ks[i2]
            ra, rb = refs[i1], refs[i2]
            if a == 0 and b == 0:
                ref = bb.mp(ra, rb)
            elif a == 0:
                ref = bb.mp(ra, bb.mp(rb, D.E(b, A, B)))
            elif b == 0:
                ref = bb.mp(ra, bb.lift(rb, [phi] * a))
            else:
                e = bb.mp(rb, D.E(b, A, B))  # A → C_b(B)
                ref = bb.mp(ra, bb.lift(e, [phi] * a))
            k, f = a + b, B
        else:
            a = ks[j.premise - 1]
            A = formulas[j.premise - 1]
            g = bb.gen(refs[j.premise - 1], j.var)
            ref = g if a == 0 else bb.mp(g, D.G(a, j.var, A))
            k, f = a, Forall(j.var, A)
        formulas.append(f)
        ks.append(k)
        refs.append(ref)
        if bb.f(ref) != _curry(phi, k, f):
            raise AssertionError("weak deduction invariant broken")
    n, psi, ref = ks[-1], formulas[-1], refs[-1]
    if n == 0:
        ref = bb.weaken(ref, phi)
        n = 1
    ref = bb.mp(ref, D.U(n, psi))
    return n, bb.extract(ref)

