from fractions import Fraction as F

import pytest

from pavelka.errors import InvalidStep, MembershipRejected, SideConditionViolation
from pavelka.kernel import (
    Ax, Gen, MP, Proof, ProofBuilder, ProofStep, TheoryHandle, Thy, check_proof,
    hypothesis_uses, instantiate_axiom, parse_proof, print_proof, weak_deduction,
)
from pavelka.kernel.deduction import InputProofInvalid
from pavelka.kernel.schemas import iff, imp
from pavelka.semantics import random_structure, max_falsity
from pavelka.syntax import (
    Atom, Const, Dist, Forall, Implies, NTimes, Rat, Signature, Var, elaborate,
)

c, x, y = Const("c"), Var("x"), Var("y")
P = lambda t: Atom("P", (t,))  # noqa: E731
Q = lambda t: Atom("Q", (t,))  # noqa: E731
p, q = Atom("p"), Atom("q")
SIG = Signature(("c",), {}, {"P": 1, "Q": 1, "p": 0, "q": 0}, has_similarity=True)


def steps(*pairs):
    return Proof(tuple(ProofStep(j, f) for j, f in pairs))


class TestInstantiate:
    def test_l1(self):
        assert instantiate_axiom("L1", (P(c), Q(c))) == Implies(P(c), Implies(Q(c), P(c)))

    def test_r(self):
        inst = instantiate_axiom("R", (Rat(F(1, 3)), Rat(F(1, 2))))
        assert inst == iff(imp(Rat(F(1, 3)), Rat(F(1, 2))), Rat(F(1, 6)))

    def test_forall1_capture(self):
        with pytest.raises(SideConditionViolation):
            instantiate_axiom("FORALL1", ("x", Forall("y", P(x)), y))

    def test_forall2_side_condition(self):
        with pytest.raises(SideConditionViolation):
            instantiate_axiom("FORALL2", ("x", P(x), Q(x)))

    def test_unknown_schema(self):
        with pytest.raises(SideConditionViolation):
            instantiate_axiom("L9", ())


class TestCheck:
    def test_modus_ponens(self):
        T = TheoryHandle(SIG, (p, Implies(p, q)))
        proof = steps((Thy(p), p), (Thy(Implies(p, q)), Implies(p, q)), (MP(1, 2), q))
        assert check_proof(proof, T) == q

    def test_mismatched_mp(self):
        T = TheoryHandle(SIG)
        l1 = instantiate_axiom("L1", (p, q))
        proof = steps((Ax("L1", (p, q)), l1), (MP(1, 1), q))
        with pytest.raises(InvalidStep) as info:
            check_proof(proof, T)
        assert info.value.index == 2

    def test_metric_axiom_generalised(self):
        T = TheoryHandle(Signature((), has_metric=True), packs={"SM"})
        proof = steps((Ax("SM1", (x,)), Dist(x, x)), (Gen(1, "x"), Forall("x", Dist(x, x))))
        assert check_proof(proof, T) == Forall("x", Dist(x, x))

    def test_membership_rejected(self):
        T = TheoryHandle(SIG, (p,))
        with pytest.raises(MembershipRejected):
            check_proof(steps((Thy(q), q)), T)

    def test_wrong_recorded_formula(self):
        T = TheoryHandle(SIG, (p,))
        with pytest.raises(InvalidStep):
            check_proof(steps((Thy(p), q)), T)

    def test_forward_reference(self):
        T = TheoryHandle(SIG, (p,))
        with pytest.raises(InvalidStep):
            check_proof(steps((MP(1, 2), q), (Thy(p), p)), T)

    def test_file_round_trip(self):
        T = TheoryHandle(SIG, (p, Implies(p, q)))
        proof = steps((Thy(p), p), (Thy(Implies(p, q)), Implies(p, q)), (MP(1, 2), q))
        again = parse_proof(print_proof(proof), SIG)
        assert check_proof(again, T) == q


class TestBuilderLemmas:
    @pytest.mark.parametrize("name,args", [
        ("ID", (p,)), ("DNE", (p,)), ("EFQ", (p,)), ("EXCH", (p, q, P(c))),
        ("ER", (p, q)), ("EL", (p, q)),
    ])
    def test_lemma_replays(self, name, args):
        B = ProofBuilder(TheoryHandle(SIG))
        ref = B.lemma(name, *args)
        check_proof(B.extract(ref), TheoryHandle(SIG))

    def test_rat_le(self):
        B = ProofBuilder(TheoryHandle(SIG))
        for r, s in [(F(1, 2), F(1, 3)), (F(1, 3), F(1, 3)), (1, 0)]:
            ref = B.rat_le(r, s)
            assert B.f(ref) == Implies(Rat(F(r)), Rat(F(s)))
            check_proof(B.extract(ref), TheoryHandle(SIG))


class TestWeakDeduction:
    def test_single_use(self):
        T = TheoryHandle(SIG, (Implies(p, q),))
        proof = steps((Thy(p), p), (Thy(Implies(p, q)), Implies(p, q)), (MP(1, 2), q))
        n, out = weak_deduction(proof, p, T)
        assert n == 1
        assert check_proof(out, T) == elaborate(Implies(NTimes(1, p), q))

    def test_unused_hypothesis(self):
        T = TheoryHandle(SIG, (q,))
        n, out = weak_deduction(steps((Thy(q), q)), p, T)
        assert n == 1 and check_proof(out, T) == Implies(p, q)

    def test_two_uses(self):
        # from p and p -> (p -> q) derive q using p twice
        ax = Implies(p, Implies(p, q))
        T = TheoryHandle(SIG, (ax,))
        proof = steps((Thy(p), p), (Thy(ax), ax), (MP(1, 2), Implies(p, q)), (MP(1, 3), q))
        assert hypothesis_uses(proof, p) == 2
        n, out = weak_deduction(proof, p, T)
        assert n == 2
        concl = check_proof(out, T)
        assert concl == elaborate(Implies(NTimes(2, p), q))
        for seed in range(30):
            M = random_structure(SIG, 2, seed)
            if max_falsity(M, ax)[0] == 0:
                assert max_falsity(M, concl)[0] == 0

    def test_gen_step(self):
        T = TheoryHandle(SIG, (Implies(p, P(x)),))
        proof = steps((Thy(p), p), (Thy(Implies(p, P(x))), Implies(p, P(x))),
                      (MP(1, 2), P(x)), (Gen(3, "x"), Forall("x", P(x))))
        n, out = weak_deduction(proof, p, T)
        assert check_proof(out, T) == elaborate(Implies(NTimes(n, p), Forall("x", P(x))))

    def test_invalid_input(self):
        with pytest.raises(InputProofInvalid):
            weak_deduction(steps((Thy(q), q)), p, TheoryHandle(SIG))

    def test_open_hypothesis_rejected(self):
        with pytest.raises(ValueError):
            weak_deduction(steps((Thy(P(x)), P(x))), P(x), TheoryHandle(SIG))


class TestTheoryHandle:
    def test_enumeration_passes_membership(self):
        sig = Signature(("c",), {}, {"P": 1}, has_similarity=True, has_metric=True)
        from pavelka.moduli import Modulus
        T = TheoryHandle(sig, (P(c),), {"S", "SM", "UL", "PEM"}, {"P": Modulus.lipschitz(1)})
        it = T.enumerate()
        for _ in range(200):
            assert T.member(next(it))

    def test_flags_validated(self):
        with pytest.raises(ValueError):
            TheoryHandle(SIG, flags={"bogus"})
