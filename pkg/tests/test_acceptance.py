"""Acceptance criteria, one test each; every test prints a PASS or FAIL line."""

import functools
import itertools
import random
from fractions import Fraction as F

import pytest

from gen import SIG, GRID, all_sentences, formula, ground_sentence, rng_for, sentence, toy_henkin
from pavelka.clbridge import (
    CL_SCHEMAS, CLSignature, atomlessness, cl_axiom, classicalize, measure_algebra, pr0_theory,
    translate_formula, ul_instances,
)
from pavelka.coding import farey_rationals
from pavelka.domains import (
    FormalBall, RatInterval, ball_order, directed_sup, interpolate, refine, way_below,
)
from pavelka.errors import InconsistentStream, SideConditionViolation
from pavelka.henkin import build_model, classical_extract, model_degree
from pavelka.kernel import (
    MP, Proof, ProofBuilder, ProofStep, TheoryHandle, Thy, check_proof, hypothesis_uses,
    instantiate_axiom, weak_deduction,
)
from pavelka.moduli import Modulus
from pavelka.search import SearchBudget, degree_stream, enumerate_theorems
from pavelka.semantics import (
    FiniteStructure, check_moduli, max_falsity, models, parse_structure, random_structure,
    sentence_value,
)
from pavelka.syntax import (
    Atom, Const, Forall, Implies, NTimes, Not, Rat, Signature, Similar, Var, elaborate,
    free_vars, substitute,
)

from conftest import DATA


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as e:
                _say(n, title, False, f"{type(e).__name__}: {e}"[:160])
                raise
            _say(n, title, True, detail or "")
        return run
    return wrap


_capman = {}


@pytest.fixture(autouse=True)
def _capture(request):
    _capman["cm"] = request.config.pluginmanager.getplugin("capturemanager")
    yield


def _say(n, title, ok, detail):
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    cm = _capman.get("cm")
    if cm is not None:
        with cm.global_and_fixture_disabled():
            print("\n" + line)
    else:
        print(line)


# ------------------------------------------------------------------- 1

@criterion(1, "soundness of enumerated proofs")
def test_soundness_suite():
    proofs = with_mp = 0
    for th in range(20):
        rng = rng_for(1000 + th)
        base = random_structure(SIG, rng.randint(1, 3), 1000 + th)
        want, axioms = rng.randint(2, 4), []
        while len(axioms) < want:
            phi = sentence(rng, SIG, 3)
            if sentence_value(base, phi) == 0:
                axioms.append(phi)
        T = TheoryHandle(SIG, tuple(axioms))
        sampled = [base] + [M for s in range(60)
                            if models(M := random_structure(SIG, 1 + s % 3, 5000 * th + s),
                                      axioms).ok]
        for ev in enumerate_theorems(T, SearchBudget(max_steps=6, max_candidates=50)):
            assert check_proof(ev.proof, T) == ev.formula
            assert len(ev.proof.steps) <= 6
            for M in sampled:
                assert max_falsity(M, ev.formula)[0] == 0
            proofs += 1
            with_mp += any(isinstance(s.just, MP) for s in ev.proof.steps)
    assert proofs == 1000
    return f"{proofs} proofs, {with_mp} using modus ponens"


# ------------------------------------------------------------------- 2

def _schema_params(name, rng):
    if name in ("L1", "L3", "L4"):
        return formula(rng, SIG, 2, free=("x",)), formula(rng, SIG, 2, free=("x",))
    if name == "L2":
        return tuple(formula(rng, SIG, 2, free=("x",)) for _ in range(3))
    if name == "FORALL1":
        t = rng.choice([Var("x"), Var("y"), Const("c"), Const("e")])
        return "x", formula(rng, SIG, 2, free=("x", "y")), t
    if name == "FORALL2":
        psi = formula(rng, SIG, 2, free=("y",))
        return "x", psi, formula(rng, SIG, 2, free=("x", "y"))
    return rng.choice(GRID), rng.choice(GRID)


@criterion(2, "schema validity")
def test_schema_validity():
    checked = 0
    for name in ("L1", "L2", "L3", "L4", "FORALL1", "FORALL2", "R"):
        rng = random.Random(name)
        done = 0
        while done < 500:
            params = _schema_params(name, rng)
            if name == "R":
                params = tuple(Rat(F(v)) for v in params)
            try:
                inst = instantiate_axiom(name, params)
            except SideConditionViolation:
                continue
            M = random_structure(SIG, rng.randint(1, 3), rng.randrange(10**9))
            assert max_falsity(M, inst)[0] == 0, (name, inst)
            done += 1
        checked += done
    msig = Signature(("c",), {}, {"P": 1, "p": 0, "q": 0}, has_metric=True)
    x = Var("x")
    for name in CL_SCHEMAS:
        rng = random.Random(name)
        for k in range(500):
            M = random_structure(msig, rng.randint(1, 3), rng.randrange(10**9))
            fs = [Atom("p"), Atom("q"), Rat(rng.choice(GRID)), Atom("P", (Const("c"),)),
                  Implies(Atom("p"), Rat(rng.choice(GRID)))]
            if name in ("R1", "R2"):
                params = (rng.choice(GRID), rng.choice(GRID))
            elif name == "sup1":
                params = ("x", Implies(Atom("P", (x,)), rng.choice(fs)), Const("c"))
            elif name == "sup2":
                params = ("x", Implies(rng.choice(fs), Atom("P", (x,))), rng.choice(fs))
            else:
                params = tuple(rng.choice(fs) for _ in range(3 if name == "C2" else 2))
            assert max_falsity(M, translate_formula(cl_axiom(name, *params)))[0] == 0
            checked += 1
    return f"{checked} instances"


# ------------------------------------------------------------------- 3

PSIG = Signature((), {}, {"p": 0})
p = Atom("p")
STREAM_BUDGET = 200  # stream pulls allowed per run


def pinned(r):
    return TheoryHandle(PSIG, (Implies(Rat(r), p), Implies(p, Rat(r))), flags={"consistent"})


def chain_oracle(T, r):
    """Interval from explicit R-chain proofs for every rational with denominator at most 64."""
    lo, hi = F(0), F(1)
    one_point = lambda v: FiniteStructure(("o",), {}, {}, {"p": {(): v}})  # noqa: E731
    for q in sorted(set(farey_rationals(64))):
        B = ProofBuilder(T)
        if q <= r:
            ref = B.hs(B.thy(Implies(p, Rat(r))), B.rat_le(r, q))
            assert check_proof(B.extract(ref), T) == Implies(p, Rat(q))
            lo = max(lo, q)
        else:
            # p -> q is refuted by the one-point model, so no proof exists
            assert sentence_value(one_point(r), Implies(p, Rat(q))) > 0
        B = ProofBuilder(T)
        if q >= r:
            ref = B.hs(B.rat_le(q, r), B.thy(Implies(Rat(r), p)))
            assert check_proof(B.extract(ref), T) == Implies(Rat(q), p)
            hi = min(hi, q)
        else:
            assert sentence_value(one_point(r), Implies(Rat(q), p)) > 0
    return RatInterval(lo, hi)


@criterion(3, "degree convergence on pinned theories")
def test_degree_convergence():
    widths = []
    for r in (F(0), F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(1)):
        T = pinned(r)
        st = degree_stream(T, p)
        iv = refine(st, F(1, 64), STREAM_BUDGET)
        assert iv.contains(r)
        oracle = chain_oracle(T, r)
        assert oracle == RatInterval(r, r) == iv
        for ev in st.events:
            for cert in ev.certificate or ():
                check_proof(cert, T)
        widths.append(f"{r}:{st.pulled}")
    return "pulls " + " ".join(widths)


# ------------------------------------------------------------------- 4

@criterion(4, "transposed update rule crosses, corrected rule converges")
def test_erratum_guard():
    T = pinned(F(1, 3))
    st = degree_stream(T, p, erratum=True)
    with pytest.raises(InconsistentStream) as info:
        for _ in range(STREAM_BUDGET):
            next(st)
    good = refine(degree_stream(T, p), F(1, 64), STREAM_BUDGET)
    assert good == RatInterval(F(1, 3), F(1, 3))
    return f"erratum: {str(info.value).split(':')[0]}; corrected: {good}"


# ------------------------------------------------------------------- 5

@criterion(5, "Henkin extension and term model")
def test_henkin_end_to_end():
    T2, trace, M, _ = toy_henkin(200)
    assert trace.fresh_constants() == ["h0"]
    for a in M.universe:
        assert refine(M.rho(a, a), F(1, 64), 50) == RatInterval(0, 0)
    rng = random.Random(2024)
    for _ in range(50):
        phi = ground_sentence(rng, M.universe)
        a = refine(model_degree(M, phi), F(1, 32), 400)
        b = refine(degree_stream(T2, phi), F(1, 32), 400)
        assert a.intersect(b) is not None, phi
    laws = 0
    while laws < 20:
        phi = ground_sentence(rng, M.universe, quantifiers=True)
        if not isinstance(phi, Forall):
            continue
        whole = model_degree(M, phi)
        parts = [model_degree(M, substitute(phi.body, phi.var, Const(u))) for u in M.universe]
        for _ in range(64):
            try:
                iv = next(whole)
            except StopIteration:
                break
            cur = [p_.current if p_.finished else next(p_, p_.current) for p_ in parts]
            lo = max(c.lo for c in cur)
            hi = max(c.hi for c in cur)
            assert iv == RatInterval(lo, hi)
        laws += 1
    return f"universe {' '.join(M.universe)}, {len(T2.axioms)} axioms"


# ------------------------------------------------------------------- 6

@criterion(6, "classical extraction")
def test_classical_extraction():
    sig = Signature(("k0", "k1"), {}, {"P": 1}, has_similarity=True)
    pool = list(all_sentences(sig, 8))
    total = 0
    for seed in range(10):
        rng = random.Random(seed)
        n = rng.randint(1, 2)
        U = tuple(f"u{i}" for i in range(n))
        consts = {f"k{i}": U[min(i, n - 1)] for i in range(2)}
        M = FiniteStructure(U, consts, {}, {"P": {(u,): F(rng.randint(0, 1)) for u in U}},
                            {(a, b): F(int(a != b)) for a in U for b in U})
        lits = [Atom("P", (Const(k),)) for k in consts]
        lits += [Similar(Const(a), Const(b)) for a, b in itertools.product(consts, repeat=2)]
        diagram = tuple(lit if sentence_value(M, lit) == 0 else Not(lit) for lit in lits)
        T = classicalize(TheoryHandle(sig, diagram, packs={"S"}, flags={"consistent"}))
        H = build_model(T, check_flags=False)
        for phi in pool:
            assert classical_extract(H, phi, fuel=256) == (sentence_value(M, phi) == 0), phi
            total += 1
    return f"{total} checks over {len(pool)} sentences"


# ------------------------------------------------------------------- 7

def _atomless_brute(n):
    full = (1 << n) - 1
    pc = lambda m: F(bin(m).count("1"), n)  # noqa: E731
    return max(min(abs(pc(x & y) - pc(x & (full ^ y))) for y in range(full + 1))
               for x in range(full + 1))


@criterion(7, "probability pack on uniform measure algebras")
def test_probability_pack():
    axioms = [translate_formula(a) for a in pr0_theory().axioms]
    out = []
    for n in (2, 4, 8):
        M = measure_algebra(n)
        res = models(M, axioms)
        assert res.ok and res.falsity == 0
        v = max_falsity(M, translate_formula(atomlessness()))[0]
        assert v == _atomless_brute(n) == F(1, n)
        out.append(f"n={n}:{v}")
    return " ".join(out)


# ------------------------------------------------------------------- 8

@criterion(8, "domain algebra laws")
def test_domain_laws():
    rng = random.Random(8)
    rat = lambda: F(rng.randint(0, 24), 24)  # noqa: E731

    def iv():
        a, b = rat(), rat()
        return RatInterval(min(a, b), max(a, b))

    for _ in range(10_000):
        a, b, c = iv(), iv(), iv()
        if way_below(a, b) and way_below(b, c):
            assert way_below(a, c)
        if way_below(a, b):
            assert a.below(b)
            m = interpolate(a, b)
            assert way_below(a, m) and way_below(m, b)
        chain = sorted([a, b, c], key=lambda i: -i.width)
        if all(x.below(y) for x, y in zip(chain, chain[1:])):
            top = chain[-1]
            assert directed_sup(chain) == RatInterval(max(i.lo for i in chain),
                                                      min(i.hi for i in chain)) == top
        pts = {k: rat() for k in "xyz"}
        dist = lambda u, v: abs(pts[u] - pts[v])  # noqa: E731
        bx, by, bz = (FormalBall(k, rat()) for k in "xyz")
        o1, o2 = ball_order(bx, by, dist), ball_order(by, bz, dist)
        expect = ("way_below" if dist("x", "y") < bx.radius - by.radius
                  else "below" if dist("x", "y") <= bx.radius - by.radius else "incomparable")
        assert o1 == expect
        if o1 != "incomparable" and o2 != "incomparable":
            assert ball_order(bx, bz, dist) != "incomparable"
    return "10000 instances"


# ------------------------------------------------------------------- 9

LIP = CLSignature(Signature(("a", "b"), {}, {"P": 1}, has_metric=True),
                  {"P": Modulus.lipschitz(1)})


def _ul_violations(M):
    return [i for i in ul_instances(LIP, "P", 0, 4) if sentence_value(M, i.formula) > 0]


@criterion(9, "continuity moduli versus UL instances")
def test_cl_reduction():
    good = parse_structure((DATA / "lip3.str").read_text())
    bad = parse_structure((DATA / "broken3.str").read_text())
    assert check_moduli(good, LIP.moduli).ok and not _ul_violations(good)
    res = check_moduli(bad, LIP.moduli)
    viol = _ul_violations(bad)
    assert not res.ok and viol
    # moduli hold => every UL instance holds, on random 3-point structures
    rng = random.Random(9)
    quarters = [F(k, 4) for k in range(5)]
    implied = 0
    for _ in range(300):
        a, b = rng.choice(quarters[1:]), rng.choice(quarters[1:])
        c = rng.choice([t for t in quarters[1:] if abs(a - b) <= t <= a + b])
        metric = {("u", "v"): a, ("v", "w"): b, ("u", "w"): c}
        metric.update({(y, x): v for (x, y), v in list(metric.items())})
        metric.update({(x, x): F(0) for x in "uvw"})
        M = FiniteStructure(("u", "v", "w"), {"a": "u", "b": "v"}, {},
                            {"P": {(x,): rng.choice(quarters) for x in "uvw"}}, metric)
        if check_moduli(M, LIP.moduli).ok:
            assert not _ul_violations(M)
            implied += 1
    return f"broken structure violates {viol[0].comment()}; {implied} random structures agree"


# ------------------------------------------------------------------ 10

def _random_proof(rng, k):
    """Proof of some psi from T plus the hypothesis phi, feeding phi in ``k`` times."""
    phi = sentence(rng, SIG, 2, quantifiers=False)
    psi = sentence(rng, SIG, 2, quantifiers=False)
    chain = psi
    for _ in range(k):
        chain = Implies(phi, chain)
    extra = sentence(rng, SIG, 2, quantifiers=False)
    axioms = [chain] if k else [psi]
    steps = []
    if rng.random() < 0.5:
        steps.append(ProofStep(Thy(extra), extra))
        axioms.append(extra)
    hyp_at = None
    if k:
        steps.append(ProofStep(Thy(phi), phi))
        hyp_at = len(steps)
    steps.append(ProofStep(Thy(axioms[0]), axioms[0]))
    cur, f = len(steps), axioms[0]
    for _ in range(k):
        f = f.cons
        steps.append(ProofStep(MP(hyp_at, cur), f))
        cur = len(steps)
    if k == 0 and rng.random() < 0.5:
        steps.append(ProofStep(Thy(phi), phi))
        steps.append(ProofStep(Thy(psi), psi))
    T = TheoryHandle(SIG, tuple(dict.fromkeys(axioms)))
    return T, phi, Proof(tuple(steps))


@criterion(10, "weak deduction transformer")
def test_weak_deduction():
    rng = random.Random(10)
    counts = [0, 0, 0, 0]
    for i in range(200):
        k = i % 4
        T, phi, prf = _random_proof(rng, k)
        uses = hypothesis_uses(prf, phi)
        assert uses == k
        psi = prf.steps[-1].formula
        n, out = weak_deduction(prf, phi, T)
        assert n >= max(1, uses)
        concl = check_proof(out, T)
        assert concl == elaborate(Implies(NTimes(n, phi), psi))
        assert not free_vars(concl)
        for s in range(3):
            M = random_structure(SIG, 1 + s, 31 * i + s)
            if models(M, T.axioms).ok:
                assert sentence_value(M, concl) == 0
        counts[k] += 1
    return "uses 0-3: " + "/".join(map(str, counts))
