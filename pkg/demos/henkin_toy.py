"""Extend a small theory to a Henkin theory, then read degrees off its term model.

The sentence sequence is seeded with the existential axiom, the constant
0 and the atoms about the future witness h0, so that 200 steps already
pin every atomic degree.
"""

from fractions import Fraction
from pathlib import Path

from pavelka.domains import refine
from pavelka.henkin import SemanticOracle, build_model, extend, model_degree
from pavelka.kernel import TheoryHandle
from pavelka.parser import parse_formula, parse_theory
from pavelka.semantics import parse_structure

data = Path(__file__).parent / "data"
T = TheoryHandle.from_file(parse_theory((data / "toy_henkin.thy").read_text()))
ref = parse_structure((data / "toy.str").read_text())
sig = T.signature.with_fresh()
seeds = [T.axioms[-1]] + [parse_formula(s, sig) for s in ("(rat 0 1)", "(approx c h0)", "(P h0)")]

T2, trace = extend(T, SemanticOracle(ref), 200, seeds=seeds)
print(f"{len(trace)} steps, {len(trace.additions())} axioms added, fresh: {trace.fresh_constants()}")
for step in trace.steps:
    if step.action == "witness":
        print("witness at step", step.n, ":", step.added)

M = build_model(T2)
print("universe:", " ".join(M.universe))
for a in M.universe:
    for b in M.universe:
        print(f"rho({a},{b}) =", refine(M.rho(a, b), Fraction(1, 32), 200))

for text in ("(P h0)", "(forall x (P x))", "(exists x (approx x c))", "(-> (P c) (forall x (P x)))"):
    phi = parse_formula(text, sig)
    print(refine(model_degree(M, phi), Fraction(1, 32), 400), " ", text)
