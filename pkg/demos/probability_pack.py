"""Uniform measure algebras satisfy the probability axioms but are not atomless."""

from pavelka.clbridge import atomlessness, measure_algebra, pr0_theory, translate_formula
from pavelka.semantics import max_falsity, models

axioms = [translate_formula(a) for a in pr0_theory().axioms]
print(len(axioms), "axioms in PR0")
for n in (2, 4, 8):
    M = measure_algebra(n)
    res = models(M, axioms)
    v, witness = max_falsity(M, translate_formula(atomlessness()))
    print(f"n={n}: models PR0: {res.ok}; atomlessness falsity {v} (worst x = {witness})")
