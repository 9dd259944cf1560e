"""Proof search: theorem enumeration, bound propagation and degree streams."""

from .saturate import SearchBudget, TheoremEvent, enumerate_theorems, search_proof, default_budget
from .bounds import BoundsProver
from .degree import (
    Verdict, prover_for, degree_stream, compare_degrees, decide_complete,
    weak_entailment_check, prove,
)

__all__ = [
    "SearchBudget", "TheoremEvent", "enumerate_theorems", "search_proof", "default_budget",
    "BoundsProver", "Verdict", "prover_for", "degree_stream", "compare_degrees",
    "decide_complete", "weak_entailment_check", "prove",
]
