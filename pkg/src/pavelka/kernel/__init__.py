"""Axiom schemas, proofs, the checker, theory handles and proof transformers."""

from .schemas import SCHEMAS, LOGICAL, PACKS, instantiate_axiom, ul_formula, pem_formula, match_pack
from .proof import Ax, Thy, MP, Gen, ProofStep, Proof, check_proof, parse_proof, print_proof
from .theory import TheoryHandle
from .builder import ProofBuilder
from .deduction import weak_deduction, hypothesis_uses

__all__ = [
    "SCHEMAS", "LOGICAL", "PACKS", "instantiate_axiom", "ul_formula", "pem_formula",
    "match_pack", "Ax", "Thy", "MP", "Gen", "ProofStep", "Proof", "check_proof",
    "parse_proof", "print_proof", "TheoryHandle", "ProofBuilder", "weak_deduction",
    "hypothesis_uses",
]
