"""Rational Pavelka predicate logic: syntax, proofs, degrees and Henkin models."""

__version__ = "0.1.0"
