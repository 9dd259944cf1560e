"""Rational moduli of uniform continuity."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["Modulus"]


@dataclass(frozen=True)
class Modulus:
    """Either ``lipschitz(L)``, meaning delta(eps) = min(eps/L, 1), or a step table.

    A table ``((e0, d0), (e1, d1), ...)`` gives delta(eps) = d_k for the
    largest e_k <= eps; below e0 it is the linear ramp d0 * eps / e0.
    """

    kind: str
    L: Fraction = Fraction(1)
    rows: tuple = ()

    @staticmethod
    def lipschitz(L) -> "Modulus":
        L = Fraction(L)
        if L <= 0:
            raise ValueError("Lipschitz constant must be positive")
        return Modulus("lipschitz", L=L)

    @staticmethod
    def table(rows) -> "Modulus":
        rows = tuple((Fraction(e), Fraction(d)) for e, d in rows)
        if not rows:
            raise ValueError("empty modulus table")
        for i, (e, d) in enumerate(rows):
            if not (0 < e <= 1 and 0 < d <= 1):
                raise ValueError("table entries must lie in (0,1]")
            if i and e <= rows[i - 1][0]:
                raise ValueError("table eps values must be strictly increasing")
        return Modulus("table", rows=rows)

    def delta(self, eps) -> Fraction:
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("delta is defined on (0,1]")
        if self.kind == "lipschitz":
            return min(eps / self.L, Fraction(1))
        e0, d0 = self.rows[0]
        if eps < e0:
            return d0 * eps / e0
        out = d0
        for e, d in self.rows:
            if e <= eps:
                out = d
        return out

    def delta_left(self, eps) -> Fraction:
        """Left limit of delta at ``eps`` (sup of delta over (0, eps))."""
        eps = Fraction(eps)
        if eps <= 0:
            return Fraction(0)
        if self.kind == "lipschitz":
            return min(eps / self.L, Fraction(1))
        e0, d0 = self.rows[0]
        if eps <= e0:
            return d0 * eps / e0
        return max(d for e, d in self.rows if e < eps)

    def admits(self, q, r) -> bool:
        """Whether some eps < r has q < delta(eps); decides UL membership."""
        q, r = Fraction(q), Fraction(r)
        return r > 0 and q < self.delta_left(r)
