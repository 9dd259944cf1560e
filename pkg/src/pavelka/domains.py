"""The interval domain I[0,1] over rational endpoints, and formal balls.

Intervals are ordered by reverse inclusion: ``a ⊑ b`` when ``b ⊆ a``,
so ``[0,1]`` is the least element.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Union

from .errors import BudgetExhausted, InconsistentIntervals, InconsistentStream

__all__ = [
    "RatInterval", "BOTTOM", "way_below", "interval_op", "directed_sup",
    "interpolate", "FormalBall", "ball_order", "DegreeStream", "StreamEvent",
    "refine", "format_interval", "parse_interval", "rational01",
]

_0 = Fraction(0)
_1 = Fraction(1)


def rational01(x) -> Fraction:
    v = Fraction(x)
    if not 0 <= v <= 1:
        raise ValueError(f"{v} is not in [0,1]")
    return v


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rational01(self.lo), rational01(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo},{hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def point(x) -> "RatInterval":
        return RatInterval(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def below(self, other: "RatInterval") -> bool:
        """Domain order: ``other`` is at least as informative (contained)."""
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "RatInterval") -> Optional["RatInterval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return RatInterval(lo, hi) if lo <= hi else None

    def __str__(self):
        return format_interval(self)


BOTTOM = RatInterval(_0, _1)


def format_interval(iv: RatInterval) -> str:
    return f"{iv.lo.numerator}/{iv.lo.denominator} {iv.hi.numerator}/{iv.hi.denominator}"


def parse_interval(line: str) -> RatInterval:
    parts = line.split()
    if len(parts) != 2:
        raise ValueError(f"interval line needs two rationals: {line!r}")
    return RatInterval(Fraction(parts[0]), Fraction(parts[1]))


def way_below(a: RatInterval, b: RatInterval) -> bool:
    return (a.lo < b.lo or a.lo == 0) and (b.hi < a.hi or a.hi == 1)


def interval_op(op: str, a: RatInterval, b: Optional[RatInterval] = None) -> RatInterval:
    """Tightest interval image of a connective's value function on a box."""
    if op == "neg":
        return RatInterval(1 - a.hi, 1 - a.lo)
    if b is None:
        raise TypeError(f"{op} needs two arguments")
    if op == "trunc_add":
        return RatInterval(min(a.lo + b.lo, _1), min(a.hi + b.hi, _1))
    if op == "trunc_sub":  # a ∸ b, increasing in a, decreasing in b
        return RatInterval(max(a.lo - b.hi, _0), max(a.hi - b.lo, _0))
    if op == "min":
        return RatInterval(min(a.lo, b.lo), min(a.hi, b.hi))
    if op == "max":
        return RatInterval(max(a.lo, b.lo), max(a.hi, b.hi))
    if op == "implies":  # falsity of A→B is ‖B‖ ∸ ‖A‖
        return interval_op("trunc_sub", b, a)
    if op == "absdiff":
        lo = max(a.lo - b.hi, b.lo - a.hi, _0)
        hi = max(a.hi - b.lo, b.hi - a.lo)
        return RatInterval(lo, hi)
    raise ValueError(f"unknown interval operation {op!r}")


def directed_sup(items: Iterable[RatInterval]) -> RatInterval:
    out = BOTTOM
    for iv in items:
        nxt = out.intersect(iv)
        if nxt is None:
            raise InconsistentIntervals(f"{out} and {iv} do not intersect")
        out = nxt
    return out


def interpolate(a: RatInterval, b: RatInterval) -> RatInterval:
    """A base interval ``c`` with ``a ≪ c ≪ b``; requires ``a ≪ b``."""
    if not way_below(a, b):
        raise ValueError(f"{a} is not way below {b}")
    lo = _0 if b.lo == 0 else (a.lo + b.lo) / 2
    hi = _1 if b.hi == 1 else (a.hi + b.hi) / 2
    return RatInterval(lo, hi)


# ---------------------------------------------------------- formal balls

@dataclass(frozen=True)
class FormalBall:
    center: object
    radius: Fraction

    def __post_init__(self):
        r = Fraction(self.radius)
        if r < 0:
            raise ValueError("negative radius")
        object.__setattr__(self, "radius", r)


def ball_order(b1: FormalBall, b2: FormalBall, dist: Callable) -> str:
    """``'way_below'``, ``'below'`` or ``'incomparable'`` for ``b1`` versus ``b2``."""
    d = Fraction(dist(b1.center, b2.center))
    gap = b1.radius - b2.radius
    if d < gap:
        return "way_below"
    if d <= gap:
        return "below"
    return "incomparable"


# --------------------------------------------------------- degree streams

@dataclass(frozen=True)
class StreamEvent:
    interval: RatInterval
    certificate: object = None
    note: str = ""


class DegreeStream:
    """Pull-based, single-consumer stream of nested intervals.

    ``factory`` returns a fresh iterator of :class:`RatInterval` or
    :class:`StreamEvent`; :meth:`restart` calls it again, so producers
    must not keep hidden global state.  Nesting is checked on every pull.
    """

    def __init__(self, factory: Callable[[], Iterator], label: str = ""):
        self.factory = factory
        self.label = label
        self._it = None
        self.current: Optional[RatInterval] = None
        self.pulled = 0
        self.finished = False
        self.events = []
        self.meta = {}

    def restart(self) -> "DegreeStream":
        return DegreeStream(self.factory, self.label)

    def __iter__(self):
        return self

    def next_event(self) -> StreamEvent:
        if self._it is None:
            self._it = iter(self.factory())
        try:
            item = next(self._it)
        except StopIteration:
            self.finished = True
            raise
        ev = item if isinstance(item, StreamEvent) else StreamEvent(item)
        iv = ev.interval
        if self.current is not None and not self.current.below(iv):
            raise InconsistentStream(f"stream {self.label} not nested: {self.current} then {iv}",
                                     self.current, iv)
        self.current = iv
        self.pulled += 1
        self.events.append(ev)
        return ev

    def __next__(self) -> RatInterval:
        return self.next_event().interval

    def certificates(self):
        return [e.certificate for e in self.events if e.certificate is not None]


def refine(s: DegreeStream, width, step_budget: int) -> RatInterval:
    """First interval of width at most ``width``; raises :class:`BudgetExhausted` otherwise."""
    width = Fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    if s.current is not None and s.current.width <= width:
        return s.current
    best = s.current
    for _ in range(step_budget):
        try:
            iv = next(s)
        except StopIteration:
            break
        if best is None or iv.width < best.width:
            best = iv
        if iv.width <= width:
            return iv
    raise BudgetExhausted(f"no interval of width <= {width} within budget", best)


def stream_of(intervals: Iterable[Union[RatInterval, tuple]], label="") -> DegreeStream:
    """Convenience: a stream replaying a fixed sequence."""
    items = [iv if isinstance(iv, RatInterval) else RatInterval(*iv) for iv in intervals]
    return DegreeStream(lambda: iter(items), label)
