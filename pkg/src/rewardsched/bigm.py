"""Two-tier "Big-M" values ``a*M + c``.

``M`` is a symbolic, arbitrarily large positive quantity. Values are ordered
lexicographically on ``(m, c)``; addition and scaling by a real act
componentwise, and ``0 * M == 0``.

The finite parts usually come from evaluating exponential/log reward curves,
so comparisons absorb float noise with an absolute tolerance (``TOL``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Union

TOL = 1e-9

Number = Union[int, float]


def _close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol


@dataclass(frozen=True, eq=False)
class BigM:
    """The value ``m*M + c``."""

    m: float = 0.0
    c: float = 0.0

    @classmethod
    def coerce(cls, value: "BigMLike") -> "BigM":
        if isinstance(value, BigM):
            return value
        if isinstance(value, Real):
            return cls(0.0, float(value))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(float(value[0]), float(value[1]))
        raise TypeError(f"cannot interpret {value!r} as a BigM value")

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "BigMLike") -> "BigM":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return BigM(self.m + o.m, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other: "BigMLike") -> "BigM":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return BigM(self.m - o.m, self.c - o.c)

    def __rsub__(self, other: "BigMLike") -> "BigM":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self) -> "BigM":
        return BigM(-self.m, -self.c)

    def __mul__(self, k: Number) -> "BigM":
        if not isinstance(k, Real):
            return NotImplemented
        # 0 * M = 0 holds automatically since the parts are scaled separately
        return BigM(self.m * k, self.c * k)

    __rmul__ = __mul__

    def __truediv__(self, k: Number) -> "BigM":
        if not isinstance(k, Real):
            return NotImplemented
        return BigM(self.m / k, self.c / k)

    # ordering ---------------------------------------------------------------

    def compare(self, other: "BigMLike", tol: float = TOL) -> int:
        """Return -1, 0 or 1 for less, equal, greater."""
        o = BigM.coerce(other)
        if not _close(self.m, o.m, tol):
            return 1 if self.m > o.m else -1
        if not _close(self.c, o.c, tol):
            return 1 if self.c > o.c else -1
        return 0

    def __eq__(self, other: object) -> bool:
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.compare(o) == 0

    def __lt__(self, other: "BigMLike") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "BigMLike") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "BigMLike") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "BigMLike") -> bool:
        return self.compare(other) >= 0

    # misc -------------------------------------------------------------------

    def is_zero(self, tol: float = TOL) -> bool:
        return abs(self.m) <= tol and abs(self.c) <= tol

    def as_pair(self) -> list[float]:
        return [self.m, self.c]

    def __repr__(self) -> str:
        if self.m == 0:
            return f"BigM({self.c:g})"
        return f"BigM({self.m:g}M{self.c:+g})"

    def __iter__(self):
        yield self.m
        yield self.c


BigMLike = Union[BigM, Number, "tuple[float, float]", "list[float]"]

ZERO = BigM(0.0, 0.0)
M = BigM(1.0, 0.0)


def _coerce_or_none(value: object) -> BigM | None:
    try:
        return BigM.coerce(value)  # type: ignore[arg-type]
    except TypeError:
        return None


def bigm_compare(a: BigMLike, b: BigMLike, tol: float = TOL) -> int:
    return BigM.coerce(a).compare(b, tol)


def bigm_sum(values: Iterable[BigMLike]) -> BigM:
    m = c = 0.0
    for v in values:
        v = BigM.coerce(v)
        m += v.m
        c += v.c
    return BigM(m, c)


def tier_product(a: BigMLike, b: BigMLike) -> BigM:
    """Weight a reward by a debt tier by tier: ``(a.m*b.m, a.c*b.c)``.

    Mandatory reward is weighted by mandatory debt and finite reward by
    finite debt. The full polynomial product would add a cross term
    ``a.c*b.m*M`` that lets any residual M-debt swamp the finite debts.
    """
    a = BigM.coerce(a)
    b = BigM.coerce(b)
    return BigM(a.m * b.m, a.c * b.c)


def positive_part(value: BigMLike) -> BigM:
    """``[x]^+`` applied to each tier separately."""
    v = BigM.coerce(value)
    return BigM(max(v.m, 0.0), max(v.c, 0.0))


def is_integral(x: float, tol: float = TOL) -> bool:
    return math.isfinite(x) and abs(x - round(x)) <= tol
