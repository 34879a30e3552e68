"""Scalars in Q(sqrt3) with an explicit float fallback.

Every probability the models need (1/4, 1/2, sqrt3/2, ...) lives in the
field Q(sqrt3), so exact mode stores ``p + q*sqrt3`` with rational ``p``
and ``q``. Float mode is a separate world: the two never mix silently.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

EXACT = "exact"
FLOAT = "float"

DEFAULT_TOLERANCE = 1e-9

_tolerance: contextvars.ContextVar[float] = contextvars.ContextVar(
    "ontosymm_tolerance", default=DEFAULT_TOLERANCE
)


class NumericsError(ValueError):
    pass


class MixedModes(NumericsError):
    """Raised when an exact and a float scalar meet in one operation."""


class ScalarDivisionByZero(NumericsError, ZeroDivisionError):
    pass


def get_tolerance() -> float:
    return _tolerance.get()


@contextlib.contextmanager
def tolerance(tol: float) -> Iterator[float]:
    """Temporarily change the float-mode equality tolerance."""
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    token = _tolerance.set(tol)
    try:
        yield tol
    finally:
        _tolerance.reset(token)


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


Number = Union[int, Fraction, "Scalar"]


@dataclass(frozen=True)
class Scalar:
    """An exact element ``rational + irrational*sqrt3`` or a plain float.

    Build exact values with :meth:`exact` (or the module constants) and
    floats with :meth:`from_float`. Plain ``int`` and ``Fraction`` operands
    are accepted on either side of arithmetic and join the mode of the
    scalar they meet.
    """

    mode: str
    rational: Fraction = Fraction(0)
    irrational: Fraction = Fraction(0)
    value: float = 0.0

    @classmethod
    def exact(cls, p: int | Fraction | str = 0, q: int | Fraction | str = 0) -> Scalar:
        return cls(EXACT, Fraction(p), Fraction(q))

    @classmethod
    def from_float(cls, v: float) -> Scalar:
        return cls(FLOAT, value=float(v))

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT

    def to_float(self) -> Scalar:
        """Lossy conversion to float mode."""
        if not self.is_exact:
            return self
        return Scalar.from_float(float(self))

    def __float__(self) -> float:
        if self.is_exact:
            return float(self.rational) + float(self.irrational) * math.sqrt(3)
        return self.value

    # -- coercion -------------------------------------------------------

    def _coerce(self, other: object) -> Scalar:
        if isinstance(other, Scalar):
            if other.mode != self.mode:
                raise MixedModes(f"cannot combine {self.mode} and {other.mode} scalars")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if self.is_exact:
                return Scalar(EXACT, Fraction(other))
            return Scalar.from_float(float(other))
        if isinstance(other, float):
            if self.is_exact:
                raise MixedModes("float operand in exact arithmetic; convert explicitly")
            return Scalar.from_float(other)
        raise TypeError(f"unsupported operand {other!r}")

    # -- field operations ----------------------------------------------

    def __add__(self, other: object) -> Scalar:
        o = self._coerce(other)
        if self.is_exact:
            if not self.irrational and not o.irrational:
                return Scalar(EXACT, self.rational + o.rational)
            return Scalar(EXACT, self.rational + o.rational, self.irrational + o.irrational)
        return Scalar.from_float(self.value + o.value)

    __radd__ = __add__

    def __neg__(self) -> Scalar:
        if self.is_exact:
            return Scalar(EXACT, -self.rational, -self.irrational)
        return Scalar.from_float(-self.value)

    def __sub__(self, other: object) -> Scalar:
        return self + (-self._coerce(other))

    def __rsub__(self, other: object) -> Scalar:
        return self._coerce(other) - self

    def __mul__(self, other: object) -> Scalar:
        o = self._coerce(other)
        if self.is_exact:
            p1, q1, p2, q2 = self.rational, self.irrational, o.rational, o.irrational
            if not q1 and not q2:
                if not p1 or not p2:
                    return ZERO
                return Scalar(EXACT, p1 * p2)
            return Scalar(EXACT, p1 * p2 + 3 * q1 * q2, p1 * q2 + q1 * p2)
        return Scalar.from_float(self.value * o.value)

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        if self.is_exact:
            p, q = self.rational, self.irrational
            if not p and not q:
                raise ScalarDivisionByZero("division by exact zero")
            if not q:
                return Scalar(EXACT, 1 / p)
            # sqrt3 is irrational, so p^2 - 3q^2 vanishes only at p = q = 0
            norm = p * p - 3 * q * q
            return Scalar(EXACT, p / norm, -q / norm)
        if self.value == 0.0:
            raise ScalarDivisionByZero("division by float zero")
        return Scalar.from_float(1.0 / self.value)

    def __truediv__(self, other: object) -> Scalar:
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other: object) -> Scalar:
        return self._coerce(other) * self.inverse()

    # -- comparison -----------------------------------------------------

    def sign(self) -> int:
        """Sign of the real embedding, decided rationally in exact mode."""
        if not self.is_exact:
            if abs(self.value) <= get_tolerance():
                return 0
            return 1 if self.value > 0 else -1
        sp, sq = _sign(self.rational), _sign(self.irrational)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: the larger of p^2 and 3q^2 wins
        if self.rational**2 > 3 * self.irrational**2:
            return sp
        return sq

    def is_zero(self) -> bool:
        return self.sign() == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, float) and self.is_exact:
            return NotImplemented
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_exact:
            return self.rational == o.rational and self.irrational == o.irrational
        return abs(self.value - o.value) <= get_tolerance()

    def __hash__(self) -> int:
        if self.is_exact:
            return hash((self.rational, self.irrational))
        # tolerance equality is not transitive; floats hash coarsely
        return hash(round(self.value, 6))

    def __lt__(self, other: object) -> bool:
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other: object) -> bool:
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other: object) -> bool:
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other: object) -> bool:
        return (self - self._coerce(other)).sign() >= 0

    # -- text -----------------------------------------------------------

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"Scalar({format_scalar(self)!r})"


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    return a + b


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def scalar_div(a: Scalar, b: Scalar) -> Scalar:
    return a / b


def scalar_cmp(a: Scalar, b: Scalar) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a.mode != b.mode:
        raise MixedModes(f"cannot compare {a.mode} and {b.mode} scalars")
    return (a - b).sign()


ZERO = Scalar.exact(0)
ONE = Scalar.exact(1)
HALF = Scalar.exact(Fraction(1, 2))
QUARTER = Scalar.exact(Fraction(1, 4))
SQRT3 = Scalar.exact(0, 1)
HALF_SQRT3 = Scalar.exact(0, Fraction(1, 2))


def zero_like(s: Scalar) -> Scalar:
    return ZERO if s.is_exact else Scalar.from_float(0.0)


def one_like(s: Scalar) -> Scalar:
    return ONE if s.is_exact else Scalar.from_float(1.0)


def unit(mode: str) -> Scalar:
    return ONE if mode == EXACT else Scalar.from_float(1.0)


def zero(mode: str) -> Scalar:
    return ZERO if mode == EXACT else Scalar.from_float(0.0)


def total(values, mode: str = EXACT) -> Scalar:
    """Sum of scalars, starting from the zero of ``mode``."""
    if mode != EXACT:
        acc = zero(mode)
        for v in values:
            acc = acc + v
        return acc
    p = q = Fraction(0)
    for v in values:
        if v.mode != EXACT:
            raise MixedModes("float scalar in an exact sum")
        if v.rational:
            p += v.rational
        if v.irrational:
            q += v.irrational
    return Scalar(EXACT, p, q)


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def format_scalar(s: Scalar) -> str:
    """Canonical text: ``"p/q + r/s*sqrt3"`` or a float literal."""
    if s.is_exact:
        return f"{_frac(s.rational)} + {_frac(s.irrational)}*sqrt3"
    return repr(s.value)


_RAT = r"[+-]?\d+(?:/\d+)?"
_EXACT_RE = re.compile(
    rf"^\s*(?P<p>{_RAT})?\s*(?:(?P<op>[+-])\s*(?P<q>{_RAT})?\s*\*?\s*sqrt3)?\s*$"
)


def parse_scalar(text: str | int | float, mode: str = EXACT) -> Scalar:
    """Inverse of :func:`format_scalar`.

    Accepts the canonical ``"p/q + r/s*sqrt3"`` form, bare rationals
    ("1/4", "3") and, in float mode, any decimal literal. A JSON number
    that is not an integer is only accepted in float mode.
    """
    if isinstance(text, bool):
        raise NumericsError(f"not a scalar: {text!r}")
    if isinstance(text, int):
        return Scalar.exact(text) if mode == EXACT else Scalar.from_float(text)
    if isinstance(text, float):
        if mode == EXACT:
            raise NumericsError(f"float literal {text!r} in exact mode")
        return Scalar.from_float(text)
    m = _EXACT_RE.match(text)
    if m and (m.group("p") is not None or m.group("op")):
        p = Fraction(m.group("p") or 0)
        q = Fraction(0)
        if m.group("op"):
            q = Fraction(m.group("q") or 1)
            if m.group("op") == "-":
                q = -q
        s = Scalar.exact(p, q)
        return s if mode == EXACT else s.to_float()
    if mode == FLOAT:
        try:
            return Scalar.from_float(float(text))
        except ValueError:
            pass
    raise NumericsError(f"cannot parse scalar {text!r} in {mode} mode")


@dataclass(frozen=True)
class Direction:
    """Unit vector in R^3 with scalar components."""

    x: Scalar
    y: Scalar
    z: Scalar

    def __post_init__(self) -> None:
        modes = {self.x.mode, self.y.mode, self.z.mode}
        if len(modes) != 1:
            raise MixedModes("direction components must share a mode")
        norm = self.x * self.x + self.y * self.y + self.z * self.z
        if self.mode == EXACT:
            if norm != ONE:
                raise NumericsError(f"direction {self} has squared norm {norm}, not 1")
        elif abs(norm.value - 1.0) > DEFAULT_TOLERANCE:
            raise NumericsError(f"direction {self} has squared norm {norm.value}, not 1")

    @property
    def mode(self) -> str:
        return self.x.mode

    @classmethod
    def of(cls, x, y, z, mode: str = EXACT) -> Direction:
        return cls(*(c if isinstance(c, Scalar) else parse_scalar(c, mode) for c in (x, y, z)))

    def components(self) -> tuple[Scalar, Scalar, Scalar]:
        return (self.x, self.y, self.z)

    def to_float(self) -> Direction:
        return Direction(self.x.to_float(), self.y.to_float(), self.z.to_float())

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components()) + ")"


def dot(n: Direction, m: Direction) -> Scalar:
    if n.mode != m.mode:
        raise MixedModes("cannot take dot product of exact and float directions")
    return n.x * m.x + n.y * m.y + n.z * m.z
