"""Exact arithmetic in real quadratic extensions of the rationals.

Numbers are stored as a + b*sqrt(d) with rational a, b and a squarefree
integer radicand d >= 0.  Radicands are canonicalized (square parts pulled
into b, rationals forced to d == 0), so equality is componentwise and
values from different extensions can at least be compared for equality.
Mixing two genuinely different irrational radicands in one sum raises;
callers that need that live in floating point instead.

Everything the builders need stays inside one extension: for a rational
stretch factor lam >= 2 the cylinder data lives in Q(sqrt(lam^2-4)), and
eigendirections of integer matrices live in Q(sqrt(trace^2-4)).
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt as _isqrt
from numbers import Rational
from typing import Union

Scalar = Union[int, Fraction, "QuadExt"]


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s*s*m with m squarefree; returns (s, m). n must be >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    if n in (0, 1):
        return 1, n
    s, m, p = 1, n, 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                m *= p
        # after dividing out p the remaining m may still be large; continue
        p += 1 if p == 2 else 2
    return s, n // (s * s)


class QuadExt:
    """Immutable element a + b*sqrt(d) of a real quadratic field."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 0):
        a = Fraction(a)
        b = Fraction(b)
        d = int(d)
        if b == 0:
            d = 0
        elif d == 0:
            b = Fraction(0)
        elif d == 1:
            a, b, d = a + b, Fraction(0), 0
        else:
            s, m = _squarefree_split(d)
            if m in (0, 1):
                a, b, d = a + b * s * (m == 1), Fraction(0), 0
            else:
                b, d = b * s, m
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *_):
        raise AttributeError("QuadExt is immutable")

    # -- coercion ---------------------------------------------------------

    @staticmethod
    def of(x) -> "QuadExt":
        if isinstance(x, QuadExt):
            return x
        if isinstance(x, Rational):
            return QuadExt(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to QuadExt")

    def _join(self, other) -> tuple["QuadExt", "QuadExt", int]:
        o = QuadExt.of(other)
        if self.d == o.d:
            return self, o, self.d
        if self.d == 0:
            return self, o, o.d
        if o.d == 0:
            return self, o, self.d
        raise ValueError(f"incompatible radicands {self.d} and {o.d}")

    # -- arithmetic -------------------------------------------------------
    # exact with rationals and same-field elements; an operand that is a
    # float degrades the result to float

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        x, y, d = self._join(other)
        return QuadExt(x.a + y.a, x.b + y.b, d)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        x, y, d = self._join(other)
        return QuadExt(x.a - y.a, x.b - y.b, d)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        return QuadExt.of(other) - self

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        x, y, d = self._join(other)
        return QuadExt(x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        x, y, d = self._join(other)
        nrm = y.a * y.a - y.b * y.b * d
        if nrm == 0:
            raise ZeroDivisionError("division by zero field element")
        inv = QuadExt(y.a / nrm, -y.b / nrm, d)
        return x * inv

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        return QuadExt.of(other) / self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __pow__(self, n: int):
        if n < 0:
            return QuadExt(1) / self ** (-n)
        out = QuadExt(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order ------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d)."""
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * d
        if a > 0:  # b < 0
            return (lhs > rhs) - (lhs < rhs)
        return (rhs > lhs) - (rhs < lhs)

    def _cmp(self, other) -> int:
        if isinstance(other, float):
            a, b = float(self), other
            return (a > b) - (a < b)
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        try:
            x, y, _ = self._join(other)
        except TypeError:
            return NotImplemented
        except ValueError:
            return False  # distinct squarefree radicands never coincide
        return x.a == y.a and x.b == y.b

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- views ------------------------------------------------------------

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def __float__(self):
        if self.b == 0:
            return float(self.a)
        # naive float(a) + float(b)*sqrt(d) cancels catastrophically when a
        # and b are huge with opposite signs (e.g. high powers of quadratic
        # units); go through a 2^-120 rational approximation of sqrt(d)
        scale = 1 << 120
        root = Fraction(_isqrt(self.d * scale * scale), scale)
        value = self.a + self.b * root
        try:
            return float(value)
        except OverflowError:
            return float("inf") if value > 0 else float("-inf")

    def __repr__(self):
        if self.b == 0:
            return f"QuadExt({self.a})"
        return f"QuadExt({self.a}, {self.b}, {self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*r{self.d}"
        return f"{self.a}{'+' if self.b > 0 else ''}{self.b}*r{self.d}"


def quad_sqrt(x) -> QuadExt:
    """Exact square root of a nonnegative rational, as a QuadExt."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of negative rational")
    if x == 0:
        return QuadExt(0)
    # sqrt(p/q) = sqrt(p*q)/q
    n = x.numerator * x.denominator
    s, m = _squarefree_split(n)
    coeff = Fraction(s, x.denominator)
    if m == 1:
        return QuadExt(coeff)
    return QuadExt(0, coeff, m)


def sqrt_is_exact(x) -> bool:
    """True when x is a nonnegative rational (so quad_sqrt applies)."""
    try:
        return Fraction(x) >= 0
    except (TypeError, ValueError):
        return False


def root_plus(lam) -> QuadExt:
    """Larger root r of r + 1/r = lam, i.e. (lam + sqrt(lam^2-4))/2; lam >= 2 rational."""
    lam = Fraction(lam)
    if lam < 2:
        raise ValueError("root_plus needs lam >= 2")
    disc = lam * lam - 4
    return (QuadExt(lam) + quad_sqrt(disc)) / 2
