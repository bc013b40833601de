"""Exact and certified scalar types.

Three kinds of numbers flow through the polytopic code:

* ``Fraction`` for purely rational systems,
* ``QuadraticScalar`` for elements ``a + b*sqrt(k)`` of a real quadratic field,
* ``IntervalScalar`` for quantities known only up to a declared binary precision.

All of them support ``+ - * /`` and can be compared with :func:`sign`, which is
the single point where the code decides whether a number is negative, zero or
positive.  Floats (quantum backend) are accepted by :func:`sign` as well, with
the global tolerance :data:`FLOAT_TOL`.
"""

from __future__ import annotations

import math
import threading
from enum import Enum
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath import iv

_IV_LOCK = threading.Lock()

FLOAT_TOL = 1e-9
DEFAULT_PRECISION = 128


class Certainty(str, Enum):
    EXACT = "Exact"
    CERTIFIED = "CertifiedWithinPrecision"


class IndeterminateError(ArithmeticError):
    """The sign of an interval quantity cannot be decided at the working precision."""


class FieldMismatchError(TypeError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _square_free(k: int) -> bool:
    if k < 2:
        return False
    f = 2
    while f * f <= k:
        if k % (f * f) == 0:
            return False
        f += 1
    return True


class QuadraticScalar:
    """Element ``a + b*sqrt(k)`` of Q(sqrt(k)) with rational ``a`` and ``b``."""

    __slots__ = ("a", "b", "k")

    def __init__(self, a=0, b=0, k: int = 1):
        a = as_fraction(a)
        b = as_fraction(b)
        if k == 1:
            a, b = a + b, Fraction(0)
        elif not _square_free(k):
            raise ValueError(f"k must be a square-free integer > 1, got {k}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k", k)

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticScalar is immutable")

    @classmethod
    def sqrt(cls, k: int) -> "QuadraticScalar":
        return cls(0, 1, k)

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadraticScalar):
            if other.k == self.k or other.b == 0:
                return other.a, other.b
            if self.b == 0:
                return None
            raise FieldMismatchError(f"Q(sqrt({self.k})) vs Q(sqrt({other.k}))")
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _k_with(self, other) -> int:
        if isinstance(other, QuadraticScalar) and self.b == 0 and other.b != 0:
            return other.k
        return self.k

    def _binary(self, other, op):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        if c is None:  # self is rational, other lives in another field
            return op(QuadraticScalar(self.a, 0, other.k), other)
        return op(self, QuadraticScalar(c[0], c[1], self._k_with(other)))

    def __add__(self, other):
        def op(x, y):
            return QuadraticScalar(x.a + y.a, x.b + y.b, max(x.k, y.k))
        return self._binary(other, op)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticScalar(-self.a, -self.b, self.k)

    def __pos__(self):
        return self

    def __sub__(self, other):
        def op(x, y):
            return QuadraticScalar(x.a - y.a, x.b - y.b, max(x.k, y.k))
        return self._binary(other, op)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        def op(x, y):
            k = max(x.k, y.k)
            return QuadraticScalar(x.a * y.a + k * x.b * y.b, x.a * y.b + x.b * y.a, k)
        return self._binary(other, op)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticScalar":
        norm = self.a * self.a - self.k * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return QuadraticScalar(self.a / norm, -self.b / norm, self.k)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in quadratic field")
            return QuadraticScalar(self.a / other, self.b / other, self.k)
        if isinstance(other, QuadraticScalar):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticScalar(1, 0, self.k)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order --------------------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with k b^2
        diff = self.a * self.a - self.k * self.b * self.b
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def _cmp(self, other):
        try:
            d = self - other
        except FieldMismatchError:
            raise
        if d is NotImplemented:
            return NotImplemented
        return d.sign()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadraticScalar)):
            c = self._coerce(other)
            if c is None:
                return self.a == other.a and other.b == 0
            return self.a == c[0] and self.b == c[1]
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.k))

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.k)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_interval(self, precision: int = DEFAULT_PRECISION) -> "IntervalScalar":
        if self.b == 0:
            return IntervalScalar.exact(self.a, precision)
        return IntervalScalar.exact(self.a, precision) + IntervalScalar.sqrt_of(
            self.k, precision
        ) * self.b

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticScalar({self.a})"
        return f"QuadraticScalar({self.a} + {self.b}*sqrt({self.k}))"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.k})"


def _raw_to_fraction(raw) -> Fraction:
    sgn, man, exp, _ = raw
    if not man:
        if exp:
            raise ValueError("non-finite interval endpoint")
        return Fraction(0)
    man = -int(man) if sgn else int(man)
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << (-exp))


def _floor_scaled(x: Fraction, bits: int) -> int:
    return (x.numerator << bits) // x.denominator


def _ceil_scaled(x: Fraction, bits: int) -> int:
    return -((-x.numerator << bits) // x.denominator)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class IntervalScalar:
    """A real number enclosed in ``[lo, hi]`` with endpoints on the grid ``2**-precision``.

    Endpoints are stored as integers ``l, h`` meaning ``[l, h] * 2**-precision``.
    Every operation rounds outward, so the enclosure is rigorous.  An interval
    that contains zero and is narrower than ``2**-(precision // 2)`` is treated as
    zero; a wider one containing zero raises :class:`IndeterminateError` when its
    sign is requested.
    """

    __slots__ = ("_l", "_h", "precision")

    def __init__(self, lo, hi, precision: int = DEFAULT_PRECISION):
        lo = as_fraction(lo)
        hi = as_fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        object.__setattr__(self, "_l", _floor_scaled(lo, precision))
        object.__setattr__(self, "_h", _ceil_scaled(hi, precision))
        object.__setattr__(self, "precision", precision)

    @classmethod
    def _raw(cls, l: int, h: int, precision: int) -> "IntervalScalar":
        obj = object.__new__(cls)
        object.__setattr__(obj, "_l", l)
        object.__setattr__(obj, "_h", h)
        object.__setattr__(obj, "precision", precision)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("IntervalScalar is immutable")

    @classmethod
    def exact(cls, value, precision: int = DEFAULT_PRECISION) -> "IntervalScalar":
        v = as_fraction(value)
        return cls(v, v, precision)

    @classmethod
    def from_mpmath(cls, iv_value, precision: int = DEFAULT_PRECISION) -> "IntervalScalar":
        a, b = iv_value._mpi_
        return cls(_raw_to_fraction(a), _raw_to_fraction(b), precision)

    @classmethod
    def sqrt_of(cls, k: int, precision: int = DEFAULT_PRECISION) -> "IntervalScalar":
        target = k << (2 * precision)
        root = math.isqrt(target)
        return cls._raw(root, root if root * root == target else root + 1, precision)

    @property
    def lo(self) -> Fraction:
        return Fraction(self._l, 1 << self.precision)

    @property
    def hi(self) -> Fraction:
        return Fraction(self._h, 1 << self.precision)

    @property
    def width(self) -> Fraction:
        return Fraction(self._h - self._l, 1 << self.precision)

    @property
    def mid(self) -> Fraction:
        return Fraction(self._l + self._h, 1 << (self.precision + 1))

    @property
    def zero_tolerance(self) -> Fraction:
        return Fraction(1, 1 << (self.precision // 2))

    def _at(self, precision: int) -> tuple[int, int]:
        shift = self.precision - precision
        if shift == 0:
            return self._l, self._h
        if shift > 0:
            return self._l >> shift, -((-self._h) >> shift)
        return self._l << -shift, self._h << -shift

    def _coerce(self, other):
        if isinstance(other, IntervalScalar):
            return other
        if isinstance(other, (int, Fraction)):
            return IntervalScalar.exact(other, self.precision)
        if isinstance(other, QuadraticScalar):
            return other.to_interval(self.precision)
        return NotImplemented

    def _pair(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return None
        p = min(self.precision, o.precision)
        return p, self._at(p), o._at(p)

    def __add__(self, other):
        r = self._pair(other)
        if r is None:
            return NotImplemented
        p, (al, ah), (bl, bh) = r
        return IntervalScalar._raw(al + bl, ah + bh, p)

    __radd__ = __add__

    def __neg__(self):
        return IntervalScalar._raw(-self._h, -self._l, self.precision)

    def __pos__(self):
        return self

    def __sub__(self, other):
        r = self._pair(other)
        if r is None:
            return NotImplemented
        p, (al, ah), (bl, bh) = r
        return IntervalScalar._raw(al - bh, ah - bl, p)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        r = self._pair(other)
        if r is None:
            return NotImplemented
        p, (al, ah), (bl, bh) = r
        prods = (al * bl, al * bh, ah * bl, ah * bh)
        return IntervalScalar._raw(min(prods) >> p, -((-max(prods)) >> p), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        r = self._pair(other)
        if r is None:
            return NotImplemented
        p, (al, ah), (bl, bh) = r
        if bl <= 0 <= bh:
            if self._coerce(other).sign() == 0:
                raise ZeroDivisionError("interval division by zero")
            raise IndeterminateError("divisor interval straddles zero")
        nums = (al << p, ah << p)
        lo = min(n // d for n in nums for d in (bl, bh))
        hi = max(_ceil_div(n, d) for n in nums for d in (bl, bh))
        return IntervalScalar._raw(lo, hi, p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def sign(self) -> int:
        """Enclosures inside ``[-2^(-p/2), 2^(-p/2)]`` count as zero."""
        p = self.precision
        tol = 1 << (p - p // 2)
        if -tol <= self._l and self._h <= tol:
            return 0
        if self._l > 0:
            return 1
        if self._h < 0:
            return -1
        raise IndeterminateError(
            f"interval [{float(self.lo):.3e}, {float(self.hi):.3e}] contains zero"
        )

    def _cmp(self, other):
        d = self - other
        if d is NotImplemented:
            return d
        return d.sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    __hash__ = None

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __bool__(self):
        return self.sign() != 0

    def __float__(self):
        return float(self.mid)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __repr__(self):
        return f"IntervalScalar({float(self.mid):.17g} ± {float(self.width / 2):.2e})"

    def __str__(self):
        return f"{float(self.mid):.17g}±{float(self.width / 2):.1e}"


def interval_trig_pi(j: int, n: int, precision: int = DEFAULT_PRECISION):
    """Rigorous enclosures of ``cos(j*pi/n)`` and ``sin(j*pi/n)``."""
    with _IV_LOCK:
        saved = iv.prec
        iv.prec = precision + 32
        try:
            angle = iv.pi * j / n
            c, s = iv.cos(angle), iv.sin(angle)
        finally:
            iv.prec = saved
    return IntervalScalar.from_mpmath(c, precision), IntervalScalar.from_mpmath(s, precision)


def sign(x) -> int:
    """Sign of ``x`` in {-1, 0, 1}; floats use an absolute tolerance of ``FLOAT_TOL``."""
    t = type(x)
    if t is Fraction:
        n = x.numerator
        return (n > 0) - (n < 0)
    if t is int:
        return (x > 0) - (x < 0)
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    if isinstance(x, (QuadraticScalar, IntervalScalar)):
        return x.sign()
    x = float(x)
    if abs(x) <= FLOAT_TOL:
        return 0
    return 1 if x > 0 else -1


def is_zero(x) -> bool:
    return sign(x) == 0


def scalars_equal(x, y) -> bool:
    return sign(x - y) == 0


def certainty_of(values) -> Certainty:
    for v in values:
        if isinstance(v, IntervalScalar) or isinstance(v, float):
            return Certainty.CERTIFIED
        if type(v).__module__ == "numpy":
            return Certainty.CERTIFIED
    return Certainty.EXACT


def to_json(x):
    """Encode a scalar: ``"p/q"`` for rationals, ``{"a", "b"}`` for Q(sqrt k), ``{"lo", "hi"}`` for intervals."""
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"
    if isinstance(x, QuadraticScalar):
        return {"a": to_json(x.a), "b": to_json(x.b)}
    if isinstance(x, IntervalScalar):
        return {"lo": to_json(x.lo), "hi": to_json(x.hi)}
    return float(x)


def from_json(obj, k: int = 1, precision: int | None = None):
    """Inverse of :func:`to_json`; ``k`` selects the quadratic field for ``{"a", "b"}`` objects."""
    if isinstance(obj, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(obj, str):
        return Fraction(obj)
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        if "lo" in obj:
            return IntervalScalar(Fraction(obj["lo"]), Fraction(obj["hi"]),
                                  precision or DEFAULT_PRECISION)
        a = Fraction(obj.get("a", "0"))
        b = Fraction(obj.get("b", "0"))
        kk = int(obj.get("k", k))
        if b == 0 or kk == 1:
            return a + b if kk == 1 else a
        return QuadraticScalar(a, b, kk)
    raise TypeError(f"cannot decode scalar from {obj!r}")
