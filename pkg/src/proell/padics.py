"""Elements of Q_ell with explicit absolute precision.

A :class:`PadicScalar` is either *known*, meaning ``ell**valuation * unit``
modulo ``ell**abs_precision``, or a zero known modulo ``ell**floor``.  A zero
with ``floor=None`` is exact and acts as a true additive identity.

Precision only ever shrinks: every operation reports the absolute precision
implied by its operands, so a result is never claimed to more digits than the
inputs justify.

>>> a = PadicScalar.from_int(1, 3, prec=5)
>>> b = PadicScalar.from_int(2, 3, prec=5)
>>> str(a + b)
'3^1 * 1 + O(3^5)'
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

DEFAULT_PRECISION = 64

_precision: contextvars.ContextVar[int] = contextvars.ContextVar(
    "proell_precision", default=DEFAULT_PRECISION
)


class PrimeMismatch(ValueError):
    pass


class PrecisionError(ArithmeticError):
    """Raised when a decision needs more digits than are known."""


def get_precision() -> int:
    return _precision.get()


@contextlib.contextmanager
def working_precision(prec: int) -> Iterator[int]:
    """Temporarily change the default absolute precision for new scalars."""
    if prec < 1:
        raise ValueError("precision must be positive")
    token = _precision.set(prec)
    try:
        yield prec
    finally:
        _precision.reset(token)


@lru_cache(maxsize=4096)
def _ppow(p: int, e: int) -> int:
    return p**e


def val_int(n: int, ell: int) -> int:
    """Largest ``e`` with ``ell**e`` dividing the nonzero integer ``n``."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    if ell < 2:
        raise ValueError("ell must be a prime")
    n = abs(n)
    e = 0
    # strip large powers first; keeps this fast on big integers
    step, pw = 1, ell
    while n % pw == 0:
        n //= pw
        e += step
        step *= 2
        pw *= pw
    while n % ell == 0:
        n //= ell
        e += 1
    return e


def val_fraction(x: Fraction, ell: int) -> int:
    return val_int(x.numerator, ell) - val_int(x.denominator, ell)


class PadicScalar:
    """Immutable ell-adic number known to finite absolute precision."""

    __slots__ = ("prime", "valuation", "unit", "abs_precision", "_zero")

    prime: int
    valuation: int
    unit: int
    abs_precision: int | None
    _zero: bool

    def __init__(self, prime: int, valuation: int, unit: int, abs_precision: int):
        if unit % prime == 0:
            raise ValueError("unit part must be prime to ell")
        if valuation >= abs_precision:
            raise ValueError("valuation must be below the absolute precision")
        self.prime = prime
        self.valuation = valuation
        self.unit = unit % _ppow(prime, abs_precision - valuation)
        self.abs_precision = abs_precision
        self._zero = False

    # -- constructors -----------------------------------------------------

    @classmethod
    def _raw(cls, prime: int, valuation: int, unit: int, prec: int) -> PadicScalar:
        obj = object.__new__(cls)
        obj.prime = prime
        obj.valuation = valuation
        obj.unit = unit
        obj.abs_precision = prec
        obj._zero = False
        return obj

    @classmethod
    def zero(cls, prime: int, floor: int | None = None) -> PadicScalar:
        """Zero modulo ``prime**floor``; ``floor=None`` means exactly zero."""
        obj = object.__new__(cls)
        obj.prime = prime
        obj.valuation = 0
        obj.unit = 0
        obj.abs_precision = floor
        obj._zero = True
        return obj

    @classmethod
    def _normalize(cls, prime: int, v: int, s: int, prec: int) -> PadicScalar:
        # value ell**v * s known mod ell**prec
        if prec - v <= 0:
            return cls.zero(prime, prec)
        s %= _ppow(prime, prec - v)
        if s == 0:
            return cls.zero(prime, prec)
        if s % prime == 0:
            e = val_int(s, prime)
            v += e
            s //= _ppow(prime, e)
        return cls._raw(prime, v, s, prec)

    @classmethod
    def from_int(cls, n: int, prime: int, prec: int | None = None) -> PadicScalar:
        if prec is None:
            prec = get_precision()
        if n == 0:
            return cls.zero(prime)
        v = val_int(n, prime)
        return cls._normalize(prime, v, n // _ppow(prime, v), prec)

    @classmethod
    def from_fraction(
        cls, x: Fraction | int, prime: int, prec: int | None = None
    ) -> PadicScalar:
        """Embed a rational number, known modulo ``prime**prec``."""
        x = Fraction(x)
        if prec is None:
            prec = get_precision()
        if x == 0:
            return cls.zero(prime)
        v = val_fraction(x, prime)
        num = x.numerator // _ppow(prime, max(v, 0))
        den = x.denominator // _ppow(prime, max(-v, 0))
        if prec - v <= 0:
            return cls.zero(prime, prec)
        mod = _ppow(prime, prec - v)
        return cls._raw(prime, v, num * pow(den, -1, mod) % mod, prec)

    @classmethod
    def coerce(cls, x: PadicScalar | int | Fraction, prime: int) -> PadicScalar:
        if isinstance(x, PadicScalar):
            if x.prime != prime:
                raise PrimeMismatch(f"prime {x.prime} != {prime}")
            return x
        if isinstance(x, int):
            return cls.from_int(x, prime)
        return cls.from_fraction(x, prime)

    # -- predicates -------------------------------------------------------

    @property
    def kind(self) -> str:
        return "exact-zero" if self._zero else "known"

    def is_zero(self) -> bool:
        """True when the value is zero at the known precision."""
        return self._zero

    def is_exact_zero(self) -> bool:
        return self._zero and self.abs_precision is None

    def is_unit(self) -> bool:
        return not self._zero and self.valuation == 0

    def is_integral(self) -> bool:
        return self._zero or self.valuation >= 0

    def val(self) -> int | float:
        """Valuation; for a zero this is its floor (``inf`` when exact)."""
        if self._zero:
            return float("inf") if self.abs_precision is None else self.abs_precision
        return self.valuation

    @property
    def relative_precision(self) -> int | float:
        if self._zero:
            return 0
        return self.abs_precision - self.valuation

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: object) -> PadicScalar:
        if isinstance(other, PadicScalar):
            if other.prime != self.prime:
                raise PrimeMismatch(f"prime {self.prime} != {other.prime}")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.coerce(other, self.prime)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        b = self._check(other)
        if b is NotImplemented:
            return NotImplemented
        a = self
        p = a.prime
        if a._zero or b._zero:
            if a._zero and b._zero:
                return PadicScalar.zero(p, _min_prec(a.abs_precision, b.abs_precision))
            z, x = (a, b) if a._zero else (b, a)
            if z.abs_precision is None:
                return x
            if z.abs_precision >= x.abs_precision:
                return x
            return PadicScalar._normalize(p, x.valuation, x.unit, z.abs_precision)
        prec = min(a.abs_precision, b.abs_precision)
        if a.valuation <= b.valuation:
            v = a.valuation
            s = a.unit + b.unit * _ppow(p, b.valuation - v)
        else:
            v = b.valuation
            s = b.unit + a.unit * _ppow(p, a.valuation - v)
        return PadicScalar._normalize(p, v, s, prec)

    __radd__ = __add__

    def __neg__(self) -> PadicScalar:
        if self._zero:
            return self
        return PadicScalar._raw(
            self.prime,
            self.valuation,
            (-self.unit) % _ppow(self.prime, self.abs_precision - self.valuation),
            self.abs_precision,
        )

    def __sub__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        b = self._check(other)
        if b is NotImplemented:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        return (-self) + other

    def __mul__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        b = self._check(other)
        if b is NotImplemented:
            return NotImplemented
        a = self
        p = a.prime
        if a._zero or b._zero:
            if a.is_exact_zero() or b.is_exact_zero():
                return PadicScalar.zero(p)
            if a._zero and b._zero:
                return PadicScalar.zero(p, a.abs_precision + b.abs_precision)
            z, x = (a, b) if a._zero else (b, a)
            return PadicScalar.zero(p, z.abs_precision + x.valuation)
        v = a.valuation + b.valuation
        prec = min(a.valuation + b.abs_precision, b.valuation + a.abs_precision)
        return PadicScalar._raw(p, v, a.unit * b.unit % _ppow(p, prec - v), prec)

    __rmul__ = __mul__

    def inv(self) -> PadicScalar:
        if self._zero:
            raise ZeroDivisionError("cannot invert a zero p-adic scalar")
        rel = self.abs_precision - self.valuation
        return PadicScalar._raw(
            self.prime,
            -self.valuation,
            pow(self.unit, -1, _ppow(self.prime, rel)),
            rel - self.valuation,
        )

    def __truediv__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        b = self._check(other)
        if b is NotImplemented:
            return NotImplemented
        return self * b.inv()

    def __rtruediv__(self, other: PadicScalar | int | Fraction) -> PadicScalar:
        return self.inv() * other

    def __pow__(self, k: int) -> PadicScalar:
        if k < 0:
            return self.inv() ** (-k)
        result = PadicScalar.from_int(1, self.prime, _one_prec(self))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, e: int) -> PadicScalar:
        """Multiply by ``ell**e`` exactly (valuation and precision both move)."""
        if self._zero:
            if self.abs_precision is None:
                return self
            return PadicScalar.zero(self.prime, self.abs_precision + e)
        return PadicScalar._raw(
            self.prime, self.valuation + e, self.unit, self.abs_precision + e
        )

    def with_precision(self, prec: int) -> PadicScalar:
        """Forget digits beyond ``prec`` (never adds digits)."""
        if self._zero:
            return PadicScalar.zero(self.prime, _min_prec(self.abs_precision, prec))
        if prec >= self.abs_precision:
            return self
        return PadicScalar._normalize(self.prime, self.valuation, self.unit, prec)

    # -- comparison / conversion -----------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (PadicScalar, int, Fraction)):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except PrimeMismatch:
            return False

    __hash__ = None  # type: ignore[assignment]

    def to_fraction(self) -> Fraction:
        """The canonical representative ``ell**v * unit`` as a rational."""
        if self._zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def rational_guess(self) -> Fraction:
        """Smallest-height rational agreeing with the unit part to known precision.

        Uses the half extended Euclidean algorithm with bound ``sqrt(M/2)``;
        falls back to :meth:`to_fraction` when no such rational exists.
        """
        if self._zero:
            return Fraction(0)
        mod = _ppow(self.prime, self.abs_precision - self.valuation)
        bound = math.isqrt(mod // 2)
        r0, r1, t0, t1 = mod, self.unit % mod, 0, 1
        while r1 > bound:
            qt = r0 // r1
            r0, r1 = r1, r0 - qt * r1
            t0, t1 = t1, t0 - qt * t1
        if t1 == 0 or abs(t1) > bound or math.gcd(t1, self.prime) != 1:
            return self.to_fraction()
        return Fraction(r1, t1) * Fraction(self.prime) ** self.valuation

    def to_int(self, symmetric: bool = True) -> int:
        """Integer representative of an integral value modulo ``ell**abs_precision``.

        With ``symmetric`` the representative lies in ``(-M/2, M/2]``.
        """
        if self._zero:
            return 0
        if self.valuation < 0:
            raise ValueError("value is not an ell-adic integer")
        mod = _ppow(self.prime, self.abs_precision)
        n = self.unit * _ppow(self.prime, self.valuation) % mod
        if symmetric and n > mod // 2:
            n -= mod
        return n

    def residue(self, k: int) -> int:
        """Reduction modulo ``ell**k`` of an integral value."""
        if self.abs_precision is not None and k > self.abs_precision:
            raise PrecisionError(f"only {self.abs_precision} digits are known")
        if self._zero:
            return 0
        if self.valuation < 0:
            raise ValueError("value is not an ell-adic integer")
        return self.unit * _ppow(self.prime, self.valuation) % _ppow(self.prime, k)

    def __repr__(self) -> str:
        return f"PadicScalar({self})"

    def __str__(self) -> str:
        p = self.prime
        if self._zero:
            return "0" if self.abs_precision is None else f"O({p}^{self.abs_precision})"
        return f"{p}^{self.valuation} * {self.unit} + O({p}^{self.abs_precision})"

    def to_json(self) -> dict:
        if self._zero:
            return {"prime": self.prime, "zero_floor": self.abs_precision}
        return {
            "prime": self.prime,
            "valuation": self.valuation,
            "unit": self.unit,
            "abs_precision": self.abs_precision,
        }

    @classmethod
    def from_json(cls, data: dict) -> PadicScalar:
        if "zero_floor" in data:
            return cls.zero(data["prime"], data["zero_floor"])
        return cls(data["prime"], data["valuation"], data["unit"], data["abs_precision"])


def _min_prec(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _one_prec(x: PadicScalar) -> int:
    if x.abs_precision is None:
        return get_precision()
    return max(x.abs_precision - x.valuation, 1)


def padic(x: int | Fraction, prime: int, prec: int | None = None) -> PadicScalar:
    """Shorthand for embedding an integer or rational."""
    if isinstance(x, int):
        return PadicScalar.from_int(x, prime, prec)
    return PadicScalar.from_fraction(x, prime, prec)


def binomial(e: PadicScalar | int, k: int, prime: int) -> PadicScalar:
    """``binom(e, k)`` for an ell-adic integer ``e``.

    Integer exponents are handled exactly.  For a :class:`PadicScalar`
    exponent the falling factorial is divided by ``k!`` with the valuation of
    ``k!`` subtracted from the absolute precision.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if isinstance(e, int):
        num = 1
        for j in range(k):
            num *= e - j
        fact = 1
        for j in range(2, k + 1):
            fact *= j
        return PadicScalar.from_int(num // fact, prime)
    if not e.is_integral():
        raise ValueError("binomial exponent must be an ell-adic integer")
    acc = PadicScalar.from_int(1, prime)
    for j in range(k):
        acc = acc * (e - j)
    fact = 1
    for j in range(2, k + 1):
        fact *= j
    return acc / PadicScalar.from_int(fact, prime, prec=get_precision() + val_int(fact, prime) + 1)
