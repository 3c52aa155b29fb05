"""Truncated noncommutative power series and the Magnus embedding.

The completed group ring of a free pro-ell group on ``m`` generators is
identified with ``Q_ell<<T_1, ..., T_m>>`` by sending the generator
``gamma_i`` to ``1 + T_i``.  An :class:`NcSeries` stores such a series modulo
the ``truncation``-th power of the augmentation ideal, i.e. every monomial of
degree at least ``truncation`` is discarded.

Words are tuples of generator indices.  Iteration order is always
length-then-lexicographic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Iterator, Mapping, Sequence

from .padics import PadicScalar, PrimeMismatch, binomial

Word = tuple[int, ...]


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Generator labels with their weights (1 for genus, 2 for punctures)."""

    names: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator labels must be distinct")
        if len(self.weights) != len(self.names):
            raise ValueError("one weight per generator")
        if any(w not in (1, 2) for w in self.weights):
            raise ValueError("weights must be 1 or 2")

    @classmethod
    def punctured(cls, rank: int, prefix: str = "c") -> Alphabet:
        """All-weight-2 alphabet: loops around punctures of the projective line."""
        return cls(tuple(f"{prefix}{i + 1}" for i in range(rank)), (2,) * rank)

    @classmethod
    def uniform(cls, rank: int, weight: int = 1, prefix: str = "g") -> Alphabet:
        return cls(tuple(f"{prefix}{i + 1}" for i in range(rank)), (weight,) * rank)

    @property
    def rank(self) -> int:
        return len(self.names)

    def weighted_degree(self, word: Word) -> int:
        return sum(self.weights[i] for i in word)

    def format_word(self, word: Word) -> str:
        if not word:
            return "1"
        return "*".join(f"T[{self.names[i]}]" for i in word)

    def to_json(self) -> dict:
        return {"names": list(self.names), "weights": list(self.weights)}

    @classmethod
    def from_json(cls, data: dict | list) -> Alphabet:
        if isinstance(data, list):
            return cls(tuple(data), (2,) * len(data))
        return cls(tuple(data["names"]), tuple(data["weights"]))


def words(alphabet: Alphabet, n: int) -> list[Word]:
    """All words of length ``< n`` in length-then-lex order."""
    out: list[Word] = []
    for d in range(n):
        out.extend(itertools.product(range(alphabet.rank), repeat=d))
    return out


def _sort_key(w: Word) -> tuple[int, Word]:
    return (len(w), w)


class NcSeries:
    """Element of ``Q_ell<<T>> / I^truncation`` with sparse coefficients."""

    __slots__ = ("alphabet", "prime", "truncation", "_coeffs")

    def __init__(
        self,
        alphabet: Alphabet,
        prime: int,
        truncation: int,
        coeffs: Mapping[Word, PadicScalar | int | Fraction] | None = None,
    ):
        if truncation < 1:
            raise ValueError("truncation must be positive")
        self.alphabet = alphabet
        self.prime = prime
        self.truncation = truncation
        store: dict[Word, PadicScalar] = {}
        for w, c in (coeffs or {}).items():
            w = tuple(w)
            if any(i < 0 or i >= alphabet.rank for i in w):
                raise ValueError(f"word {w} uses letters outside the alphabet")
            if len(w) >= truncation:
                continue
            c = PadicScalar.coerce(c, prime)
            if not c.is_zero():
                store[w] = c
        self._coeffs = store

    @classmethod
    def _from_store(
        cls, alphabet: Alphabet, prime: int, truncation: int, store: dict[Word, PadicScalar]
    ) -> NcSeries:
        obj = object.__new__(cls)
        obj.alphabet = alphabet
        obj.prime = prime
        obj.truncation = truncation
        obj._coeffs = store
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, alphabet: Alphabet, prime: int, truncation: int) -> NcSeries:
        return cls._from_store(alphabet, prime, truncation, {})

    @classmethod
    def one(cls, alphabet: Alphabet, prime: int, truncation: int) -> NcSeries:
        return cls.constant(1, alphabet, prime, truncation)

    @classmethod
    def constant(cls, c, alphabet: Alphabet, prime: int, truncation: int) -> NcSeries:
        return cls(alphabet, prime, truncation, {(): c})

    @classmethod
    def variable(cls, i: int, alphabet: Alphabet, prime: int, truncation: int) -> NcSeries:
        """The series ``T_i``."""
        return cls(alphabet, prime, truncation, {(i,): 1})

    @classmethod
    def monomial(cls, word: Word, alphabet: Alphabet, prime: int, truncation: int) -> NcSeries:
        return cls(alphabet, prime, truncation, {tuple(word): 1})

    # -- access -----------------------------------------------------------

    def coeff(self, word: Word) -> PadicScalar:
        return self._coeffs.get(tuple(word), PadicScalar.zero(self.prime))

    __getitem__ = coeff

    def items(self) -> list[tuple[Word, PadicScalar]]:
        """Nonzero terms in length-then-lex order."""
        return sorted(self._coeffs.items(), key=lambda kv: _sort_key(kv[0]))

    def support(self) -> list[Word]:
        return sorted(self._coeffs, key=_sort_key)

    def __iter__(self) -> Iterator[tuple[Word, PadicScalar]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def degree_part(self, d: int) -> NcSeries:
        store = {w: c for w, c in self._coeffs.items() if len(w) == d}
        return NcSeries._from_store(self.alphabet, self.prime, self.truncation, store)

    def truncate(self, n: int) -> NcSeries:
        n = min(n, self.truncation)
        store = {w: c for w, c in self._coeffs.items() if len(w) < n}
        return NcSeries._from_store(self.alphabet, self.prime, n, store)

    def filter(self, keep) -> NcSeries:
        store = {w: c for w, c in self._coeffs.items() if keep(w)}
        return NcSeries._from_store(self.alphabet, self.prime, self.truncation, store)

    def min_valuation(self) -> int | float:
        return min((c.valuation for c in self._coeffs.values()), default=float("inf"))

    # -- ring structure ---------------------------------------------------

    def _compatible(self, other: NcSeries) -> int:
        if not isinstance(other, NcSeries):
            raise TypeError(f"expected NcSeries, got {type(other).__name__}")
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("series over different alphabets")
        if other.prime != self.prime:
            raise PrimeMismatch(f"prime {self.prime} != {other.prime}")
        return min(self.truncation, other.truncation)

    def _lift(self, other) -> NcSeries:
        if isinstance(other, NcSeries):
            return other
        return NcSeries.constant(other, self.alphabet, self.prime, self.truncation)

    def __add__(self, other) -> NcSeries:
        other = self._lift(other)
        n = self._compatible(other)
        store = {w: c for w, c in self._coeffs.items() if len(w) < n}
        for w, c in other._coeffs.items():
            if len(w) >= n:
                continue
            s = store[w] + c if w in store else c
            if s.is_zero():
                store.pop(w, None)
            else:
                store[w] = s
        return NcSeries._from_store(self.alphabet, self.prime, n, store)

    __radd__ = __add__

    def __neg__(self) -> NcSeries:
        store = {w: -c for w, c in self._coeffs.items()}
        return NcSeries._from_store(self.alphabet, self.prime, self.truncation, store)

    def __sub__(self, other) -> NcSeries:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> NcSeries:
        return self._lift(other) - self

    def scalar_mul(self, c: PadicScalar | int | Fraction) -> NcSeries:
        c = PadicScalar.coerce(c, self.prime)
        store = {}
        for w, x in self._coeffs.items():
            y = c * x
            if not y.is_zero():
                store[w] = y
        return NcSeries._from_store(self.alphabet, self.prime, self.truncation, store)

    def __mul__(self, other) -> NcSeries:
        if not isinstance(other, NcSeries):
            return self.scalar_mul(other)
        n = self._compatible(other)
        # bucket the right factor by degree so high-degree pairs are skipped
        right: dict[int, list[tuple[Word, PadicScalar]]] = {}
        for w, c in other._coeffs.items():
            if len(w) < n:
                right.setdefault(len(w), []).append((w, c))
        store: dict[Word, PadicScalar] = {}
        for u, a in self._coeffs.items():
            room = n - len(u)
            for d, terms in right.items():
                if d >= room:
                    continue
                for v, b in terms:
                    w = u + v
                    p = a * b
                    if w in store:
                        store[w] = store[w] + p
                    else:
                        store[w] = p
        store = {w: c for w, c in store.items() if not c.is_zero()}
        return NcSeries._from_store(self.alphabet, self.prime, n, store)

    def __rmul__(self, other) -> NcSeries:
        return self.scalar_mul(other)

    def __pow__(self, k: int) -> NcSeries:
        if k < 0:
            raise ValueError("use inverse() for negative powers")
        result = NcSeries.one(self.alphabet, self.prime, self.truncation)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> NcSeries:
        """Multiplicative inverse of a series with unit augmentation."""
        a = self.augmentation()
        if a.is_zero():
            raise ZeroDivisionError("augmentation is zero")
        x = self.scalar_mul(a.inv()) - 1
        # (1 + x)^-1 = sum (-x)^j, finite modulo I^n
        acc = NcSeries.one(self.alphabet, self.prime, self.truncation)
        term = acc
        for _ in range(1, self.truncation):
            term = term * (-x)
            acc = acc + term
        return acc.scalar_mul(a.inv())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NcSeries):
            if isinstance(other, (int, Fraction, PadicScalar)):
                other = self._lift(other)
            else:
                return NotImplemented
        try:
            return (self - other).is_zero()
        except (AlphabetMismatch, PrimeMismatch):
            return False

    __hash__ = None  # type: ignore[assignment]

    def augmentation(self) -> PadicScalar:
        return self.coeff(())

    # -- display / io -----------------------------------------------------

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"NcSeries(0 mod I^{self.truncation})"
        terms = []
        for w, c in self.items():
            q = c.rational_guess()
            terms.append(f"({q})*{self.alphabet.format_word(w)}" if w else f"({q})")
        return " + ".join(terms) + f" mod I^{self.truncation}"

    def to_json(self) -> dict:
        return {
            "alphabet": self.alphabet.to_json(),
            "prime": self.prime,
            "truncation": self.truncation,
            "coeffs": [[list(w), c.to_json()] for w, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> NcSeries:
        alphabet = Alphabet.from_json(data["alphabet"])
        store = {}
        for w, c in data["coeffs"]:
            store[tuple(w)] = PadicScalar.from_json(c)
        return cls(alphabet, data["prime"], data["truncation"], store)


# -- free pro-ell group elements ------------------------------------------


Exponent = int | PadicScalar


@dataclass(frozen=True)
class GroupWord:
    """Word in the free generators with ell-adic integer exponents."""

    alphabet: Alphabet
    letters: tuple[tuple[int, Exponent], ...] = ()

    def __post_init__(self) -> None:
        for i, e in self.letters:
            if not 0 <= i < self.alphabet.rank:
                raise ValueError(f"generator index {i} out of range")
            if isinstance(e, PadicScalar) and not e.is_integral():
                raise ValueError("exponents must be ell-adic integers")

    @classmethod
    def gen(cls, alphabet: Alphabet, i: int, e: Exponent = 1) -> GroupWord:
        return cls(alphabet, ((i, e),))

    @classmethod
    def identity(cls, alphabet: Alphabet) -> GroupWord:
        return cls(alphabet)

    @classmethod
    def parse(cls, alphabet: Alphabet, spec: Iterable[Sequence]) -> GroupWord:
        """Build from ``[[index, exponent], ...]``."""
        return cls(alphabet, tuple((int(i), int(e)) for i, e in spec))

    def __mul__(self, other: GroupWord) -> GroupWord:
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("words over different alphabets")
        return GroupWord(self.alphabet, self.letters + other.letters)

    def inverse(self) -> GroupWord:
        return GroupWord(self.alphabet, tuple((i, -e) for i, e in reversed(self.letters)))

    def __pow__(self, k: int) -> GroupWord:
        if k < 0:
            return self.inverse() ** (-k)
        return GroupWord(self.alphabet, self.letters * k)

    def conjugate_by(self, f: GroupWord) -> GroupWord:
        """``f * self * f^-1``."""
        return f * self * f.inverse()

    def is_identity(self) -> bool:
        return all(isinstance(e, int) and e == 0 for _, e in self.letters)

    def to_json(self) -> list:
        out = []
        for i, e in self.letters:
            out.append([i, e if isinstance(e, int) else e.to_json()])
        return out

    @classmethod
    def from_json(cls, alphabet: Alphabet, data: list) -> GroupWord:
        letters = []
        for i, e in data:
            letters.append((int(i), e if isinstance(e, int) else PadicScalar.from_json(e)))
        return cls(alphabet, tuple(letters))


def commutator(u: GroupWord, v: GroupWord) -> GroupWord:
    """``[u, v] = u v u^-1 v^-1``."""
    return u * v * u.inverse() * v.inverse()


def power_series_of_generator(
    i: int, e: Exponent, alphabet: Alphabet, prime: int, truncation: int
) -> NcSeries:
    """``(1 + T_i)^e = sum_k binom(e, k) T_i^k`` modulo ``I^truncation``."""
    store = {}
    for k in range(truncation):
        c = binomial(e, k, prime)
        if not c.is_zero():
            store[(i,) * k] = c
    return NcSeries(alphabet, prime, truncation, store)


def magnus_embed(w: GroupWord, truncation: int, prime: int) -> NcSeries:
    """Image of a group element under ``gamma_i -> 1 + T_i``."""
    result = NcSeries.one(w.alphabet, prime, truncation)
    for i, e in w.letters:
        if isinstance(e, PadicScalar) and e.prime != prime:
            raise PrimeMismatch("exponent prime differs from target prime")
        result = result * power_series_of_generator(i, e, w.alphabet, prime, truncation)
    return result


def log_grouplike(g: NcSeries) -> NcSeries:
    """``log(g) = sum_{j>=1} (-1)^(j+1) (g - 1)^j / j``, finite modulo ``I^n``."""
    if g.augmentation() != 1:
        raise ValueError("log_grouplike expects augmentation 1")
    x = g - 1
    acc = NcSeries.zero(g.alphabet, g.prime, g.truncation)
    power = NcSeries.one(g.alphabet, g.prime, g.truncation)
    for j in range(1, g.truncation):
        power = power * x
        if power.is_zero():
            break
        acc = acc + power.scalar_mul(Fraction((-1) ** (j + 1), j))
    return acc


def exp_augzero(x: NcSeries) -> NcSeries:
    """``exp(x) = sum x^j / j!`` for ``x`` in the augmentation ideal."""
    if not x.augmentation().is_zero():
        raise ValueError("exp_augzero expects augmentation 0")
    acc = NcSeries.one(x.alphabet, x.prime, x.truncation)
    power = acc
    for j in range(1, x.truncation):
        power = power * x
        if power.is_zero():
            break
        acc = acc + power.scalar_mul(Fraction(1, factorial(j)))
    return acc


def abelianize(a: NcSeries) -> NcSeries:
    """Image in the commutative quotient, with each word stored sorted."""
    store: dict[Word, PadicScalar] = {}
    for w, c in a.items():
        key = tuple(sorted(w))
        store[key] = store[key] + c if key in store else c
    return NcSeries(a.alphabet, a.prime, a.truncation, store)


def h1_coordinates(g: NcSeries) -> list[PadicScalar]:
    """Coordinates of the class of ``g - 1`` in ``I/I^2`` (the abelianization)."""
    return [g.coeff((i,)) for i in range(g.alphabet.rank)]


def _infiltrations(u: Word, v: Word) -> Iterator[Word]:
    """Terms of the infiltration product: shuffles plus merges of equal letters."""
    if not u:
        yield v
        return
    if not v:
        yield u
        return
    for w in _infiltrations(u[1:], v):
        yield (u[0],) + w
    for w in _infiltrations(u, v[1:]):
        yield (v[0],) + w
    if u[0] == v[0]:
        for w in _infiltrations(u[1:], v[1:]):
            yield (u[0],) + w


def is_grouplike(g: NcSeries) -> bool:
    """Check ``Delta(g) = g (x) g`` in degrees below the truncation.

    Since ``gamma -> 1 + T`` gives ``Delta(T_i) = T_i (x) 1 + 1 (x) T_i + T_i (x) T_i``,
    group-like coefficients satisfy ``c(u) c(v) = sum_{w in u inf v} c(w)``
    over the infiltration product, whenever ``|u| + |v| < n``.
    """
    if g.augmentation() != 1:
        return False
    ws = words(g.alphabet, g.truncation)
    for u in ws:
        if not u:
            continue
        for v in ws:
            if not v or len(u) + len(v) >= g.truncation:
                continue
            lhs = g.coeff(u) * g.coeff(v)
            rhs = PadicScalar.zero(g.prime)
            for w in _infiltrations(u, v):
                rhs = rhs + g.coeff(w)
            if lhs != rhs:
                return False
    return True
