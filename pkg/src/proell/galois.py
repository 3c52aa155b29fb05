"""Continuous endomorphisms of the group ring given by generator substitution.

An :class:`Endomorphism` records where each generator goes, as a group-like
series.  The models used here are the cyclotomic action
``gamma_i -> gamma_i^q`` on the punctured-line alphabet and its conjugated
variant ``gamma_i -> f_i gamma_i^q f_i^-1``.  Either way the induced action on
``gr^{-k}_W`` is the scalar ``alpha ** (k // level_step)``: for all-weight-2
alphabets ``alpha = q`` and ``level_step = 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .filtration import graded_basis, in_weight, levels
from .ncseries import (
    Alphabet,
    GroupWord,
    NcSeries,
    Word,
    magnus_embed,
    words,
)
from .padics import PadicScalar


class IncompatibleAction(ValueError):
    pass


class NonScalarGradedAction(ValueError):
    pass


def _as_unit(q: int | PadicScalar, prime: int) -> PadicScalar:
    s = PadicScalar.coerce(q, prime)
    if not s.is_unit():
        raise ValueError(f"q = {q} is not an ell-adic unit for ell = {prime}")
    return s


@dataclass
class Endomorphism:
    """Substitution ``T_i -> image_i - 1`` on ``Q_ell<<T>>/I^truncation``."""

    alphabet: Alphabet
    prime: int
    truncation: int
    images: tuple[NcSeries, ...]
    label: str = "custom"
    alpha: int | PadicScalar | None = None
    level_step: int = 1
    q: int | PadicScalar | None = None
    conjugators: tuple[GroupWord, ...] | None = None
    _cache: dict[Word, NcSeries] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.images) != self.alphabet.rank:
            raise ValueError("one image per generator")
        self.images = tuple(img.truncate(self.truncation) for img in self.images)
        for i, img in enumerate(self.images):
            if img.alphabet != self.alphabet or img.prime != self.prime:
                raise IncompatibleAction("image over a different alphabet or prime")
            if img.truncation < self.truncation:
                raise IncompatibleAction("image truncated below the endomorphism")
            if img.augmentation() != 1:
                raise ValueError(f"image of generator {i} must have augmentation 1")
            if img.min_valuation() < 0:
                raise ValueError(f"image of generator {i} is not integral")
            if not in_weight(img - 1, self.alphabet.weights[i]):
                raise ValueError(f"image of generator {i} does not respect the weight filtration")
        self._cache = {(): NcSeries.one(self.alphabet, self.prime, self.truncation)}

    # -- evaluation -------------------------------------------------------

    def _variable(self, i: int) -> NcSeries:
        return self.images[i] - 1

    def monomial_image(self, word: Word) -> NcSeries:
        """Image of ``T^word``, memoised along prefixes."""
        word = tuple(word)
        hit = self._cache.get(word)
        if hit is not None:
            return hit
        img = self.monomial_image(word[:-1]) * self._variable(word[-1])
        self._cache[word] = img
        return img

    def _check(self, a: NcSeries) -> None:
        if a.alphabet != self.alphabet or a.prime != self.prime:
            raise IncompatibleAction("series is over a different alphabet or prime")
        if a.truncation > self.truncation:
            raise IncompatibleAction(
                f"series truncation {a.truncation} exceeds action truncation {self.truncation}"
            )

    def __call__(self, a: NcSeries) -> NcSeries:
        return apply(self, a)

    def level_eigenvalue(self, k: int) -> PadicScalar:
        """Scalar by which the action is expected to act on ``gr^{-k}``."""
        if self.alpha is None:
            raise ValueError("endomorphism has no declared graded scalar")
        if k % self.level_step:
            raise ValueError(f"level {k} is not a multiple of {self.level_step}")
        return PadicScalar.coerce(self.alpha, self.prime) ** (k // self.level_step)

    def truncated(self, n: int) -> Endomorphism:
        if n > self.truncation:
            raise IncompatibleAction("cannot raise the truncation of an action")
        if n == self.truncation:
            return self
        return Endomorphism(
            self.alphabet,
            self.prime,
            n,
            tuple(img.truncate(n) for img in self.images),
            self.label,
            self.alpha,
            self.level_step,
            self.q,
            self.conjugators,
        )

    def compose(self, inner: Endomorphism) -> Endomorphism:
        """``self ∘ inner``: substitute the images of ``inner`` into ``self``."""
        n = min(self.truncation, inner.truncation)
        outer = self.truncated(n)
        images = tuple(apply(outer, img.truncate(n)) for img in inner.images)
        alpha = None
        if self.alpha is not None and inner.alpha is not None and self.level_step == inner.level_step:
            alpha = PadicScalar.coerce(self.alpha, self.prime) * PadicScalar.coerce(inner.alpha, self.prime)
        return Endomorphism(
            self.alphabet, self.prime, n, images, f"({self.label})∘({inner.label})", alpha, self.level_step
        )

    def to_json(self) -> dict:
        def num(x):
            if x is None or isinstance(x, int):
                return x
            return x.to_json()

        out = {
            "label": self.label,
            "alphabet": self.alphabet.to_json(),
            "prime": self.prime,
            "truncation": self.truncation,
            "alpha": num(self.alpha),
            "level_step": self.level_step,
        }
        if self.q is not None:
            out["q"] = num(self.q)
            if self.conjugators is not None:
                out["conjugators"] = [f.to_json() for f in self.conjugators]
        else:
            out["images"] = [img.to_json() for img in self.images]
        return out

    @classmethod
    def from_json(cls, data: dict, truncation: int | None = None) -> Endomorphism:
        alphabet = Alphabet.from_json(data["alphabet"])
        prime = data["prime"]
        n = truncation or data["truncation"]

        def num(x):
            if x is None or isinstance(x, int):
                return x
            return PadicScalar.from_json(x)

        if "q" in data:
            q = num(data["q"])
            if "conjugators" in data:
                conj = [GroupWord.from_json(alphabet, f) for f in data["conjugators"]]
                return sigma_ihara(q, conj, alphabet, prime, n)
            return sigma_cyclotomic(q, alphabet, prime, n)
        images = tuple(NcSeries.from_json(img) for img in data["images"])
        return cls(
            alphabet,
            prime,
            n,
            images,
            data.get("label", "custom"),
            num(data.get("alpha")),
            data.get("level_step", 1),
        )


def apply(e: Endomorphism, a: NcSeries) -> NcSeries:
    """Apply the continuous ring map ``T_i -> image_i - 1`` to ``a``."""
    e._check(a)
    n = a.truncation
    acc = NcSeries.zero(a.alphabet, a.prime, n)
    for w, c in a.items():
        img = e.monomial_image(w)
        acc = acc + img.truncate(n).scalar_mul(c)
    return acc


def identity_endomorphism(alphabet: Alphabet, prime: int, truncation: int) -> Endomorphism:
    images = tuple(
        NcSeries(alphabet, prime, truncation, {(): 1, (i,): 1}) for i in range(alphabet.rank)
    )
    return Endomorphism(alphabet, prime, truncation, images, "identity", 1, 1)


def _cyclotomic_step(alphabet: Alphabet) -> int:
    if any(w != 2 for w in alphabet.weights):
        raise ValueError("cyclotomic model needs an all-weight-2 alphabet")
    return 2


def sigma_cyclotomic(
    q: int | PadicScalar, alphabet: Alphabet, prime: int, truncation: int
) -> Endomorphism:
    """``gamma_i -> gamma_i^q`` on the punctured-line alphabet."""
    step = _cyclotomic_step(alphabet)
    _as_unit(q, prime)
    images = tuple(
        magnus_embed(GroupWord.gen(alphabet, i, q), truncation, prime) for i in range(alphabet.rank)
    )
    return Endomorphism(alphabet, prime, truncation, images, f"cyclotomic {_fmt(q)}", q, step, q)


def sigma_ihara(
    q: int | PadicScalar,
    conjugators: Sequence[GroupWord],
    alphabet: Alphabet,
    prime: int,
    truncation: int,
) -> Endomorphism:
    """``gamma_i -> f_i gamma_i^q f_i^-1`` for the given conjugators ``f_i``."""
    step = _cyclotomic_step(alphabet)
    _as_unit(q, prime)
    if len(conjugators) != alphabet.rank:
        raise ValueError("one conjugator per generator")
    images = []
    for i, f in enumerate(conjugators):
        word = GroupWord.gen(alphabet, i, q).conjugate_by(f)
        images.append(magnus_embed(word, truncation, prime))
    return Endomorphism(
        alphabet,
        prime,
        truncation,
        tuple(images),
        f"ihara {_fmt(q)} with conjugators",
        q,
        step,
        q,
        tuple(conjugators),
    )


def _fmt(q) -> str:
    return str(q) if isinstance(q, int) else str(q.to_fraction())


def action_matrix(e: Endomorphism, n: int | None = None) -> tuple[linalg.Matrix, list[Word]]:
    """Matrix of the action on ``Q_ell<<T>>/I^n`` in the monomial basis.

    Columns are images of basis monomials, rows are coefficients.
    """
    n = e.truncation if n is None else n
    if n > e.truncation:
        raise IncompatibleAction("requested truncation exceeds the action's")
    basis = words(e.alphabet, n)
    index = {w: j for j, w in enumerate(basis)}
    m = linalg.zeros(len(basis), len(basis), e.prime)
    for j, w in enumerate(basis):
        img = e.monomial_image(w).truncate(n)
        for u, c in img.items():
            m[index[u]][j] = c
    return m, basis


def graded_matrix(e: Endomorphism, k: int, n: int | None = None) -> linalg.Matrix:
    """Matrix of the induced map on ``W^{-k}/W^{-k-1}`` modulo ``I^n``."""
    n = e.truncation if n is None else n
    if n > e.truncation:
        raise IncompatibleAction("requested truncation exceeds the action's")
    top = max(levels(e.alphabet, n))
    if k < 0 or k > top:
        raise ValueError(f"level {k} outside 0..{top}")
    basis = graded_basis(e.alphabet, k, n)
    index = {w: j for j, w in enumerate(basis)}
    m = linalg.zeros(len(basis), len(basis), e.prime)
    for j, w in enumerate(basis):
        img = e.monomial_image(w).truncate(n)
        for u, c in img.items():
            if u in index:
                m[index[u]][j] = c
    return m


def graded_scalar(e: Endomorphism, k: int, n: int | None = None) -> PadicScalar | None:
    """The scalar by which the action acts on ``gr^{-k}``; ``None`` if empty.

    Raises :class:`NonScalarGradedAction` when the graded map is not scalar.
    """
    m = graded_matrix(e, k, n)
    if not m:
        return None
    lam = m[0][0]
    for i, row in enumerate(m):
        for j, x in enumerate(row):
            target = lam if i == j else 0
            if x != target:
                raise NonScalarGradedAction(f"graded action on level {k} is not scalar")
    return lam


def graded_scalars(e: Endomorphism, n: int | None = None) -> dict[int, PadicScalar]:
    """Graded scalars on every nonempty level modulo ``I^n``."""
    n = e.truncation if n is None else n
    out = {}
    for k in levels(e.alphabet, n):
        lam = graded_scalar(e, k, n)
        if lam is not None:
            out[k] = lam
    return out


def fraction_q(q) -> Fraction:
    return Fraction(q) if isinstance(q, int) else q.to_fraction()
