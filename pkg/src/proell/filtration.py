"""I-adic valuations, the weight filtration and r-Gauss norms.

In the free model the image of the integral group ring in
``Q_ell<<T>>/I^n`` is exactly the set of series with integral coefficients,
so ``v_n`` is a minimum of coefficient valuations.  ``W^{-k}`` is the span of
monomials of weighted degree at least ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .ncseries import Alphabet, NcSeries, Word, words

INF = float("inf")


@dataclass(frozen=True)
class GaussParams:
    """Radius exponent ``r`` of the closed ball of radius ``ell**-r``."""

    r: Fraction

    def __post_init__(self) -> None:
        r = Fraction(self.r)
        object.__setattr__(self, "r", r)
        if r <= 0:
            raise ValueError("r must be positive")
        if r.denominator > 64:
            raise ValueError("r must have denominator at most 64")

    @classmethod
    def of(cls, r: GaussParams | Fraction | int | str) -> GaussParams:
        return r if isinstance(r, GaussParams) else cls(Fraction(r))


def iadic_valuation(a: NcSeries, n: int) -> int | float:
    """``v_n(a)``: least coefficient valuation among monomials of degree ``< n``."""
    if n > a.truncation:
        raise ValueError(f"degree {n} exceeds truncation {a.truncation}")
    best: int | float = INF
    for w, c in a.items():
        if len(w) < n and c.valuation < best:
            best = c.valuation
    return best


def gauss_norm(a: NcSeries, r) -> tuple[Fraction | float, Word | None]:
    """Exponent ``e`` with ``|a|_r = ell**-e``, plus a monomial attaining it.

    ``e = min_I v(a_I) + |I| r``; the zero series has ``e = inf``.
    """
    r = GaussParams.of(r).r
    best: Fraction | float = INF
    witness: Word | None = None
    for w, c in a.items():
        e = c.valuation + len(w) * r
        if e < best:
            best, witness = e, w
    return best, witness


def weight_level(alphabet: Alphabet, word: Word) -> int:
    return alphabet.weighted_degree(word)


def in_weight(a: NcSeries, k: int) -> bool:
    """Whether ``a`` lies in ``W^{-k}``."""
    return all(a.alphabet.weighted_degree(w) >= k for w in a.support())


def weight_part(a: NcSeries, k: int) -> NcSeries:
    """Projection onto monomials of weighted degree exactly ``k``."""
    return a.filter(lambda w: a.alphabet.weighted_degree(w) == k)


def graded_basis(alphabet: Alphabet, k: int, n: int) -> list[Word]:
    """Monomial basis of ``gr^{-k}_W`` modulo ``I^n``."""
    return [w for w in words(alphabet, n) if alphabet.weighted_degree(w) == k]


def levels(alphabet: Alphabet, n: int) -> list[int]:
    """Weight levels occurring among monomials of degree ``< n``."""
    return sorted({alphabet.weighted_degree(w) for w in words(alphabet, n)})


def weight_dimensions(alphabet: Alphabet, n: int) -> dict[int, int]:
    """``k -> dim W^{-k} / I^n`` for every ``k`` up to the top level."""
    ws = words(alphabet, n)
    top = max(alphabet.weighted_degree(w) for w in ws)
    return {k: sum(1 for w in ws if alphabet.weighted_degree(w) >= k) for k in range(top + 2)}


@dataclass
class InclusionCheck:
    ok: bool
    n: int
    max_degree: int
    checked: int
    witness: Word | None = None
    failed: str | None = None


def check_w_iadic_inclusions(
    alphabet: Alphabet, n: int, max_degree: int | None = None
) -> InclusionCheck:
    """Verify ``I^n ⊆ W^{-n}`` and ``W^{-2n-1} ⊆ I^n`` monomial by monomial.

    Both sides are spanned by monomials in the free model, so checking every
    monomial of degree ``<= max_degree`` decides the inclusions there.
    """
    if max_degree is None:
        max_degree = 2 * n + 1
    checked = 0
    for d in range(max_degree + 1):
        for w in itertools.product(range(alphabet.rank), repeat=d):
            checked += 1
            wd = alphabet.weighted_degree(w)
            if d >= n and wd < n:
                return InclusionCheck(False, n, max_degree, checked, w, "I^n in W^-n")
            if wd >= 2 * n + 1 and d < n:
                return InclusionCheck(False, n, max_degree, checked, w, "W^-(2n+1) in I^n")
    return InclusionCheck(True, n, max_degree, checked)


@dataclass
class FiltrationReport:
    r: Fraction
    v_table: dict[int, int | float]
    w_dims: dict[int, int]
    trend: dict[int, Fraction]
    verdict: str
    tail_nondecreasing: bool
    note: str = "finite truncation: a trend is evidence, not a proof of convergence"
    gauss_exponent: Fraction | float = field(default=INF)

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"

    def to_json(self) -> dict:
        def num(x):
            if x == INF:
                return "inf"
            return str(Fraction(x))

        return {
            "r": str(self.r),
            "v_table": {str(k): num(v) for k, v in self.v_table.items()},
            "w_dims": {str(k): v for k, v in self.w_dims.items()},
            "trend": {str(k): num(v) for k, v in self.trend.items()},
            "verdict": self.verdict,
            "tail_nondecreasing": self.tail_nondecreasing,
            "gauss_exponent": num(self.gauss_exponent),
            "note": self.note,
        }

    def render(self) -> str:
        lines = [f"r = {self.r}", f"{'n':>4} {'v_n':>6} {'v_n + n r':>10}"]
        for n, v in self.v_table.items():
            t = self.trend.get(n)
            vs = "inf" if v == INF else str(v)
            ts = "" if t is None else str(t)
            lines.append(f"{n:>4} {vs:>6} {ts:>10}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _nondecreasing(xs: Iterable[Fraction]) -> bool:
    xs = list(xs)
    return all(a <= b for a, b in zip(xs, xs[1:]))


def convergence_report(a: NcSeries, r) -> FiltrationReport:
    """Tabulate ``v_n + n r`` for ``n <= truncation`` and judge the trend.

    The verdict is ``consistent`` when the second half of the finite entries
    is nondecreasing and the last entry exceeds the first.  Fewer than two
    finite entries carry no trend and are reported as consistent.
    """
    params = GaussParams.of(r)
    v_table = {n: iadic_valuation(a, n) for n in range(1, a.truncation + 1)}
    trend = {n: v + n * params.r for n, v in v_table.items() if v != INF}
    values = list(trend.values())
    if len(values) < 2:
        tail_ok, verdict = True, "consistent"
    else:
        tail = values[len(values) // 2 :]
        tail_ok = _nondecreasing(tail)
        verdict = "consistent" if tail_ok and values[-1] > values[0] else "inconsistent"
    return FiltrationReport(
        r=params.r,
        v_table=v_table,
        w_dims=weight_dimensions(a.alphabet, a.truncation),
        trend=trend,
        verdict=verdict,
        tail_nondecreasing=tail_ok,
        gauss_exponent=gauss_norm(a, params)[0],
    )
