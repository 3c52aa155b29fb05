"""Eigenvector lifting, semisimplicity checks and integral ell-adic periods.

Given an action whose graded pieces ``gr^{-k}_W`` carry scalar actions
``lambda_k``, a class in ``gr^{-k}`` lifts uniquely to an eigenvector: at each
deeper level ``m`` the residual of ``(sigma - lambda_k)`` is divided by
``lambda_m - lambda_k``.  Those divisions are the only source of
denominators, and their valuations are controlled by

* ``vl_qpow(q, k) = v(q^k - 1)`` (exact case split on the order of ``q``),
* ``v_bound(i, m, alpha) = sum_{s=1}^{m-i-1} v(alpha^s - 1)``,
* ``c_bound(q, ell, k)``, a linear-in-``k`` upper bound for those sums.

Every lift produced here is checked against these caps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from . import linalg
from .filtration import (
    FiltrationReport,
    GaussParams,
    convergence_report,
    graded_basis,
    iadic_valuation,
    levels,
    weight_part,
)
from .galois import (
    Endomorphism,
    action_matrix,
    apply,
    graded_matrix,
    graded_scalars,
)
from .ncseries import NcSeries, Word, words
from .padics import PadicScalar, PrecisionError, val_int

INF = float("inf")


class EigenvalueCollision(ArithmeticError):
    pass


class CapViolation(AssertionError):
    """A proven denominator cap was exceeded; this indicates a bug."""


class HypothesisUnmet(ValueError):
    pass


# -- valuations of q^k - 1 -----------------------------------------------------


def _residue_modulus(ell: int) -> int:
    return 4 if ell == 2 else ell


def multiplicative_order(q: int | PadicScalar, ell: int) -> int:
    """Order of ``q`` in ``F_ell^*``, or in ``(Z/4)^*`` when ``ell == 2``."""
    mod = _residue_modulus(ell)
    if isinstance(q, PadicScalar):
        if not q.is_unit():
            raise ValueError("q must be an ell-adic unit")
        q = q.residue(2 if ell == 2 else 1)
    q %= mod
    if q % ell == 0:
        raise ValueError("q must be an ell-adic unit")
    r, x = 1, q
    while x != 1:
        x = x * q % mod
        r += 1
    return r


def _v_qr_minus_one(q: int | PadicScalar, r: int, ell: int) -> int:
    if isinstance(q, PadicScalar):
        d = q**r - 1
        if d.is_zero():
            raise PrecisionError(f"q^{r} - 1 vanishes to the known precision")
        return d.valuation
    d = q**r - 1
    if d == 0:
        raise ValueError(f"q = {q} is a root of unity")
    return val_int(d, ell)


def vl_qpow(q: int | PadicScalar, k: int, ell: int | None = None) -> int:
    """``v_ell(q^k - 1)`` from the order ``r`` of ``q`` modulo ``ell`` (or 4)."""
    if ell is None:
        if not isinstance(q, PadicScalar):
            raise ValueError("ell is required for integer q")
        ell = q.prime
    if k < 1:
        raise ValueError("k must be positive")
    r = multiplicative_order(q, ell)
    if k % r == 0:
        return _v_qr_minus_one(q, r, ell) + val_int(k // r, ell)
    return 1 if ell == 2 else 0


def v_bound(i: int, m: int, alpha: int | PadicScalar, ell: int | None = None) -> int:
    """``sum_{s=1}^{m-i-1} v_ell(alpha^s - 1)``; annihilates the level-``i`` extension."""
    if m < i + 1:
        raise ValueError("v_bound needs m >= i + 1")
    return sum(vl_qpow(alpha, s, ell) for s in range(1, m - i))


def c_bound(q: int | PadicScalar, ell: int, k: int) -> Fraction:
    """Linear upper bound for ``sum_{i=1}^k v_ell(q^i - 1)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    r = multiplicative_order(q, ell)
    base = _v_qr_minus_one(q, r, ell) + Fraction(1, ell - 1)
    if ell == 2:
        return Fraction(k, r) * (base + 1) + Fraction(1, r)
    return Fraction(k, r) * base


def r_alpha(e: Endomorphism) -> Fraction:
    """Radius threshold beyond which eigenvectors have dense span.

    Pure weight ``w`` alphabets use ``C(alpha^w, ell, 1)``; mixed ones use
    ``2 C(alpha, ell, 1)``.  For all-weight-2 actions ``e.alpha`` already
    acts on ``gr^{-2}``, i.e. it plays the role of ``alpha^2``.
    """
    if e.alpha is None:
        raise ValueError("endomorphism has no declared graded scalar")
    weights = set(e.alphabet.weights)
    if e.level_step == 2:
        return c_bound(e.alpha, e.prime, 1)
    if len(weights) == 1:
        (w,) = weights
        return c_bound(PadicScalar.coerce(e.alpha, e.prime) ** w if w > 1 else e.alpha, e.prime, 1)
    return 2 * c_bound(e.alpha, e.prime, 1)


def _require_close_to_one(alpha: int | PadicScalar, ell: int) -> None:
    k = 2 if ell == 2 else 1
    a = PadicScalar.coerce(alpha, ell)
    if not a.is_unit() or a.residue(k) != 1:
        raise HypothesisUnmet(
            f"lifting needs alpha ≡ 1 mod {_residue_modulus(ell)}; got {alpha}"
        )


# -- lifting ---------------------------------------------------------------


@dataclass
class EigenLift:
    level: int
    seed: NcSeries
    lift: NcSeries
    eigenvalue: PadicScalar
    denominator_profile: dict[int, int | float]
    bound_profile: dict[int, int | None]
    c_profile: dict[int, Fraction | None] = field(default_factory=dict)
    seed_valuation: int | float = 0

    @property
    def worst_denominator(self) -> int:
        v = self.lift.min_valuation()
        return 0 if v == INF else max(0, int(self.seed_valuation - v))

    def to_json(self) -> dict:
        def num(x):
            if x is None:
                return None
            if x == INF:
                return "inf"
            return str(x)

        return {
            "level": self.level,
            "eigenvalue": self.eigenvalue.to_json(),
            "seed": self.seed.to_json(),
            "lift": self.lift.to_json(),
            "denominator_profile": {str(k): num(v) for k, v in self.denominator_profile.items()},
            "bound_profile": {str(k): v for k, v in self.bound_profile.items()},
            "c_profile": {str(k): num(v) for k, v in self.c_profile.items()},
        }


class _LiftContext:
    """Graded data shared by every lift for a fixed action and truncation."""

    def __init__(self, e: Endomorphism, n: int):
        self.e = e.truncated(n)
        self.n = n
        self.scalars = graded_scalars(self.e, n)
        self.levels = sorted(self.scalars)
        self._graded: dict[int, tuple[linalg.Matrix, list[Word]]] = {}

    def graded(self, m: int) -> tuple[linalg.Matrix, list[Word]]:
        if m not in self._graded:
            self._graded[m] = (
                graded_matrix(self.e, m, self.n),
                graded_basis(self.e.alphabet, m, self.n),
            )
        return self._graded[m]


def _seed_series(e: Endomorphism, seed: NcSeries | Word, n: int) -> tuple[NcSeries, int]:
    if not isinstance(seed, NcSeries):
        seed = NcSeries.monomial(tuple(seed), e.alphabet, e.prime, n)
    seed = seed.truncate(n)
    if seed.is_zero():
        raise ValueError("seed class is zero")
    ks = {e.alphabet.weighted_degree(w) for w in seed.support()}
    if len(ks) != 1:
        raise ValueError("seed must be homogeneous for the weight grading")
    return seed, ks.pop()


def _profiles(lift: EigenLift, alpha, ell: int, n: int) -> None:
    k = lift.level
    for d in range(1, n + 1):
        v = iadic_valuation(lift.lift, d)
        lift.denominator_profile[d] = v
        if 2 * d < k + 1:
            lift.bound_profile[d] = None
            lift.c_profile[d] = None
            continue
        cap = v_bound(k, 2 * d, alpha, ell)
        c = c_bound(alpha, ell, 2 * d - k - 1)
        lift.bound_profile[d] = cap
        lift.c_profile[d] = c
        if v != INF and lift.seed_valuation - v > cap:
            raise CapViolation(f"-v_{d} = {lift.seed_valuation - v} exceeds cap {cap}")
        if cap > c:
            raise CapViolation(f"v_bound {cap} exceeds C = {c}")


def _lift(
    ctx: _LiftContext,
    seed: NcSeries,
    k: int,
    below_level: int | None,
) -> tuple[NcSeries, PadicScalar]:
    e = ctx.e
    lam = ctx.scalars[k]
    y = seed
    for m in ctx.levels:
        if m <= k or (below_level is not None and m >= below_level):
            continue
        residual = weight_part(apply(e, y) - y.scalar_mul(lam), m)
        if residual.is_zero():
            continue
        gm, basis = ctx.graded(m)
        shifted = [
            [x - lam if i == j else x for j, x in enumerate(row)] for i, row in enumerate(gm)
        ]
        rhs = [-residual.coeff(w) for w in basis]
        try:
            z = linalg.solve(shifted, rhs)
        except ZeroDivisionError as exc:
            raise EigenvalueCollision(
                f"eigenvalue of level {k} recurs on level {m}"
            ) from exc
        y = y + NcSeries(e.alphabet, e.prime, ctx.n, dict(zip(basis, z)))
    return y, lam


def lift_eigenvector(
    e: Endomorphism,
    seed: NcSeries | Word,
    n: int | None = None,
    *,
    below_level: int | None = None,
    _ctx: _LiftContext | None = None,
) -> EigenLift:
    """Lift a graded class to an eigenvector modulo ``I^n``.

    With ``below_level`` the correction stops before that weight level, i.e.
    the result is an eigenvector modulo ``W^{-below_level}``.
    """
    n = e.truncation if n is None else n
    if e.alpha is not None:
        _require_close_to_one(e.alpha, e.prime)
    ctx = _ctx or _LiftContext(e, n)
    seed, k = _seed_series(ctx.e, seed, n)
    y, lam = _lift(ctx, seed, k, below_level)
    # the result must be an eigenvector on every corrected level
    defect = apply(ctx.e, y) - y.scalar_mul(lam)
    if below_level is not None:
        defect = defect.filter(lambda w: e.alphabet.weighted_degree(w) < below_level)
    if not defect.is_zero():
        raise ArithmeticError("lift failed to be an eigenvector")
    out = EigenLift(k, seed, y, lam, {}, {}, {}, seed.min_valuation())
    if e.alpha is not None:
        _profiles(out, e.alpha, e.prime, n)
    return out


def lift_eigenvector_global(
    e: Endomorphism, seed: NcSeries | Word, n: int | None = None, reverse: bool = True
) -> NcSeries:
    """Solve for the eigenvector in one linear system over all deeper levels.

    This ignores the level structure entirely and is used to cross-check
    :func:`lift_eigenvector`; ``reverse`` flips the unknown ordering and so the
    pivot sequence.
    """
    n = e.truncation if n is None else n
    et = e.truncated(n)
    seed, k = _seed_series(et, seed, n)
    lam = graded_scalars(et, n)[k]
    a, basis = action_matrix(et, n)
    deeper = [j for j, w in enumerate(basis) if e.alphabet.weighted_degree(w) > k]
    if reverse:
        deeper = deeper[::-1]
    if not deeper:
        return seed
    rhs_series = apply(et, seed) - seed.scalar_mul(lam)
    system = [
        [a[i][j] - lam if i == j else a[i][j] for j in deeper] for i in deeper
    ]
    rhs = [-rhs_series.coeff(basis[i]) for i in deeper]
    z = linalg.solve(system, rhs)
    return seed + NcSeries(e.alphabet, e.prime, n, {basis[j]: c for j, c in zip(deeper, z)})


# -- semisimplicity --------------------------------------------------------


@dataclass
class Eigenspace:
    levels: list[int]
    eigenvalue: PadicScalar
    multiplicity: int
    dimension: int
    vectors: list[NcSeries]


@dataclass
class SemisimplicityReport:
    truncation: int
    dimension: int
    eigenspaces: list[Eigenspace]

    @property
    def eigenspace_total(self) -> int:
        return sum(s.dimension for s in self.eigenspaces)

    @property
    def diagonalizable(self) -> bool:
        return self.eigenspace_total == self.dimension and all(
            s.dimension == s.multiplicity for s in self.eigenspaces
        )

    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "dimension": self.dimension,
            "diagonalizable": self.diagonalizable,
            "eigenspaces": [
                {
                    "levels": s.levels,
                    "eigenvalue": s.eigenvalue.to_json(),
                    "multiplicity": s.multiplicity,
                    "dimension": s.dimension,
                }
                for s in self.eigenspaces
            ],
        }


def check_semisimple(e: Endomorphism, n: int | None = None) -> SemisimplicityReport:
    """Decide diagonalizability of the action on ``Q_ell<<T>>/I^n``."""
    n = e.truncation if n is None else n
    et = e.truncated(n)
    scalars = graded_scalars(et, n)
    if et.alpha is not None:
        for k, lam in scalars.items():
            if lam != et.level_eigenvalue(k):
                raise ValueError(f"level {k} acts by {lam}, not the declared alpha power")
    a, basis = action_matrix(et, n)
    groups: list[tuple[list[int], PadicScalar]] = []
    for k in sorted(scalars):
        lam = scalars[k]
        for lv, mu in groups:
            if mu == lam:
                lv.append(k)
                break
        else:
            groups.append(([k], lam))
    spaces = []
    for lv, lam in groups:
        shifted = [[x - lam if i == j else x for j, x in enumerate(row)] for i, row in enumerate(a)]
        kernel = linalg.nullspace(shifted)
        mult = sum(len(graded_basis(et.alphabet, k, n)) for k in lv)
        vecs = [NcSeries(et.alphabet, et.prime, n, dict(zip(basis, v))) for v in kernel]
        spaces.append(Eigenspace(lv, lam, mult, len(kernel), vecs))
    return SemisimplicityReport(n, len(basis), spaces)


# -- dense eigenbases ------------------------------------------------------


@dataclass
class EigenBasis:
    lifts: list[EigenLift]
    reports: list[FiltrationReport]
    r: Fraction
    threshold: Fraction
    spans: bool
    unitriangular: bool

    @property
    def all_consistent(self) -> bool:
        return all(rep.consistent for rep in self.reports)


def dense_eigenbasis(e: Endomorphism, n: int | None = None, r=None) -> EigenBasis:
    """Lift every monomial class of every graded piece and check the span.

    Refuses radii at or below the threshold ``r_alpha``.
    """
    n = e.truncation if n is None else n
    threshold = r_alpha(e)
    if r is None:
        r = threshold + 1
    params = GaussParams.of(r)
    if params.r <= threshold:
        raise HypothesisUnmet(f"r = {params.r} does not exceed r_alpha = {threshold}")
    ctx = _LiftContext(e, n)
    basis = sorted(words(e.alphabet, n), key=lambda w: (e.alphabet.weighted_degree(w), len(w), w))
    lifts = [lift_eigenvector(e, w, n, _ctx=ctx) for w in basis]
    # each lift is its seed monomial plus strictly deeper terms
    unitri = True
    for w, lf in zip(basis, lifts):
        k = lf.level
        for u, c in lf.lift.items():
            wd = e.alphabet.weighted_degree(u)
            if (u == w and c != 1) or (u != w and wd <= k):
                unitri = False
    mat = [[lf.lift.coeff(w) for w in basis] for lf in lifts]
    spans = linalg.rank(mat) == len(basis)
    reports = [convergence_report(lf.lift, params) for lf in lifts]
    return EigenBasis(lifts, reports, params.r, threshold, spans, unitri)


# -- integral periods ------------------------------------------------------


@dataclass
class PeriodRecord:
    i: int
    m: int
    b: int
    v_bound: int
    c_bound: Fraction
    seeds: int

    def row(self) -> list:
        return [self.i, self.m, self.b, self.v_bound, str(self.c_bound)]


def _period_truncation(e: Endomorphism, m: int) -> int:
    # every monomial of weight < m has degree <= (m-1) // w_min
    return (m - 1) // min(e.alphabet.weights) + 1


def integral_period(
    e: Endomorphism, i: int, m: int, _ctx: _LiftContext | None = None
) -> PeriodRecord:
    """Least ``b`` with ``ell^b`` splitting ``W^{-i}/W^{-m}`` integrally, per seed lift."""
    if m <= i:
        raise ValueError("integral_period needs m > i")
    if e.alpha is None:
        raise ValueError("endomorphism has no declared graded scalar")
    n = _period_truncation(e, m)
    if n > e.truncation:
        raise ValueError(f"action truncation {e.truncation} too small for level {m}; need {n}")
    ctx = _ctx if _ctx is not None and _ctx.n == n else _LiftContext(e, n)
    seeds = graded_basis(e.alphabet, i, n)
    b = 0
    for w in seeds:
        seed, k = _seed_series(ctx.e, w, n)
        y, _ = _lift(ctx, seed, k, m)
        y = y.filter(lambda u: e.alphabet.weighted_degree(u) < m)
        v = y.min_valuation()
        if v != INF:
            b = max(b, -int(v))
    cap = v_bound(i, m, e.alpha, e.prime)
    if b > cap:
        raise CapViolation(f"period {b} exceeds v_bound({i}, {m}) = {cap}")
    return PeriodRecord(i, m, b, cap, c_bound(e.alpha, e.prime, m - i - 1), len(seeds))


def sweep_periods(e: Endomorphism, i_max: int, m_max: int) -> Iterator[PeriodRecord]:
    """Periods for all ``0 <= i <= i_max`` and ``i < m <= m_max``, streamed."""
    if e.alpha is not None:
        _require_close_to_one(e.alpha, e.prime)
    contexts: dict[int, _LiftContext] = {}
    for i in range(i_max + 1):
        for m in range(i + 1, m_max + 1):
            n = _period_truncation(e, m)
            if n not in contexts:
                contexts[n] = _LiftContext(e, n)
            yield integral_period(e, i, m, contexts[n])


def seeds_by_level(e: Endomorphism, n: int) -> dict[int, list[Word]]:
    return {k: graded_basis(e.alphabet, k, n) for k in levels(e.alphabet, n)}


def lift_all(e: Endomorphism, seeds: Sequence[Word], n: int) -> list[EigenLift]:
    ctx = _LiftContext(e, n)
    return [lift_eigenvector(e, w, n, _ctx=ctx) for w in seeds]
