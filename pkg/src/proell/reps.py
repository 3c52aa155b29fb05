"""Matrix representations of free pro-ell groups.

A :class:`MatrixRep` sends each generator to an invertible matrix over the
ell-adic integers.  Reps that are trivial modulo ``ell^m`` extend to the
convergent group ring of radius ``ell^-r`` for ``r < m``, which is what
:func:`evaluate_series` computes.  Unipotence is decided inside ``Q_ell`` by
nilpotency of the span generated by ``rho(gamma_i) - 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .eigenlift import (
    HypothesisUnmet,
    lift_all,
    multiplicative_order,
    r_alpha,
)
from .filtration import GaussParams, gauss_norm, graded_basis, levels
from .galois import Endomorphism
from .linalg import Matrix
from .ncseries import Alphabet, GroupWord, NcSeries, Word, magnus_embed
from .padics import PadicScalar, PrecisionError, val_int

INF = float("inf")


class EquivarianceFailure(ValueError):
    pass


# -- representations -------------------------------------------------------


@dataclass
class MatrixRep:
    alphabet: Alphabet
    prime: int
    images: tuple[Matrix, ...]
    _words: dict[Word, Matrix] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.images = tuple(
            [[PadicScalar.coerce(x, self.prime) for x in row] for row in img] for img in self.images
        )
        if len(self.images) != self.alphabet.rank:
            raise ValueError("one image per generator")
        d = self.dim
        for i, img in enumerate(self.images):
            if linalg.shape(img) != (d, d):
                raise ValueError(f"image {i} is not {d}x{d}")
            if any(not x.is_integral() for row in img for x in row):
                raise ValueError(f"image {i} has non-integral entries")
            det = linalg.determinant(img)
            if det.is_zero() or det.valuation != 0:
                raise ValueError(f"image {i} is not invertible over Z_{self.prime}")
        self._words = {}

    @property
    def dim(self) -> int:
        return len(self.images[0]) if self.images else 0

    @classmethod
    def from_ints(
        cls, images: Sequence[Sequence[Sequence[int]]], prime: int, alphabet: Alphabet | None = None
    ) -> MatrixRep:
        alphabet = alphabet or Alphabet.uniform(len(images), 1)
        return cls(alphabet, prime, tuple(linalg.from_ints(m, prime) for m in images))

    @classmethod
    def trivial(cls, alphabet: Alphabet, prime: int, dim: int) -> MatrixRep:
        return cls(alphabet, prime, tuple(linalg.identity(dim, prime) for _ in range(alphabet.rank)))

    def nilpotent_parts(self) -> list[Matrix]:
        """``rho(T_i) = rho(gamma_i) - 1``."""
        eye = linalg.identity(self.dim, self.prime)
        return [linalg.matsub(img, eye) for img in self.images]

    def monomial(self, word: Word) -> Matrix:
        """``rho(T^word)``, memoised along prefixes."""
        word = tuple(word)
        if not word:
            return linalg.identity(self.dim, self.prime)
        hit = self._words.get(word)
        if hit is None:
            if not self._words:
                for i, t in enumerate(self.nilpotent_parts()):
                    self._words[(i,)] = t
            hit = self._words.get(word)
        if hit is None:
            hit = linalg.matmul(self.monomial(word[:-1]), self._words[(word[-1],)])
            self._words[word] = hit
        return hit

    def evaluate_word(self, w: GroupWord) -> Matrix:
        """Image of a group word with integer exponents."""
        if w.alphabet != self.alphabet:
            raise ValueError("group word over a different alphabet")
        out = linalg.identity(self.dim, self.prime)
        for i, e in w.letters:
            if not isinstance(e, int):
                raise ValueError("only integer exponents can be evaluated exactly")
            out = linalg.matmul(out, linalg.matpow(self.images[i], e))
        return out

    def to_json(self) -> dict:
        return {
            "alphabet": self.alphabet.to_json(),
            "dim": self.dim,
            "prime": self.prime,
            "images": [linalg.to_ints(img) for img in self.images],
        }

    @classmethod
    def from_json(cls, data: dict) -> MatrixRep:
        alphabet = Alphabet.from_json(data["alphabet"])
        rep = cls.from_ints(data["images"], data["prime"], alphabet)
        if "dim" in data and data["dim"] != rep.dim:
            raise ValueError(f"declared dim {data['dim']} but images are {rep.dim}x{rep.dim}")
        return rep

    @classmethod
    def load(cls, path: str) -> MatrixRep:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def triviality_level(rep: MatrixRep) -> int | float:
    """Largest ``m`` with every image ``≡ 1 mod ell^m`` (``inf`` for the trivial rep).

    Entries that vanish only to their known precision cap ``m`` there.
    """
    best: int | float = INF
    for t in rep.nilpotent_parts():
        for row in t:
            for x in row:
                if x.is_exact_zero():
                    continue
                v = x.abs_precision if x.is_zero() else x.valuation
                best = min(best, v)
    return best


def is_trivial_mod(rep: MatrixRep, n: int) -> bool:
    """Whether every generator image is ``≡ 1`` entrywise modulo ``ell^n``."""
    if n < 1:
        raise ValueError("N must be positive")
    for t in rep.nilpotent_parts():
        for row in t:
            for x in row:
                if x.is_zero() and x.abs_precision is not None and x.abs_precision < n:
                    raise PrecisionError(f"entry known only modulo {rep.prime}^{x.abs_precision}")
                if not x.is_zero() and x.valuation < n:
                    return False
    return True


# -- convergent evaluation -------------------------------------------------


@dataclass
class Evaluation:
    matrix: Matrix
    tail_exponent: Fraction | float
    gauss_exponent: Fraction | float
    m: int | float
    r: Fraction

    @property
    def valuation(self) -> int | float:
        return linalg.matrix_valuation(self.matrix)


def evaluate_series(rep: MatrixRep, a: NcSeries, r=1) -> Evaluation:
    """``sum_I a_I rho(T^I)`` over the stored monomials of ``a``.

    The discarded tail (degrees ``>= truncation``) of a series with the same
    r-Gauss norm is bounded by ``g + (m - r) * truncation`` in valuation,
    using ``|rho(T^I)| <= ell^(-m |I|)``.
    """
    if a.alphabet.rank != rep.alphabet.rank or a.prime != rep.prime:
        raise ValueError("series and representation disagree on alphabet or prime")
    params = GaussParams.of(r)
    m = triviality_level(rep)
    if params.r >= m:
        raise HypothesisUnmet(f"rep is trivial only mod {rep.prime}^{m}; need r < m")
    acc = linalg.zeros(rep.dim, rep.dim, rep.prime)
    for w, c in a.items():
        acc = linalg.matadd(acc, linalg.scale(c, rep.monomial(w)))
    g, _ = gauss_norm(a, params)
    if g == INF:
        tail: Fraction | float = INF
    elif m == INF:
        tail = INF
    else:
        tail = g + (m - params.r) * a.truncation
    out = Evaluation(acc, tail, g, m, params.r)
    if out.valuation < g:
        raise AssertionError("evaluation exceeds the r-Gauss norm bound")
    return out


# -- unipotence ------------------------------------------------------------


@dataclass
class UnipotenceCertificate:
    unipotent: bool
    layer_dims: list[int]
    nilpotency_degree: int | None = None
    witness: Word | None = None
    witness_trace: PadicScalar | None = None

    def to_json(self) -> dict:
        return {
            "unipotent": self.unipotent,
            "layer_dims": self.layer_dims,
            "nilpotency_degree": self.nilpotency_degree,
            "witness": None if self.witness is None else list(self.witness),
            "witness_trace": None
            if self.witness_trace is None
            else str(self.witness_trace.rational_guess()),
        }


def _trace(m: Matrix) -> PadicScalar:
    acc = PadicScalar.zero(m[0][0].prime)
    for i in range(len(m)):
        acc = acc + m[i][i]
    return acc


def _span_layer(candidates: list[tuple[Word, Matrix]]) -> list[tuple[Word, Matrix]]:
    idx = linalg.span_basis([linalg.flatten(m) for _, m in candidates])
    return [candidates[i] for i in idx]


def is_unipotent(rep: MatrixRep) -> tuple[bool, UnipotenceCertificate]:
    """Decide whether ``rho(gamma_i) - 1`` generate a nilpotent algebra.

    ``P_k`` is the span of length-``k`` products; the algebra is nilpotent iff
    ``P_d = 0``.  Otherwise some product has nonzero trace, since a
    characteristic-zero algebra of trace-zero elements is nilpotent.
    """
    d = rep.dim
    parts = rep.nilpotent_parts()
    layer = _span_layer([((i,), t) for i, t in enumerate(parts)])
    dims = [len(layer)]
    seen = list(layer)
    k = 1
    while layer and k < d:
        layer = _span_layer([(w + (i,), linalg.matmul(m, t)) for w, m in layer for i, t in enumerate(parts)])
        dims.append(len(layer))
        seen.extend(layer)
        k += 1
    if not layer:
        return True, UnipotenceCertificate(True, dims, nilpotency_degree=len(dims))
    # non-nilpotent: the algebra is spanned by products of length <= d, and
    # one of its spanning products must carry nonzero trace
    basis = _span_layer(seen)
    grown = True
    while grown:
        grown = False
        extra = [(w + (i,), linalg.matmul(m, t)) for w, m in basis for i, t in enumerate(parts)]
        nb = _span_layer(basis + extra)
        if len(nb) > len(basis):
            basis, grown = nb, True
    for w, m in basis:
        tr = _trace(m)
        if not tr.is_zero():
            return False, UnipotenceCertificate(False, dims, None, w, tr)
    raise PrecisionError("nonzero products found but every trace vanishes at this precision")


# -- socle filtration ------------------------------------------------------


def _enveloping_algebra(gens: list[Matrix], d: int, prime: int) -> list[Matrix]:
    basis = [linalg.identity(d, prime)]
    vecs = [linalg.flatten(basis[0])]
    frontier = list(basis)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = linalg.matmul(g, x)
                if len(linalg.span_basis(vecs + [linalg.flatten(y)])) > len(vecs):
                    vecs.append(linalg.flatten(y))
                    basis.append(y)
                    new.append(y)
        frontier = new
    return basis


def _radical(alg: list[Matrix]) -> list[Matrix]:
    """Kernel of the trace form ``(x, y) -> tr(xy)`` on the algebra."""
    gram = [[_trace(linalg.matmul(x, y)) for y in alg] for x in alg]
    out = []
    for coeffs in linalg.nullspace(gram):
        acc = linalg.zeros(len(alg[0]), len(alg[0]), alg[0][0][0].prime)
        for c, x in zip(coeffs, alg):
            if not c.is_zero():
                acc = linalg.matadd(acc, linalg.scale(c, x))
        out.append(acc)
    return out


def _columns_to_matrix(cols: list[list[PadicScalar]]) -> Matrix:
    return [list(r) for r in zip(*cols)]


def _coords(cols: list[list[PadicScalar]], v: list[PadicScalar]) -> list[PadicScalar]:
    """Coordinates of ``v`` in the independent columns ``cols``."""
    k = len(cols)
    aug = [[c[i] for c in cols] + [v[i]] for i in range(len(v))]
    el = linalg.row_reduce(aug, col_order=list(range(k + 1)))
    if el.pivot_cols != list(range(k)):
        raise ValueError("vector is not in the span")
    return [el.rref[i][k] for i in range(k)]


def _apply(m: Matrix, v: list[PadicScalar]) -> list[PadicScalar]:
    return [r[0] for r in linalg.matmul(m, [[x] for x in v])]


@dataclass
class SocleFiltration:
    dims: list[int]
    layers: list[list[list[PadicScalar]]]
    radical_dim: int
    quotients_semisimple: bool

    @property
    def length(self) -> int:
        return len(self.dims) - 1


def socle_filtration(rep: MatrixRep) -> SocleFiltration:
    """Ascending socle series ``0 = V_0 ⊂ V_1 ⊂ ...`` with ``V_k = ker J^k``.

    ``J`` is the radical of the enveloping algebra, found as the kernel of the
    trace form.  Each layer ``V_k / V_(k-1)`` is checked to be semisimple.
    """
    d = rep.dim
    if d > 12:
        raise ValueError("socle filtration is limited to dimension 12")
    p = rep.prime
    alg = _enveloping_algebra(list(rep.images), d, p)
    rad = _radical(alg)
    dims = [0]
    layers: list[list[list[PadicScalar]]] = []
    basis: list[list[PadicScalar]] = []
    power = [linalg.identity(d, p)]
    while dims[-1] < d:
        power = [linalg.matmul(j, x) for j in rad for x in power] if rad else []
        if power:
            stacked = [row for x in power for row in x]
            kernel = linalg.nullspace(stacked)
        else:
            kernel = [[PadicScalar.from_int(int(i == j), p) for i in range(d)] for j in range(d)]
        new = []
        for v in kernel:
            if len(linalg.span_basis(basis + new + [v])) > len(basis) + len(new):
                new.append(v)
        if not new:
            raise PrecisionError("socle series failed to grow")
        layers.append(new)
        basis = basis + new
        dims.append(len(basis))
    ok = all(
        not _radical(_enveloping_algebra(_layer_action(rep, layers, k), len(layers[k]), p))
        for k in range(len(layers))
    )
    return SocleFiltration(dims, layers, len(rad), ok)


def _layer_action(rep: MatrixRep, layers: list, k: int) -> list[Matrix]:
    """Action of each generator on ``V_(k+1) / V_k`` in the layer basis."""
    below = [v for layer in layers[:k] for v in layer]
    cols = below + layers[k]
    mats = []
    for img in rep.images:
        images = [_coords(cols, _apply(img, v))[len(below) :] for v in layers[k]]
        mats.append(_columns_to_matrix(images))
    return mats


# -- explicit bound --------------------------------------------------------


@dataclass(frozen=True)
class BoundSpec:
    ell: int
    q: int
    s: int
    epsilon: int
    bound: Fraction
    n_min: int

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "q": self.q,
            "s": self.s,
            "epsilon": self.epsilon,
            "bound": str(self.bound),
            "N_min": self.n_min,
        }


def bound_N(ell: int, q: int) -> BoundSpec:
    """Least ``N`` exceeding ``(1/s)(v(q^s - 1) + 1/(ell-1) + epsilon)``."""
    if q % ell == 0:
        raise ValueError(f"q = {q} is not a unit at {ell}")
    s = multiplicative_order(q, ell)
    d = q**s - 1
    if d == 0:
        raise ValueError(f"q = {q} has finite order; it must generate an infinite image")
    eps = 1 if ell == 2 else 0
    bound = Fraction(1, s) * (val_int(d, ell) + Fraction(1, ell - 1) + eps)
    n_min = bound.numerator // bound.denominator + 1
    return BoundSpec(ell, q, s, eps, bound, n_min)


# -- genus-2 fixture -------------------------------------------------------


def _commutator(a: Matrix, b: Matrix) -> Matrix:
    return linalg.matmul(linalg.matmul(a, b), linalg.matmul(linalg.inverse(a), linalg.inverse(b)))


def genus2_fixture(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], ell: int, n: int) -> MatrixRep:
    """``a1 -> A, b1 -> B, a2 -> B, b2 -> A``; ``[A,B][B,A] = 1`` is checked."""
    alphabet = Alphabet(("a1", "b1", "a2", "b2"), (1, 1, 1, 1))
    ma, mb = linalg.from_ints(a, ell), linalg.from_ints(b, ell)
    rep = MatrixRep(alphabet, ell, (ma, mb, mb, ma))
    if not is_trivial_mod(rep, n):
        raise ValueError(f"A and B must be ≡ 1 mod {ell}^{n}")
    rel = linalg.matmul(_commutator(ma, mb), _commutator(mb, ma))
    eye = linalg.identity(len(ma), ell)
    if not linalg.is_zero_matrix(linalg.matsub(rel, eye)):
        raise AssertionError("surface relation fails")
    return rep


# -- certification pipeline ------------------------------------------------


@dataclass
class CertifyReport:
    status: str
    threshold: Fraction
    n: int
    equivariant: bool
    failures: list[int]
    matched_levels: list[int] = field(default_factory=list)
    i0: int | None = None
    killed_levels: list[int] = field(default_factory=list)
    predicted_unipotent: bool | None = None
    is_unipotent: bool | None = None

    @property
    def agrees(self) -> bool | None:
        if self.predicted_unipotent is None:
            return None
        return self.predicted_unipotent == self.is_unipotent

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "threshold": str(self.threshold),
            "N": self.n,
            "equivariant": self.equivariant,
            "equivariance_failures": self.failures,
            "matched_levels": self.matched_levels,
            "i0": self.i0,
            "killed_levels": self.killed_levels,
            "predicted_unipotent": self.predicted_unipotent,
            "is_unipotent": self.is_unipotent,
            "agrees": self.agrees,
        }


def _sigma_image_matrix(rep: MatrixRep, e: Endomorphism, i: int) -> tuple[Matrix, Fraction | float]:
    """``rho(sigma(gamma_i))``, exactly from group words when the action has them."""
    if isinstance(e.q, int):
        w = GroupWord.gen(rep.alphabet, i, e.q)
        if e.conjugators is not None:
            w = w.conjugate_by(GroupWord(rep.alphabet, e.conjugators[i].letters))
        return rep.evaluate_word(w), INF
    img = e.images[i]
    ev = evaluate_series(rep, img, Fraction(1, 2))
    return ev.matrix, ev.tail_exponent


def _adjoint(m: Matrix) -> Matrix:
    """Matrix of ``X -> M X M^-1`` on row-major flattened ``d x d`` matrices."""
    d = len(m)
    minv = linalg.inverse(m)
    out = linalg.zeros(d * d, d * d, m[0][0].prime)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e_ in range(d):
                    out[a * d + b][c * d + e_] = m[a][c] * minv[e_][b]
    return out


def _matches_adjoint_eigenvalue(ad: Matrix, lam: PadicScalar) -> bool:
    shifted = [[x - lam if i == j else x for j, x in enumerate(row)] for i, row in enumerate(ad)]
    return len(linalg.nullspace(shifted)) > 0


def certify_pipeline(
    rep: MatrixRep,
    e: Endomorphism,
    target: Sequence[Sequence[int]],
    n: int,
) -> CertifyReport:
    """Desk-scale unipotence certification for a rep compatible with ``e``.

    Steps: check ``N`` against ``r_alpha``; check ``rho∘sigma = M rho M^-1``
    on generators; find the levels whose graded scalar is an eigenvalue of
    conjugation by ``M``; verify that lifted eigenvectors beyond those levels
    evaluate to zero; compare with :func:`is_unipotent`.
    """
    threshold = r_alpha(e)
    if n <= threshold:
        raise HypothesisUnmet(f"N = {n} does not exceed r_alpha = {threshold}")
    if not is_trivial_mod(rep, n):
        raise HypothesisUnmet(f"rep is not trivial mod {rep.prime}^{n}")
    if e.alphabet.rank != rep.alphabet.rank or e.prime != rep.prime:
        raise ValueError("action and rep disagree on alphabet or prime")
    p = rep.prime
    m = linalg.from_ints(target, p)
    det = linalg.determinant(m)
    if det.is_zero():
        raise ValueError("target action matrix is singular")
    minv = linalg.inverse(m)
    failures = []
    for i, img in enumerate(rep.images):
        lhs, tol = _sigma_image_matrix(rep, e, i)
        rhs = linalg.matmul(linalg.matmul(m, img), minv)
        diff = linalg.matsub(lhs, rhs)
        v = linalg.matrix_valuation(diff)
        if v < tol:
            failures.append(i)
    report = CertifyReport("pending", threshold, n, not failures, failures)
    unip, _ = is_unipotent(rep)
    report.is_unipotent = unip
    if failures:
        report.status = "equivariance-failure"
        return report

    # archimedean cap: graded scalars q^(k/step) outgrow every |lambda_i / lambda_j|
    eig = np.linalg.eigvals(np.array(target, dtype=float))
    mods = np.abs(eig)
    spread = float(mods.max() / mods.min())
    alpha = e.alpha if isinstance(e.alpha, int) else None
    if alpha is None:
        raise ValueError("certification needs an integer graded scalar")
    ad = _adjoint(m)
    step = e.level_step
    matched = []
    k = 0
    while abs(alpha) ** (k // step) <= spread * (1 + 1e-9):
        if k % step == 0 and _matches_adjoint_eigenvalue(ad, e.level_eigenvalue(k)):
            matched.append(k)
        k += step
    i0 = (max(matched) + step) if matched else 0
    report.matched_levels = matched
    report.i0 = i0

    w_min = min(e.alphabet.weights)
    trunc = max(i0 // w_min + 2, 2)
    if trunc > e.truncation:
        raise HypothesisUnmet(f"action truncation {e.truncation} below needed {trunc}")
    seeds = [w for lv in levels(e.alphabet, trunc) if lv >= i0 for w in graded_basis(e.alphabet, lv, trunc)]
    lifts = lift_all(e, seeds, trunc)
    killed = set()
    bad = set()
    for lf in lifts:
        ev = evaluate_series(rep, lf.lift, Fraction(1, 2))
        if ev.valuation >= ev.tail_exponent:
            killed.add(lf.level)
        else:
            bad.add(lf.level)
    report.killed_levels = sorted(killed - bad)
    report.predicted_unipotent = not bad
    report.status = "unipotent" if not bad else "non-unipotent"
    return report


def diagonal_candidates(rep: MatrixRep, e: Endomorphism, n: int, entries: Sequence[int]) -> list[CertifyReport]:
    """Run the pipeline over all diagonal targets with the given unit entries."""
    out = []
    for diag in itertools.product(entries, repeat=rep.dim):
        target = [[diag[i] if i == j else 0 for j in range(rep.dim)] for i in range(rep.dim)]
        out.append(certify_pipeline(rep, e, target, n))
    return out


def magnus_check(rep: MatrixRep, w: GroupWord, truncation: int, r=1) -> tuple[Evaluation, Matrix]:
    """Evaluate the Magnus series of ``w`` next to the direct product ``rho(w)``."""
    ev = evaluate_series(rep, magnus_embed(w, truncation, rep.prime), r)
    return ev, rep.evaluate_word(w)
