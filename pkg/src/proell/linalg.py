"""Dense linear algebra over :class:`PadicScalar` entries.

Matrices are plain lists of rows.  Elimination pivots on the entry of least
valuation in each column, so every division is by the ell-adically largest
available entry, and the valuation of each pivot is recorded.  A rank is only
reported when every pivot still carries ``guard`` relative digits and every
entry treated as zero is known to vanish modulo ``ell**guard``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .padics import PadicScalar, PrecisionError

Matrix = list[list[PadicScalar]]

GUARD_DIGITS = 4


def zeros(rows: int, cols: int, prime: int) -> Matrix:
    z = PadicScalar.zero(prime)
    return [[z] * cols for _ in range(rows)]


def identity(n: int, prime: int) -> Matrix:
    one = PadicScalar.from_int(1, prime)
    m = zeros(n, n, prime)
    for i in range(n):
        m[i][i] = one
    return m


def from_ints(rows: Sequence[Sequence[int]], prime: int, prec: int | None = None) -> Matrix:
    return [[PadicScalar.from_int(int(x), prime, prec) for x in row] for row in rows]


def to_ints(m: Matrix) -> list[list[int]]:
    return [[x.to_int() for x in row] for row in m]


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n, k = shape(a)
    k2, mcols = shape(b)
    if k != k2:
        raise ValueError(f"shape mismatch {n}x{k} @ {k2}x{mcols}")
    prime = a[0][0].prime if n and k else b[0][0].prime
    out = zeros(n, mcols, prime)
    for i in range(n):
        row = a[i]
        nz = [(t, row[t]) for t in range(k) if not row[t].is_exact_zero()]
        for j in range(mcols):
            acc = PadicScalar.zero(prime)
            for t, x in nz:
                y = b[t][j]
                if not y.is_exact_zero():
                    acc = acc + x * y
            out[i][j] = acc
    return out


def matadd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matsub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c: PadicScalar | int, a: Matrix) -> Matrix:
    return [[c * x for x in row] for row in a]


def matpow(a: Matrix, k: int) -> Matrix:
    if k < 0:
        return matpow(inverse(a), -k)
    n = len(a)
    result = identity(n, a[0][0].prime)
    base = a
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def matrix_valuation(a: Matrix) -> int | float:
    """Least entry valuation, i.e. ``-log_ell`` of the sup norm; ``inf`` for 0."""
    best: int | float = float("inf")
    for row in a:
        for x in row:
            if not x.is_zero():
                best = min(best, x.valuation)
    return best


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def flatten(a: Matrix) -> list[PadicScalar]:
    return [x for row in a for x in row]


def unflatten(v: Sequence[PadicScalar], n: int) -> Matrix:
    return [list(v[i * n : (i + 1) * n]) for i in range(n)]


@dataclass
class Elimination:
    """Result of reducing a matrix to reduced row echelon form."""

    rref: Matrix
    pivot_cols: list[int]
    pivot_valuations: list[int]
    row_order: list[int] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)


def _check_pivot(x: PadicScalar, guard: int) -> None:
    if x.relative_precision < guard:
        raise PrecisionError(
            f"pivot {x} has only {x.relative_precision} relative digits"
        )


def _check_zero(x: PadicScalar, guard: int, scale_val: int) -> None:
    if x.abs_precision is not None and x.abs_precision < scale_val + guard:
        raise PrecisionError(f"cannot decide whether {x} vanishes")


def row_reduce(
    a: Matrix,
    guard: int = GUARD_DIGITS,
    col_order: Sequence[int] | None = None,
) -> Elimination:
    """Reduced row echelon form with least-valuation pivoting.

    ``col_order`` changes which columns are tried first; the row space and
    rank do not depend on it.
    """
    rows = [list(r) for r in a]
    n, m = shape(rows)
    order = list(range(m)) if col_order is None else list(col_order)
    pivot_cols: list[int] = []
    pivot_vals: list[int] = []
    row_order = list(range(n))
    r = 0
    for c in order:
        if r == n:
            break
        best = None
        for i in range(r, n):
            x = rows[i][c]
            if not x.is_zero() and (best is None or x.valuation < rows[best][c].valuation):
                best = i
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        row_order[r], row_order[best] = row_order[best], row_order[r]
        piv = rows[r][c]
        _check_pivot(piv, guard)
        inv = piv.inv()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r:
                f = rows[i][c]
                if not f.is_zero():
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
                else:
                    rows[i][c] = PadicScalar.zero(piv.prime)
        pivot_cols.append(c)
        pivot_vals.append(piv.valuation)
        r += 1
    # entries left below the pivots are declared zero; make sure that is safe
    # (columns outside col_order, e.g. a right-hand side, are not reduced)
    worst = max(pivot_vals, default=0)
    for i in range(r, n):
        for x in (rows[i][c] for c in order):
            if not x.is_zero():
                raise PrecisionError(f"unreduced entry {x}")
            _check_zero(x, guard, worst)
    return Elimination(rows, pivot_cols, pivot_vals, row_order)


def rank(a: Matrix, guard: int = GUARD_DIGITS) -> int:
    if not a or not a[0]:
        return 0
    return row_reduce(a, guard).rank


def nullspace(
    a: Matrix, guard: int = GUARD_DIGITS, col_order: Sequence[int] | None = None
) -> list[list[PadicScalar]]:
    """Basis of the right kernel ``{x : a x = 0}``, one vector per free column."""
    n, m = shape(a)
    if n == 0:
        return [[PadicScalar.from_int(int(i == j), _prime(a)) for i in range(m)] for j in range(m)]
    prime = a[0][0].prime
    el = row_reduce(a, guard, col_order)
    pivset = set(el.pivot_cols)
    basis = []
    zero = PadicScalar.zero(prime)
    one = PadicScalar.from_int(1, prime)
    for f in range(m):
        if f in pivset:
            continue
        vec = [zero] * m
        vec[f] = one
        for row_idx, pc in enumerate(el.pivot_cols):
            vec[pc] = -el.rref[row_idx][f]
        basis.append(vec)
    return basis


def _prime(a: Matrix) -> int:
    for row in a:
        for x in row:
            return x.prime
    raise ValueError("empty matrix has no prime")


def solve(a: Matrix, b: Sequence[PadicScalar], guard: int = GUARD_DIGITS) -> list[PadicScalar]:
    """Solve the square system ``a x = b``; raises if ``a`` is singular."""
    n, m = shape(a)
    if n != m:
        raise ValueError("solve expects a square matrix")
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    el = row_reduce(aug, guard, col_order=list(range(n)))
    if el.rank < n or el.pivot_cols[:n] != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [el.rref[i][n] for i in range(n)]


def inverse(a: Matrix, guard: int = GUARD_DIGITS) -> Matrix:
    n, m = shape(a)
    if n != m:
        raise ValueError("inverse expects a square matrix")
    prime = a[0][0].prime
    eye = identity(n, prime)
    aug = [list(a[i]) + eye[i] for i in range(n)]
    el = row_reduce(aug, guard, col_order=list(range(n)))
    if el.rank < n or el.pivot_cols != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in el.rref]


def determinant(a: Matrix) -> PadicScalar:
    """Determinant by least-valuation Gaussian elimination."""
    n, m = shape(a)
    if n != m:
        raise ValueError("determinant expects a square matrix")
    rows = [list(r) for r in a]
    prime = rows[0][0].prime
    det = PadicScalar.from_int(1, prime)
    for c in range(n):
        best = None
        for i in range(c, n):
            x = rows[i][c]
            if not x.is_zero() and (best is None or x.valuation < rows[best][c].valuation):
                best = i
        if best is None:
            floor = min(
                (rows[i][c].abs_precision for i in range(c, n) if rows[i][c].abs_precision is not None),
                default=None,
            )
            return PadicScalar.zero(prime, None if floor is None else floor + det.val())
        if best != c:
            rows[c], rows[best] = rows[best], rows[c]
            det = -det
        piv = rows[c][c]
        det = det * piv
        inv = piv.inv()
        for i in range(c + 1, n):
            f = rows[i][c]
            if not f.is_zero():
                f = f * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return det


def span_basis(
    vectors: Sequence[Sequence[PadicScalar]], guard: int = GUARD_DIGITS
) -> list[int]:
    """Indices of a maximal linearly independent prefix-greedy subset."""
    chosen: list[int] = []
    reduced: list[tuple[int, list[PadicScalar]]] = []  # (pivot col, echelon row)
    for idx, vec in enumerate(vectors):
        w = list(vec)
        for pc, row in reduced:
            f = w[pc]
            if not f.is_zero():
                w = [x - f * y for x, y in zip(w, row)]
        best = None
        for j, x in enumerate(w):
            if not x.is_zero() and (best is None or x.valuation < w[best].valuation):
                best = j
        if best is None:
            continue
        _check_pivot(w[best], guard)
        inv = w[best].inv()
        w = [x * inv for x in w]
        reduced = [
            (pc, [x - row[best] * y for x, y in zip(row, w)]) if not row[best].is_zero() else (pc, row)
            for pc, row in reduced
        ]
        reduced.append((best, w))
        chosen.append(idx)
    return chosen
