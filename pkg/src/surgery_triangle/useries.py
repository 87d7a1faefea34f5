"""Truncated power series over F_2 and linear algebra over F_2[[U]]/U^N.

A series is stored as a Python integer used as a bit set: bit ``e`` is the
coefficient of ``U**e``.  Addition is XOR and multiplication is carry-less
multiplication followed by truncation, so everything is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_TRUNC = 64
DEFAULT_GUARD = 8


class SeriesError(ValueError):
    pass


class TruncationMismatch(SeriesError):
    pass


class NotAUnit(SeriesError):
    pass


class NoKernel(SeriesError):
    pass


class AmbiguousKernel(SeriesError):
    pass


def _clmul(a: int, b: int, mask: int) -> int:
    # carry-less product, iterating over the sparser factor
    if a.bit_count() < b.bit_count():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out & mask


def _valuation(bits: int, n: int) -> int:
    return (bits & -bits).bit_length() - 1 if bits else n


def _inverse_bits(bits: int, n: int) -> int:
    if not bits & 1:
        raise NotAUnit("series with zero constant term is not invertible")
    mask = (1 << n) - 1
    x = 1
    prec = 1
    # Newton step x <- a*x^2 doubles the number of correct coefficients
    while prec < n:
        x = _clmul(bits, _clmul(x, x, mask), mask)
        prec *= 2
    return x


@dataclass(frozen=True)
class Series:
    """An element of F_2[U]/U^N."""

    bits: int
    trunc_order: int = DEFAULT_TRUNC

    def __post_init__(self):
        if self.trunc_order < 1:
            raise SeriesError("truncation order must be positive")
        if self.bits < 0 or self.bits >> self.trunc_order:
            object.__setattr__(self, "bits", self.bits & ((1 << self.trunc_order) - 1))

    @classmethod
    def from_exponents(cls, exps: Iterable[int], trunc_order: int = DEFAULT_TRUNC) -> "Series":
        bits = 0
        for e in exps:
            if e < 0:
                raise SeriesError("negative exponent")
            if e < trunc_order:
                bits ^= 1 << e
        return cls(bits, trunc_order)

    @classmethod
    def zero(cls, trunc_order: int = DEFAULT_TRUNC) -> "Series":
        return cls(0, trunc_order)

    @classmethod
    def one(cls, trunc_order: int = DEFAULT_TRUNC) -> "Series":
        return cls(1, trunc_order)

    @classmethod
    def monomial(cls, e: int, trunc_order: int = DEFAULT_TRUNC) -> "Series":
        return cls.from_exponents([e], trunc_order)

    @property
    def coeffs(self) -> tuple[int, ...]:
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return tuple(out)

    def _check(self, other: "Series") -> None:
        if self.trunc_order != other.trunc_order:
            raise TruncationMismatch(
                f"truncation orders differ: {self.trunc_order} vs {other.trunc_order}"
            )

    def __add__(self, other: "Series") -> "Series":
        self._check(other)
        return Series(self.bits ^ other.bits, self.trunc_order)

    __sub__ = __add__

    def __mul__(self, other: "Series") -> "Series":
        self._check(other)
        mask = (1 << self.trunc_order) - 1
        return Series(_clmul(self.bits, other.bits, mask), self.trunc_order)

    def __bool__(self) -> bool:
        return self.bits != 0

    def valuation(self) -> int:
        """Lowest exponent present; the truncation order for zero."""
        return _valuation(self.bits, self.trunc_order)

    def is_unit(self) -> bool:
        return bool(self.bits & 1)

    def inverse(self) -> "Series":
        return Series(_inverse_bits(self.bits, self.trunc_order), self.trunc_order)

    def shift_down(self, m: int) -> "Series":
        """Divide by U^m, discarding any terms below U^m."""
        return Series(self.bits >> m, self.trunc_order)

    def shift_up(self, m: int) -> "Series":
        return Series(self.bits << m, self.trunc_order)

    def truncate(self, order: int) -> "Series":
        """Reduce to a new truncation order (smaller or larger)."""
        return Series(self.bits & ((1 << min(order, self.trunc_order)) - 1), order)

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    def __str__(self) -> str:
        if not self.bits:
            return "0"
        terms = []
        for e in self.coeffs:
            terms.append("1" if e == 0 else "U" if e == 1 else f"U^{e}")
        return "+".join(terms)


def series_mul(a: Series, b: Series) -> Series:
    return a * b


def series_inverse(a: Series) -> Series:
    return a.inverse()


class SeriesMatrix:
    """Dense matrix with entries in F_2[U]/U^N, immutable after construction.

    Entries are kept as raw bit sets; ``entry`` wraps them as ``Series``.
    """

    __slots__ = ("rows", "cols", "trunc_order", "_data")

    def __init__(self, data: Sequence[Sequence[int]], trunc_order: int = DEFAULT_TRUNC,
                 cols: int | None = None):
        mask = (1 << trunc_order) - 1
        rows_t = tuple(tuple(int(x) & mask for x in row) for row in data)
        ncols = cols if cols is not None else (len(rows_t[0]) if rows_t else 0)
        for row in rows_t:
            if len(row) != ncols:
                raise SeriesError("ragged matrix")
        self.rows = len(rows_t)
        self.cols = ncols
        self.trunc_order = trunc_order
        self._data = rows_t

    @classmethod
    def from_series(cls, rows: Sequence[Sequence[Series]], trunc_order: int | None = None,
                    cols: int | None = None) -> "SeriesMatrix":
        n = trunc_order
        for row in rows:
            for s in row:
                if n is None:
                    n = s.trunc_order
                elif s.trunc_order != n:
                    raise TruncationMismatch("entries have different truncation orders")
        return cls([[s.bits for s in row] for row in rows], n or DEFAULT_TRUNC, cols)

    @classmethod
    def zeros(cls, rows: int, cols: int, trunc_order: int = DEFAULT_TRUNC) -> "SeriesMatrix":
        return cls([[0] * cols for _ in range(rows)], trunc_order, cols)

    @classmethod
    def identity(cls, n: int, trunc_order: int = DEFAULT_TRUNC) -> "SeriesMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], trunc_order, n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def raw(self) -> tuple[tuple[int, ...], ...]:
        return self._data

    def entry(self, r: int, c: int) -> Series:
        return Series(self._data[r][c], self.trunc_order)

    def __getitem__(self, rc: tuple[int, int]) -> Series:
        return self.entry(*rc)

    def column(self, c: int) -> list[Series]:
        return [self.entry(r, c) for r in range(self.rows)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.trunc_order == other.trunc_order
                and self._data == other._data)

    def __hash__(self) -> int:
        return hash((self.shape, self.trunc_order, self._data))

    def __repr__(self) -> str:
        return f"SeriesMatrix({self.rows}x{self.cols}, N={self.trunc_order})"

    def _check(self, other: "SeriesMatrix") -> None:
        if self.trunc_order != other.trunc_order:
            raise TruncationMismatch("matrices have different truncation orders")

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise SeriesError("shape mismatch")
        return SeriesMatrix(
            [[a ^ b for a, b in zip(r1, r2)] for r1, r2 in zip(self._data, other._data)],
            self.trunc_order, self.cols)

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise SeriesError(f"cannot multiply {self.shape} by {other.shape}")
        mask = (1 << self.trunc_order) - 1
        ocols = list(zip(*other._data)) if other.rows else [()] * other.cols
        out = []
        for row in self._data:
            new = []
            for col in ocols:
                acc = 0
                for a, b in zip(row, col):
                    if a and b:
                        acc ^= _clmul(a, b, mask)
                new.append(acc)
            out.append(new)
        return SeriesMatrix(out, self.trunc_order, other.cols)

    def apply(self, vec: Sequence[Series]) -> list[Series]:
        """Matrix times column vector."""
        if len(vec) != self.cols:
            raise SeriesError("vector length mismatch")
        mask = (1 << self.trunc_order) - 1
        bits = [v.bits for v in vec]
        out = []
        for row in self._data:
            acc = 0
            for a, b in zip(row, bits):
                if a and b:
                    acc ^= _clmul(a, b, mask)
            out.append(Series(acc, self.trunc_order))
        return out

    def transpose(self) -> "SeriesMatrix":
        if not self.rows:
            return SeriesMatrix([[] for _ in range(self.cols)], self.trunc_order, 0)
        return SeriesMatrix([list(col) for col in zip(*self._data)], self.trunc_order, self.rows)

    def truncate(self, order: int) -> "SeriesMatrix":
        return SeriesMatrix(self._data, order, self.cols)

    def mod_u(self) -> list[list[int]]:
        """Reduction modulo U as a 0/1 matrix."""
        return [[x & 1 for x in row] for row in self._data]

    def is_zero(self) -> bool:
        return not any(any(row) for row in self._data)

    def to_json(self) -> list[list[list[int]]]:
        return [[Series(x, self.trunc_order).to_json() for x in row] for row in self._data]


@dataclass(frozen=True)
class SNFResult:
    """``S @ diag(U^D) @ T == M`` modulo U^N.

    ``T_inv`` is kept as well since kernels are read off from its columns.
    """

    S: SeriesMatrix
    D: tuple[int, ...]
    T: SeriesMatrix
    T_inv: SeriesMatrix

    def diagonal_matrix(self) -> SeriesMatrix:
        n = self.S.trunc_order
        rows, cols = self.S.cols, self.T.rows
        data = [[0] * cols for _ in range(rows)]
        for i, v in enumerate(self.D):
            if v < n:
                data[i][i] = 1 << v
        return SeriesMatrix(data, n, cols)

    def max_finite(self) -> int:
        """Largest diagonal valuation below N, or -1 if there is none."""
        finite = [v for v in self.D if v < self.S.trunc_order]
        return max(finite) if finite else -1


def smith_normal_form(M: SeriesMatrix) -> SNFResult:
    """Smith normal form over the truncated discrete valuation ring.

    The pivot at each step is the entry of least valuation in the remaining
    block, ties broken by lowest row and then lowest column.
    """
    n = M.trunc_order
    mask = (1 << n) - 1
    rows, cols = M.rows, M.cols
    A = [list(r) for r in M.raw]
    # S accumulates the inverse of the row operations, T the inverse of the
    # column operations and Tinv the column operations themselves
    S = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    T = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]
    Tinv = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]
    diag: list[int] = []

    for t in range(min(rows, cols)):
        best = None
        for r in range(t, rows):
            row = A[r]
            for c in range(t, cols):
                x = row[c]
                if x:
                    v = _valuation(x, n)
                    if best is None or v < best[0]:
                        best = (v, r, c)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            diag.extend([n] * (min(rows, cols) - t))
            break
        v, r, c = best
        if r != t:
            A[t], A[r] = A[r], A[t]
            for row in S:
                row[t], row[r] = row[r], row[t]
        if c != t:
            for row in A:
                row[t], row[c] = row[c], row[t]
            T[t], T[c] = T[c], T[t]
            for row in Tinv:
                row[t], row[c] = row[c], row[t]
        unit = A[t][t] >> v
        if unit != 1:
            inv = _inverse_bits(unit, n)
            A[t] = [_clmul(x, inv, mask) if x else 0 for x in A[t]]
            for row in S:
                if row[t]:
                    row[t] = _clmul(row[t], unit, mask)
        pivot_row = A[t]
        # clear column t below the pivot: row_r += c * row_t, so S col t += c * S col r
        for r in range(t + 1, rows):
            x = A[r][t]
            if not x:
                continue
            coef = x >> v
            row = A[r]
            for j in range(t, cols):
                if pivot_row[j]:
                    row[j] ^= _clmul(coef, pivot_row[j], mask)
            for srow in S:
                if srow[r]:
                    srow[t] ^= _clmul(coef, srow[r], mask)
        # clear row t right of the pivot: col_j += c * col_t
        for j in range(t + 1, cols):
            x = pivot_row[j]
            if not x:
                continue
            coef = x >> v
            pivot_row[j] = 0
            trow, jrow = T[t], T[j]
            for m in range(cols):
                if jrow[m]:
                    trow[m] ^= _clmul(coef, jrow[m], mask)
            for row in Tinv:
                if row[t]:
                    row[j] ^= _clmul(coef, row[t], mask)
        diag.append(v)

    return SNFResult(
        S=SeriesMatrix(S, n, rows),
        D=tuple(diag),
        T=SeriesMatrix(T, n, cols),
        T_inv=SeriesMatrix(Tinv, n, cols),
    )


def kernel_generator(M: SeriesMatrix, guard: int = DEFAULT_GUARD) -> list[Series]:
    """Generator of the rank-one kernel of a square matrix.

    The kernel direction is the column of ``T^-1`` whose diagonal valuation
    reaches ``N - guard``; anything smaller is treated as a genuine nonzero
    pivot.
    """
    if M.rows != M.cols:
        raise SeriesError("kernel_generator expects a square matrix")
    n = M.trunc_order
    res = smith_normal_form(M)
    margin = n - guard
    hits = [i for i, v in enumerate(res.D) if v >= margin]
    if not hits:
        raise NoKernel(f"no diagonal valuation reaches {margin}: {res.D}")
    if len(hits) > 1:
        raise AmbiguousKernel(f"{len(hits)} diagonal valuations reach {margin}: {res.D}")
    col = res.T_inv.column(hits[0])
    common = min(s.valuation() for s in col)
    return [s.shift_down(common) for s in col]


def gf2_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over F_2 of a 0/1 matrix."""
    packed = []
    for row in rows:
        x = 0
        for j, b in enumerate(row):
            if b & 1:
                x |= 1 << j
        packed.append(x)
    return _rank_packed(packed)


def _rank_packed(vectors: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for x in vectors:
        while x:
            top = x.bit_length() - 1
            if top not in basis:
                basis[top] = x
                break
            x ^= basis[top]
    return len(basis)
