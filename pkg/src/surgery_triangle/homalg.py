"""Homology of finite free complexes over F_2[U]/U^N.

Homology is computed by repeated cancellation: take a differential entry of
least valuation ``a``, change basis so that it becomes a single arrow
``x -> U^a y'``, split the pair off, and repeat.  Pairs with ``a = 0``
cancel, pairs with ``a > 0`` give torsion ``F[U]/U^a`` generated at the
grading of ``y'``, and whatever survives is free.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .useries import DEFAULT_GUARD, SeriesMatrix, _clmul, _inverse_bits, _valuation, gf2_rank


class HomologyError(ValueError):
    pass


class NotAComplex(HomologyError):
    pass


class GradingError(HomologyError):
    pass


class UnstableTorsion(HomologyError):
    pass


class NotNullhomotopy(HomologyError):
    pass


class NakayamaViolation(AssertionError):
    pass


@dataclass(frozen=True)
class FiniteComplex:
    """Free complex with basis ``names`` and ``differential[r][c]`` the
    coefficient of ``names[r]`` in the boundary of ``names[c]``.

    ``gradings`` is optional; when given, U has grading -2 and the
    differential must lower grading by one.
    """

    names: tuple[str, ...]
    differential: SeriesMatrix
    gradings: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        n = len(self.names)
        if self.differential.shape != (n, n):
            raise HomologyError(f"differential has shape {self.differential.shape}, expected {(n, n)}")
        if self.gradings is not None and len(self.gradings) != n:
            raise HomologyError("one grading per generator is required")

    @property
    def rank(self) -> int:
        return len(self.names)

    @property
    def trunc_order(self) -> int:
        return self.differential.trunc_order

    def check_square_zero(self) -> None:
        if not (self.differential @ self.differential).is_zero():
            raise NotAComplex("differential does not square to zero")

    def check_homogeneous(self) -> None:
        if self.gradings is None:
            return
        for r, row in enumerate(self.differential.raw):
            for c, x in enumerate(row):
                b = x
                while b:
                    low = b & -b
                    e = low.bit_length() - 1
                    if self.gradings[r] - 2 * e != self.gradings[c] - 1:
                        raise GradingError(
                            f"term U^{e} {self.names[r]} in d({self.names[c]}) breaks grading")
                    b ^= low

    def truncate(self, order: int) -> "FiniteComplex":
        return FiniteComplex(self.names, self.differential.truncate(order), self.gradings)


@dataclass(frozen=True)
class HomologyDecomp:
    """Free summands by grading and torsion summands ``F[U]/U^a`` by (a, grading).

    Gradings are ``None`` for ungraded complexes.
    """

    free: tuple
    torsion: tuple

    @property
    def free_rank(self) -> int:
        return len(self.free)

    @property
    def is_zero(self) -> bool:
        return not self.free and not self.torsion

    def ungraded(self) -> tuple[int, tuple[int, ...]]:
        return len(self.free), tuple(sorted(a for a, _ in self.torsion))

    def f2_dimension(self, trunc_order: int) -> int:
        """Dimension over F_2 of the homology of ``C (x) F[U]/U^N``."""
        return trunc_order * len(self.free) + 2 * sum(a for a, _ in self.torsion)

    def field_dimension(self) -> int:
        """Dimension of the homology of ``C (x) F``."""
        return len(self.free) + 2 * len(self.torsion)

    def to_json(self) -> dict:
        def g(x):
            return None if x is None else f"{x.numerator}/{x.denominator}"

        return {
            "free_rank": len(self.free),
            "free": [g(x) for x in self.free],
            "torsion": [{"exponent": a, "grading": g(x)} for a, x in self.torsion],
        }


def _sort_key(x):
    return (0, Fraction(0)) if x is None else (1, x)


def _decomp(free, torsion) -> HomologyDecomp:
    free = tuple(sorted(free, key=_sort_key, reverse=True))
    torsion = tuple(sorted(torsion, key=lambda t: (t[0],) + _sort_key(t[1])))
    return HomologyDecomp(free, torsion)


def homology(C: FiniteComplex, guard: int = DEFAULT_GUARD, check: bool = True) -> HomologyDecomp:
    n = C.trunc_order
    mask = (1 << n) - 1
    if check:
        C.check_square_zero()
        C.check_homogeneous()
    size = C.rank
    # columns as the working representation: cols[c][r]
    cols = [list(col) for col in zip(*C.differential.raw)] if size else []
    active = list(range(size))
    torsion = []
    grading = C.gradings
    while True:
        best = None
        for c in active:
            col = cols[c]
            for r in active:
                x = col[r]
                if x:
                    # a diagonal pivot would replace its own source generator
                    key = (_valuation(x, n), r == c, r, c)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        a, diag, r, c = best
        if diag:
            raise NotAComplex(f"entry of valuation {a} only on the diagonal; d^2 cannot vanish")
        if a >= n - guard:
            raise UnstableTorsion(f"torsion exponent {a} too close to truncation order {n}")
        w = [x >> a for x in cols[c]]
        # replace generator r by w = sum_o w_o g_o; new coordinates:
        # x'_r = x_r / w_r, x'_o = x_o - w_o x'_r
        winv = _inverse_bits(w[r], n)
        dw = [0] * size
        for o in active:
            if w[o]:
                col = cols[o]
                for rr in active:
                    if col[rr]:
                        dw[rr] ^= _clmul(w[o], col[rr], mask)
        cols[r] = dw
        for cc in active:
            col = cols[cc]
            xr = col[r]
            if not xr:
                continue
            xr = _clmul(xr, winv, mask)
            col[r] = xr
            for o in active:
                if o != r and w[o]:
                    col[o] ^= _clmul(w[o], xr, mask)
        # now d(g_c) = U^a g_r; clear the rest of row r using column c
        for cc in active:
            if cc == c:
                continue
            x = cols[cc][r]
            if not x:
                continue
            lam = x >> a
            # g_cc <- g_cc - lam g_c: column op, then the inverse row op on row c
            col = cols[cc]
            for rr in active:
                if cols[c][rr]:
                    col[rr] ^= _clmul(lam, cols[c][rr], mask)
            for c2 in active:
                if cols[c2][cc]:
                    cols[c2][c] ^= _clmul(lam, cols[c2][cc], mask)
        if a > 0:
            torsion.append((a, None if grading is None else grading[r]))
        active = [x for x in active if x not in (r, c)]
    free = [None if grading is None else grading[x] for x in active]
    return _decomp(free, torsion)


def homology_field(C: FiniteComplex) -> int:
    """Dimension of ``H(C (x) F)`` by rank-nullity over the residue field."""
    return C.rank - 2 * gf2_rank(C.differential.mod_u())


def is_acyclic_nakayama(C: FiniteComplex, guard: int = DEFAULT_GUARD) -> bool:
    """Whether ``C (x) F`` is acyclic, cross-checked against the ring homology.

    Acyclicity of the reduction forces the truncated homology to vanish; a
    disagreement raises ``NakayamaViolation``.
    """
    field_dim = homology_field(C)
    H = homology(C, guard)
    if field_dim != H.field_dimension():
        raise NakayamaViolation(
            f"field homology has dimension {field_dim} but the decomposition predicts "
            f"{H.field_dimension()}")
    if field_dim == 0 and not H.is_zero:
        raise NakayamaViolation("acyclic mod U but the ring homology is nonzero")
    return field_dim == 0


def _block(mats: Sequence[Sequence[SeriesMatrix | None]], sizes: Sequence[int], n: int) -> SeriesMatrix:
    total = sum(sizes)
    data = [[0] * total for _ in range(total)]
    offs = [sum(sizes[:i]) for i in range(len(sizes))]
    for bi, row in enumerate(mats):
        for bj, m in enumerate(row):
            if m is None:
                continue
            if m.shape != (sizes[bi], sizes[bj]):
                raise HomologyError(f"block ({bi},{bj}) has shape {m.shape}")
            for r in range(m.rows):
                for c in range(m.cols):
                    data[offs[bi] + r][offs[bj] + c] = m.raw[r][c]
    return SeriesMatrix(data, n, total)


def mapping_cone3(C0: FiniteComplex, C1: FiniteComplex, C2: FiniteComplex,
                  f0: SeriesMatrix, f1: SeriesMatrix, H0: SeriesMatrix) -> FiniteComplex:
    """Total complex of ``C0 -> C1 -> C2`` with ``f1 f0`` nullhomotopic via ``H0``.

    The differential is ``[[d0, 0, 0], [f0, d1, 0], [H0, f1, d2]]``.
    """
    n = C0.trunc_order
    d0, d1, d2 = C0.differential, C1.differential, C2.differential
    for C in (C0, C1, C2):
        C.check_square_zero()
    if f0.shape != (C1.rank, C0.rank) or f1.shape != (C2.rank, C1.rank) \
            or H0.shape != (C2.rank, C0.rank):
        raise HomologyError("map shapes do not match the complexes")
    if not (f0 @ d0 + d1 @ f0).is_zero():
        raise HomologyError("f0 is not a chain map")
    if not (f1 @ d1 + d2 @ f1).is_zero():
        raise HomologyError("f1 is not a chain map")
    if d2 @ H0 + H0 @ d0 != f1 @ f0:
        raise NotNullhomotopy("d H0 + H0 d differs from f1 f0")
    sizes = [C0.rank, C1.rank, C2.rank]
    D = _block([[d0, None, None], [f0, d1, None], [H0, f1, d2]], sizes, n)
    names = tuple(f"0:{x}" for x in C0.names) + tuple(f"1:{x}" for x in C1.names) \
        + tuple(f"2:{x}" for x in C2.names)
    return FiniteComplex(names, D, None)


def count_by_grading(items) -> Counter:
    return Counter(items)
