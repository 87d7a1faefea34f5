"""Independent reference computations used by the tests.

None of these share code paths with the package beyond the container types:
products are done by schoolbook convolution on coefficient lists, homology
by linear algebra over F_2 on the full expansion of a module over
F_2[U]/U^N, and the kernel series come from their quadratic-exponent sums.
"""

from __future__ import annotations

import random

from surgery_triangle.homalg import FiniteComplex
from surgery_triangle.useries import Series, SeriesMatrix


def convolve(a: Series, b: Series) -> Series:
    n = a.trunc_order
    ca = [(a.bits >> e) & 1 for e in range(n)]
    cb = [(b.bits >> e) & 1 for e in range(n)]
    out = 0
    for e in range(n):
        s = 0
        for i in range(e + 1):
            s ^= ca[i] & cb[e - i]
        out |= s << e
    return Series(out, n)


def naive_matmul(A: SeriesMatrix, B: SeriesMatrix) -> SeriesMatrix:
    n = A.trunc_order
    rows = []
    for r in range(A.rows):
        row = []
        for c in range(B.cols):
            acc = Series.zero(n)
            for m in range(A.cols):
                acc = acc + convolve(A.entry(r, m), B.entry(m, c))
            row.append(acc.bits)
        rows.append(row)
    return SeriesMatrix(rows, n, B.cols)


def quadratic_series(coeffs: list[tuple[int, int, int]], trunc_order: int, span: int = 60) -> Series:
    """Sum over m in Z and each (A, B, C) of ``U^{(A m^2 + B m + C)/2}``."""
    bits = 0
    for A, B, C in coeffs:
        for m in range(-span, span + 1):
            e2 = A * m * m + B * m + C
            assert e2 % 2 == 0 and e2 >= 0
            e = e2 // 2
            if e < trunc_order:
                bits ^= 1 << e
    return Series(bits, trunc_order)


def abc_series(trunc_order: int) -> tuple[Series, Series, Series]:
    """The three kernel series for slope 5/3."""
    a = quadratic_series([(15, 27, 12)], trunc_order)
    b = quadratic_series([(15, 7, 0), (15, 13, 2)], trunc_order)
    c = quadratic_series([(15, 25, 10)], trunc_order)
    return a, b, c


# ---------------------------------------------------------------------------
# F_2 linear algebra on packed integers


def rank_f2(vectors) -> int:
    basis: dict[int, int] = {}
    for x in vectors:
        while x:
            top = x.bit_length() - 1
            if top not in basis:
                basis[top] = x
                break
            x ^= basis[top]
    return len(basis)


def nullspace_f2(equations: list[int], nvars: int) -> list[int]:
    """Basis of ``{x : <e, x> = 0 for all e}`` with vectors packed as ints."""
    pivots: dict[int, int] = {}
    for e in equations:
        for col, row in pivots.items():
            if (e >> col) & 1:
                e ^= row
        if not e:
            continue
        col = (e & -e).bit_length() - 1
        for c2 in list(pivots):
            if (pivots[c2] >> col) & 1:
                pivots[c2] ^= e
        pivots[col] = e
    free = [c for c in range(nvars) if c not in pivots]
    basis = []
    for f in free:
        x = 1 << f
        for col, row in pivots.items():
            if (row >> f) & 1:
                x |= 1 << col
        basis.append(x)
    return basis


def expansion_matrix(D: SeriesMatrix) -> list[int]:
    """Columns of D as an F_2-linear map on the nN-dimensional expansion."""
    n, N = D.rows, D.trunc_order
    mask = (1 << N) - 1
    cols = []
    for c in range(D.cols):
        for e in range(N):
            img = 0
            for r in range(n):
                x = (D.raw[r][c] << e) & mask
                img |= x << (r * N)
            cols.append(img)
    return cols


def brute_force_dimension(C: FiniteComplex) -> int:
    """Dimension over F_2 of the homology of C as a module over F_2[U]/U^N."""
    N = C.trunc_order
    rk = rank_f2(expansion_matrix(C.differential))
    return C.rank * N - 2 * rk


# ---------------------------------------------------------------------------
# random complexes that lift to F_2[[U]]


class NormalForm:
    """Free generators plus arrows ``x -> U^a y``, with polynomial differential."""

    def __init__(self, free: int, exps: list[int]):
        self.free = free
        self.exps = exps
        self.size = free + 2 * len(exps)

    def matrix(self) -> list[list[int]]:
        """Differential with polynomial entries (bit sets, no truncation)."""
        D = [[0] * self.size for _ in range(self.size)]
        for t, a in enumerate(self.exps):
            x = self.free + 2 * t
            D[x + 1][x] = 1 << a
        return D


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def poly_matmul(A, B):
    rows, inner = len(A), len(B)
    cols = len(B[0]) if B else 0
    out = [[0] * cols for _ in range(rows)]
    for r in range(rows):
        for m in range(inner):
            if A[r][m]:
                for c in range(cols):
                    if B[m][c]:
                        out[r][c] ^= poly_mul(A[r][m], B[m][c])
    return out


def poly_add(A, B):
    return [[x ^ y for x, y in zip(r1, r2)] for r1, r2 in zip(A, B)]


def random_chain_map(rng: random.Random, src: NormalForm, dst: NormalForm, deg: int = 5,
                     kill=None):
    """Random polynomial chain map ``src -> dst`` of entry degree < deg.

    ``kill`` is an optional polynomial map ``pre -> src``; the result g then
    also satisfies ``g . kill = 0`` exactly.
    """
    m, n = dst.size, src.size
    if m == 0 or n == 0:
        return [[0] * n for _ in range(m)]
    Ds, Dd = src.matrix(), dst.matrix()
    nvars = m * n * deg

    def var(r, c, e):
        return (r * n + c) * deg + e

    maxdeg = deg + 8
    eqs = []
    # (g Ds + Dd g)[r][c] = 0 coefficientwise
    for r in range(m):
        for c in range(n):
            for e in range(maxdeg):
                eq = 0
                for k in range(n):
                    x = Ds[k][c]
                    if x:
                        sh = x.bit_length() - 1
                        if 0 <= e - sh < deg:
                            eq ^= 1 << var(r, k, e - sh)
                for k in range(m):
                    x = Dd[r][k]
                    if x:
                        sh = x.bit_length() - 1
                        if 0 <= e - sh < deg:
                            eq ^= 1 << var(k, c, e - sh)
                if eq:
                    eqs.append(eq)
    if kill is not None:
        pre = len(kill[0]) if kill else 0
        kdeg = max((x.bit_length() for row in kill for x in row), default=0)
        for r in range(m):
            for c in range(pre):
                for e in range(deg + kdeg):
                    eq = 0
                    for k in range(n):
                        x = kill[k][c]
                        b = x
                        while b:
                            low = b & -b
                            sh = low.bit_length() - 1
                            if 0 <= e - sh < deg:
                                eq ^= 1 << var(r, k, e - sh)
                            b ^= low
                    if eq:
                        eqs.append(eq)
    basis = nullspace_f2(eqs, nvars)
    x = 0
    for b in basis:
        if rng.random() < 0.5:
            x ^= b
    g = [[0] * n for _ in range(m)]
    for r in range(m):
        for c in range(n):
            for e in range(deg):
                if (x >> var(r, c, e)) & 1:
                    g[r][c] |= 1 << e
    return g


def random_normal_form(rng: random.Random, size: int, max_exp: int = 3) -> NormalForm:
    pairs = rng.randint(0, size // 2)
    exps = [rng.randint(0, max_exp) for _ in range(pairs)]
    return NormalForm(size - 2 * pairs, exps)


def random_change_of_basis(rng: random.Random, size: int, N: int, steps: int = 12):
    """Random invertible polynomial matrix and its inverse modulo U^N."""
    mask = (1 << N) - 1
    P = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    Pinv = [row[:] for row in P]
    if size < 2:
        return P, Pinv
    for _ in range(steps):
        i, j = rng.sample(range(size), 2)
        lam = rng.randint(0, 7)
        if not lam:
            continue
        # row_i += lam row_j on P; column_j += lam column_i on P^-1
        P[i] = [x ^ poly_mul(lam, y) for x, y in zip(P[i], P[j])]
        for row in Pinv:
            row[j] = (row[j] ^ poly_mul(lam, row[i])) & mask
    return P, Pinv


def to_matrix(A, N: int, cols: int) -> SeriesMatrix:
    return SeriesMatrix(A, N, cols)


def conjugate(P, A, Qinv, N: int) -> SeriesMatrix:
    """``P A Q^-1`` truncated at N."""
    cols = len(Qinv[0]) if Qinv else 0
    rows = len(P)
    if rows == 0 or cols == 0:
        return SeriesMatrix.zeros(rows, cols, N)
    mask = (1 << N) - 1
    M = poly_matmul(poly_matmul(P, A), Qinv)
    return SeriesMatrix([[x & mask for x in row] for row in M], N, cols)


def random_cone_data(rng: random.Random, N: int = 32, max_total: int = 8):
    """Random ``(C0, C1, C2, f0, f1, H0)`` lifting to F_2[[U]] with total rank <= max_total."""
    total = rng.randint(1, max_total)
    cuts = sorted(rng.randint(0, total) for _ in range(2))
    sizes = [cuts[0], cuts[1] - cuts[0], total - cuts[1]]
    mode = rng.choice(["generic", "iso", "homotopy"])
    if mode == "iso":
        sizes[1] = sizes[0]
    nfs = [random_normal_form(rng, s) for s in sizes]
    if mode == "iso":
        nfs[1] = NormalForm(nfs[0].free, list(nfs[0].exps))
        if rng.random() < 0.5:
            nfs[2] = NormalForm(0, [0] * (sizes[2] // 2))
            sizes[2] = nfs[2].size
    bases = [random_change_of_basis(rng, nf.size, N) for nf in nfs]

    if mode == "iso":
        g0 = [[1 if i == j else 0 for j in range(nfs[0].size)] for i in range(nfs[1].size)]
    else:
        g0 = random_chain_map(rng, nfs[0], nfs[1])
    H = [[0] * nfs[0].size for _ in range(nfs[2].size)]
    if mode == "homotopy":
        deg = 4
        kmat = [[rng.getrandbits(deg) for _ in range(nfs[1].size)] for _ in range(nfs[2].size)]
        g1 = poly_add(poly_matmul(nfs[2].matrix(), kmat), poly_matmul(kmat, nfs[1].matrix())) \
            if nfs[1].size and nfs[2].size else [[0] * nfs[1].size for _ in range(nfs[2].size)]
        if nfs[0].size and nfs[1].size and nfs[2].size:
            H = poly_matmul(kmat, g0)
    elif mode == "iso":
        g1 = [[0] * nfs[1].size for _ in range(nfs[2].size)]
    else:
        g1 = random_chain_map(rng, nfs[1], nfs[2], kill=g0 if nfs[0].size else None)

    complexes = []
    for nf, (P, Pinv) in zip(nfs, bases):
        D = conjugate(P, nf.matrix(), Pinv, N) if nf.size else SeriesMatrix.zeros(0, 0, N)
        complexes.append(FiniteComplex(tuple(f"g{i}" for i in range(nf.size)), D, None))
    f0 = conjugate(bases[1][0], g0, bases[0][1], N)
    f1 = conjugate(bases[2][0], g1, bases[1][1], N)
    H0 = conjugate(bases[2][0], H, bases[0][1], N)
    return complexes[0], complexes[1], complexes[2], f0, f1, H0, mode


def random_lifted_complex(rng: random.Random, size: int, N: int, max_exp: int = 3) -> FiniteComplex:
    nf = random_normal_form(rng, size, max_exp)
    P, Pinv = random_change_of_basis(rng, nf.size, N)
    D = conjugate(P, nf.matrix(), Pinv, N) if nf.size else SeriesMatrix.zeros(0, 0, N)
    return FiniteComplex(tuple(f"g{i}" for i in range(nf.size)), D, None), nf
