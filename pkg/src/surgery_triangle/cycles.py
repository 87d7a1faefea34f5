"""Triangle-count matrix, kernel coefficients and the local cycle checks.

Basis labels used throughout:

* ``("theta", (i, l))`` and ``("zeta", (i, l))`` for pairs in the index set
  of the current level (block sizes ``c``),
* ``("xi", j)`` for ``j`` in ``Z/q``.

A lifted triangle with index ``n`` (shifted by ``d``) has vertices
``theta[i, d+l]``, ``xi[j-p]``, ``zeta[i, d]`` where ``i = n mod p``,
``j = n mod q``, ``l = floor(n/p)``, and carries weight ``U^{n_z}``.  The
three compositions of the cycles are read off from this list of weighted
triangles, so they share one enumeration.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .diagram import (
    SlopeParams,
    TriangleLabel,
    index_set,
    involution_labels,
    middle_pair,
    nzk_count,
    s_sequence,
    special_indices,
    z_count,
    z_window,
    zigzag,
)
from .useries import (
    DEFAULT_GUARD,
    DEFAULT_TRUNC,
    Series,
    SeriesError,
    SeriesMatrix,
    _clmul,
    gf2_rank,
    kernel_generator,
    smith_normal_form,
)


class Option(enum.Enum):
    UNIT_U = "unit-u"
    UNIT_W = "unit-w"


class Composition(enum.Enum):
    OR_RINF = "0r*r-inf"
    RINF_INF0 = "r-inf*inf-0"
    INF0_0R = "inf-0*0r"


Label = tuple


# ---------------------------------------------------------------------------
# the matrix F


@dataclass(frozen=True)
class TriangleMatrix:
    p: int
    q: int
    F: SeriesMatrix
    row_labels: tuple[tuple[int, int], ...]

    @property
    def col_labels(self) -> tuple[int, ...]:
        return tuple(range(self.q))

    @property
    def adjoint(self) -> SeriesMatrix:
        return self.F.transpose()

    @property
    def trunc_order(self) -> int:
        return self.F.trunc_order

    def row_index(self, pair: tuple[int, int]) -> int:
        return self.row_labels.index(pair)


@lru_cache(maxsize=256)
def build_F(p: int, q: int, trunc_order: int = DEFAULT_TRUNC) -> TriangleMatrix:
    """Entry ``((i, l), j)`` is the sum of ``U^{z_n}`` over n with ``n = i mod p``,
    ``n = j + p mod q`` and ``floor(n/p) = l mod s_i``."""
    s = s_sequence(p, q)
    rows = index_set(s)
    pos = {pair: r for r, pair in enumerate(rows)}
    data = [[0] * q for _ in rows]
    for n in z_window(p, q, trunc_order):
        i = n % p
        if s[i] == 0:
            continue
        r = pos[(i, (n // p) % s[i])]
        data[r][(n - p) % q] ^= 1 << z_count(p, q, n)
    return TriangleMatrix(p, q, SeriesMatrix(data, trunc_order, q), tuple(rows))


def expected_F_mod_u(p: int, q: int) -> list[list[int]]:
    """The reduction of F modulo U predicted by the zero-weight triangles:
    ``sum_{i<min(p,q)} sum_{l=0}^{s_i} f_{i,l} e*_{(l-1)p+i}``."""
    s = s_sequence(p, q)
    rows = index_set(s)
    pos = {pair: r for r, pair in enumerate(rows)}
    out = [[0] * q for _ in rows]
    for i in range(min(p, q)):
        for l in range(s[i] + 1):
            out[pos[(i, l % s[i])]][((l - 1) * p + i) % q] ^= 1
    return out


# ---------------------------------------------------------------------------
# kernel coefficients


@dataclass(frozen=True)
class Coefficients:
    """Solved coefficients at level zero.

    ``v`` is indexed by ``j``; ``t``, ``u`` and ``w`` are aligned with
    ``pairs`` (the index set of the s-sequence).
    """

    p: int
    q: int
    trunc_order: int
    option: Option
    pairs: tuple[tuple[int, int], ...]
    v: tuple[Series, ...]
    t: tuple[Series, ...]
    u: tuple[Series, ...]
    w: tuple[Series, ...]
    max_finite: int = -1

    @property
    def t_map(self) -> dict[tuple[int, int], Series]:
        return dict(zip(self.pairs, self.t))

    @property
    def u_map(self) -> dict[tuple[int, int], Series]:
        return dict(zip(self.pairs, self.u))

    @property
    def w_map(self) -> dict[tuple[int, int], Series]:
        return dict(zip(self.pairs, self.w))

    def replace(self, **kw) -> "Coefficients":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(kw)
        return Coefficients(**data)

    def to_json(self) -> dict:
        return {
            "v": [x.to_json() for x in self.v],
            "t": {f"{i},{l}": x.to_json() for (i, l), x in zip(self.pairs, self.t)},
            "u": {f"{i},{l}": x.to_json() for (i, l), x in zip(self.pairs, self.u)},
            "w": {f"{i},{l}": x.to_json() for (i, l), x in zip(self.pairs, self.w)},
        }


def normalize_unit(vec: list[Series]) -> list[Series]:
    """Scale so that the first unit entry becomes exactly 1."""
    for x in vec:
        if x.is_unit():
            inv = x.inverse()
            return [y * inv for y in vec]
    raise SeriesError("vector vanishes modulo U")


def _option(option) -> Option:
    return option if isinstance(option, Option) else Option(option)


@lru_cache(maxsize=256)
def solve_coefficients(p: int, q: int, trunc_order: int = DEFAULT_TRUNC,
                       option: Option | str = Option.UNIT_U,
                       guard: int = DEFAULT_GUARD) -> Coefficients:
    """Kernel vectors of F and its adjoint, and the derived u, w."""
    option = _option(option)
    tm = build_F(p, q, trunc_order)
    F = tm.F
    v = normalize_unit(kernel_generator(F, guard))
    t = normalize_unit(kernel_generator(F.transpose(), guard))
    max_finite = max(smith_normal_form(F).max_finite(),
                     smith_normal_form(F.transpose()).max_finite())
    s = s_sequence(p, q)
    pairs = tm.row_labels
    tmap = dict(zip(pairs, t))
    one = Series.one(trunc_order)
    zero = Series.zero(trunc_order)
    if option is Option.UNIT_U:
        u = [one if l == 0 else zero for (_, l) in pairs]
        w = [tmap[(i, (-l) % s[i])] for (i, l) in pairs]
    else:
        u = list(t)
        w = [one if l == 0 else zero for (_, l) in pairs]
    return Coefficients(p, q, trunc_order, option, pairs, tuple(v), tuple(t),
                        tuple(u), tuple(w), max_finite)


def unit_coefficients(p: int, q: int, trunc_order: int = DEFAULT_TRUNC,
                      option: Option | str = Option.UNIT_U) -> Coefficients:
    """All coefficients equal to one; the naive choice."""
    s = s_sequence(p, q)
    pairs = tuple(index_set(s))
    one = Series.one(trunc_order)
    return Coefficients(p, q, trunc_order, _option(option), pairs, (one,) * q,
                        (one,) * len(pairs), (one,) * len(pairs), (one,) * len(pairs))


def product_constraint_residual(c: Coefficients) -> list[Series]:
    """``sum_d u_{i,d+l} w_{i,d} - t_{i,l}`` for every pair; all zero when consistent."""
    s = s_sequence(c.p, c.q)
    um, wm, tm = c.u_map, c.w_map, c.t_map
    out = []
    for (i, l) in c.pairs:
        acc = Series.zero(c.trunc_order)
        for d in range(s[i]):
            acc = acc + um[(i, (d + l) % s[i])] * wm[(i, d)]
        out.append(acc + tm[(i, l)])
    return out


def uvw_modu_check(c: Coefficients) -> bool:
    """``u, w = [l == 0]`` and ``v_j = [j in -1..-min(p,q) mod q]`` modulo U."""
    m = min(c.p, c.q)
    for (_, l), x, y in zip(c.pairs, c.u, c.w):
        want = 1 if l == 0 else 0
        if (x.bits & 1) != want or (y.bits & 1) != want:
            return False
    ones = {(-a) % c.q for a in range(1, m + 1)}
    return all((x.bits & 1) == (1 if j in ones else 0) for j, x in enumerate(c.v))


def mod_u_kernel_check(p: int, q: int, trunc_order: int = DEFAULT_TRUNC) -> bool:
    """The reduction of F has a one-dimensional kernel spanned by
    ``e_{-1} + ... + e_{-min(p,q)}``."""
    red = build_F(p, q, trunc_order).F.mod_u()
    if red != expected_F_mod_u(p, q):
        return False
    if gf2_rank(red) != q - 1:
        return False
    vec = [0] * q
    for a in range(1, min(p, q) + 1):
        vec[(-a) % q] = 1
    return all(sum(r[j] & vec[j] for j in range(q)) % 2 == 0 for r in red)


# ---------------------------------------------------------------------------
# level-k cycles


@dataclass(frozen=True)
class PsiTriple:
    """Coefficients of the three cycles at level k, keyed by basis label."""

    params: SlopeParams
    coeff_theta: Mapping[tuple[int, int], Series]
    coeff_xi: Mapping[int, Series]
    coeff_zeta: Mapping[tuple[int, int], Series]

    @property
    def k(self) -> int:
        return self.params.k

    def xi_partner(self, j: int) -> int:
        """Index of the y-generator paired with ``xi_j``."""
        return (-(j % self.params.q) * self.params.qinv) % self.params.p

    def mod_u_support(self) -> dict[str, set]:
        return {
            "theta": {a for a, x in self.coeff_theta.items() if x.bits & 1},
            "xi": {a for a, x in self.coeff_xi.items() if x.bits & 1},
            "zeta": {a for a, x in self.coeff_zeta.items() if x.bits & 1},
        }


def shift_maps(params: SlopeParams):
    """Label maps from level 0 to level k.

    ``theta[i,l] -> theta[i+k, l]`` (``theta[i+k-p, l+1]`` once ``i+k`` wraps),
    ``xi[j] -> xi[j+k]``, ``zeta[i,l] -> zeta[i+k, l]``.
    """
    p, q, k = params.p, params.q, params.k
    c = params.c
    s = params.s
    theta = {}
    zeta = {}
    for i, l in index_set(s):
        ik = (i + k) % p
        if i + k < p:
            theta[(i, l)] = (ik, l)
        else:
            theta[(i, l)] = (ik, (l + 1) % c[ik])
        zeta[(i, l)] = (ik, l)
    xi = {j: (j + k) % q for j in range(q)}
    return theta, xi, zeta


def build_psis(params: SlopeParams, coeffs: Coefficients) -> PsiTriple:
    if (coeffs.p, coeffs.q) != (params.p, params.q):
        raise ValueError("coefficients belong to a different (p, q)")
    th, xm, ze = shift_maps(params)
    theta = {th[pair]: x for pair, x in zip(coeffs.pairs, coeffs.u) if x}
    zeta = {ze[pair]: x for pair, x in zip(coeffs.pairs, coeffs.w) if x}
    xi = {xm[j]: x for j, x in enumerate(coeffs.v) if x}
    return PsiTriple(params, theta, xi, zeta)


def special_psis(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> PsiTriple:
    """Each cycle taken to be the plain sum of its special basis elements."""
    one = Series.one(trunc_order)
    sb = special_basis(params)
    return PsiTriple(params, {a: one for a in sb["theta"]}, {a: one for a in sb["xi"]},
                     {a: one for a in sb["zeta"]})


@lru_cache(maxsize=4096)
def weighted_triangles(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC,
                       twisted: bool = True) -> tuple[tuple, ...]:
    """All lifted triangles of weight below N at level k.

    Entries are ``(theta_label, xi_label, zeta_label, weight, n)``.  Weights
    come from the twisted count when ``twisted`` (the default), otherwise
    from ``z_{n-k}``.
    """
    p, q, k = params.p, params.q, params.k
    c = params.c
    out = []
    for n in z_window(p, q, trunc_order, shift=k):
        i = n % p
        if c[i] == 0:
            continue
        wgt = nzk_count(params, n) if twisted else z_count(p, q, n - k)
        if wgt >= trunc_order:
            continue
        lab = TriangleLabel(n, p, q)
        for d in range(c[i]):
            th, xi, ze = lab.vertices(c, d)
            out.append((th, xi, ze, wgt, n))
    return tuple(out)


def mu2(psis: PsiTriple, composition: Composition, params: SlopeParams | None = None,
        trunc_order: int = DEFAULT_TRUNC) -> dict[Label, Series]:
    """Triangle-counting composition of two of the cycles, as label -> coefficient.

    Only nonzero coefficients are returned.
    """
    params = params or psis.params
    n = trunc_order
    mask = (1 << n) - 1
    th_c = {a: x.bits for a, x in psis.coeff_theta.items()}
    xi_c = {a: x.bits for a, x in psis.coeff_xi.items()}
    ze_c = {a: x.bits for a, x in psis.coeff_zeta.items()}
    acc: dict[Label, int] = {}
    for th, xi, ze, wgt, _ in weighted_triangles(params, n):
        if composition is Composition.OR_RINF:
            a, b, out = th_c.get(th), xi_c.get(xi), ("zeta", ze)
        elif composition is Composition.RINF_INF0:
            a, b, out = xi_c.get(xi), ze_c.get(ze), ("theta", th)
        else:
            a, b, out = th_c.get(th), ze_c.get(ze), ("xi", xi)
        if not a or not b:
            continue
        term = (_clmul(a, b, mask) << wgt) & mask
        if term:
            acc[out] = acc.get(out, 0) ^ term
    return {lab: Series(x, n) for lab, x in sorted(acc.items()) if x}


def min_valuation(result: Mapping[Label, Series], trunc_order: int) -> int:
    return min((x.valuation() for x in result.values()), default=trunc_order)


def triangle_tensor(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC,
                    twisted: bool = True) -> dict[tuple, int]:
    """Sum of ``U^w theta (x) xi (x) zeta`` over lifted triangles, as bit sets."""
    out: dict[tuple, int] = {}
    for th, xi, ze, wgt, _ in weighted_triangles(params, trunc_order, twisted):
        key = (th, xi, ze)
        out[key] = out.get(key, 0) ^ (1 << wgt)
    return {a: b for a, b in out.items() if b}


def conjugation_check(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> bool:
    """The level-k structure constants are the level-0 ones transported by the shift maps.

    This is the same as ``m . mu2^0 = mu2^k . (m (x) m)`` for all three
    compositions on every pair of basis elements, since each composition is
    a contraction of the one triangle tensor.
    """
    base = triangle_tensor(params.with_k(0), trunc_order, twisted=False)
    level = triangle_tensor(params, trunc_order, twisted=True)
    th, xm, ze = shift_maps(params)
    moved = {(th[a], xm[b], ze[c]): w for (a, b, c), w in base.items()}
    return moved == level


def special_basis(params: SlopeParams) -> dict[str, set]:
    """The special basis elements, listed by case on p >= q or p < q."""
    p, q, k = params.p, params.q, params.k
    c = params.c
    if p >= q:
        theta = {((k + a) % p, 0) for a in range(q)}
        xi = set(range(q))
        zeta = {((k + a) % p, 0) for a in range(q)}
    else:
        theta = {(i, 1 % c[i]) for i in range(k)} | {(i, 0) for i in range(k, p)}
        xi = {(k - p + a) % q for a in range(p)}
        zeta = {(i, 0) for i in range(p)}
    return {"theta": theta, "xi": xi, "zeta": zeta}


def special_triangle_vertices(params: SlopeParams) -> list[tuple]:
    c = params.c
    out = []
    for n in sorted(special_indices(params)):
        verts = TriangleLabel(n, params.p, params.q).vertices(c, 0)
        if verts is None:
            raise AssertionError(f"special triangle {n} has an empty theta block")
        out.append((n, verts))
    return out


def incidence_check(params: SlopeParams) -> bool:
    """Every special basis element is a vertex of exactly two special triangles,
    and no other label occurs."""
    counts: dict[tuple, int] = {}
    for _, (th, xi, ze) in special_triangle_vertices(params):
        for key in (("theta", th), ("xi", xi), ("zeta", ze)):
            counts[key] = counts.get(key, 0) + 1
    sb = special_basis(params)
    want = {(kind, a) for kind, labs in sb.items() for a in labs}
    return set(counts) == want and all(v == 2 for v in counts.values())


def hat_reduction_check(psis: PsiTriple) -> bool:
    """Modulo U each cycle is the sum of its special basis elements."""
    return psis.mod_u_support() == special_basis(psis.params)


def involution_rank_check(p: int, q: int, trunc_order: int = DEFAULT_TRUNC):
    """Ranks of the involution subspaces A (columns) and B (rows), and whether F(A) lies in B."""
    rows_inv, cols_inv = involution_labels(p, q)
    tm = build_F(p, q, trunc_order)
    F = tm.F
    # generators of A: e_j + e_{iota j} for 2-orbits, e_j for fixed points
    a_gens = []
    seen = set()
    for j in range(q):
        if j in seen:
            continue
        jb = cols_inv[j]
        seen.update({j, jb})
        a_gens.append({j, jb})
    rank_a = gf2_rank([[1 if j in g else 0 for j in range(q)] for g in a_gens])

    two_orbits = []
    fixed = []
    seen = set()
    for pair in tm.row_labels:
        if pair in seen:
            continue
        other = rows_inv[pair]
        seen.update({pair, other})
        (fixed if other == pair else two_orbits).append((pair, other))
    extra = None
    mid = middle_pair(p, q)
    s = s_sequence(p, q)
    if mid is not None and p < q:
        i0, l0 = mid
        if s[i0] != 2 * l0:
            raise AssertionError(f"s_{i0} != 2*{l0} for ({p},{q})")
        extra = (i0, l0 % s[i0])
    b_vectors = [{a, b} for a, b in two_orbits]
    if extra is not None:
        b_vectors.append({extra})
    idx = {pair: r for r, pair in enumerate(tm.row_labels)}
    rank_b = gf2_rank([[1 if pr in g else 0 for pr in tm.row_labels] for g in b_vectors])

    contained = True
    for g in a_gens:
        image = [0] * len(tm.row_labels)
        for j in g:
            for r in range(F.rows):
                image[r] ^= F.raw[r][j]
        for a, b in two_orbits:
            if image[idx[a]] != image[idx[b]]:
                contained = False
        for (a, _) in fixed:
            if a != extra and image[idx[a]]:
                contained = False
    return rank_a, rank_b, contained


# ---------------------------------------------------------------------------
# the full report


@dataclass
class VerificationReport:
    p: int
    q: int
    k: int
    trunc_order: int
    option: str
    guard: int
    verified_order: int = 0
    mu2: dict[str, bool] = field(default_factory=dict)
    mu2_valuation: dict[str, int] = field(default_factory=dict)
    uvw_modu: bool = False
    mod_u_kernel: bool = False
    hat_reduction: bool = False
    incidence: bool = False
    zigzag: bool = False
    conjugation: bool = False
    rank_a: int = 0
    rank_b: int = 0
    f_a_in_b: bool = False
    product_constraint: bool = False
    stability: bool | None = None
    failed: list[str] = field(default_factory=list)
    error: str | None = None
    coefficients: Coefficients | None = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failed

    def to_json(self, include_series: bool = True, include_timing: bool = False) -> dict:
        out = {
            "p": self.p,
            "q": self.q,
            "k": self.k,
            "trunc": self.trunc_order,
            "option": self.option,
            "guard": self.guard,
            "passed": self.passed,
            "failed": list(self.failed),
            "verified_order": self.verified_order,
            "mu2_vanishes": dict(sorted(self.mu2.items())),
            "mu2_valuation": dict(sorted(self.mu2_valuation.items())),
            "uvw_modu": self.uvw_modu,
            "mod_u_kernel": self.mod_u_kernel,
            "hat_reduction": self.hat_reduction,
            "incidence": self.incidence,
            "zigzag": self.zigzag,
            "conjugation": self.conjugation,
            "rank_a": self.rank_a,
            "rank_b": self.rank_b,
            "f_a_in_b": self.f_a_in_b,
            "product_constraint": self.product_constraint,
            "stability": self.stability,
        }
        if self.error:
            out["error"] = self.error
        if include_series and self.coefficients is not None:
            out["coefficients"] = self.coefficients.to_json()
        if include_timing:
            out["seconds"] = round(self.seconds, 6)
        return out


def verified_order_for(max_finite: int, trunc_order: int, guard: int) -> int:
    """``N - 1 - (largest finite SNF valuation)``, capped at ``N - guard``."""
    return min(trunc_order - 1 - max(max_finite, 0), trunc_order - guard)


def verify_main_theorem(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC,
                        option: Option | str = Option.UNIT_U,
                        guard: int = DEFAULT_GUARD,
                        coeffs: Coefficients | None = None,
                        stability: bool = True) -> VerificationReport:
    """Run every local check for one ``(p, q, k)``.

    ``coeffs`` overrides the solved coefficients (used for negative controls);
    the stability comparison against ``2N`` is skipped in that case.
    """
    option = _option(option)
    start = time.perf_counter()
    p, q, k = params.p, params.q, params.k
    rep = VerificationReport(p, q, k, trunc_order, option.value, guard)
    try:
        solved = coeffs is None
        if solved:
            coeffs = solve_coefficients(p, q, trunc_order, option, guard)
        rep.coefficients = coeffs
        rep.verified_order = verified_order_for(coeffs.max_finite, trunc_order, guard)
        if rep.verified_order < trunc_order // 2:
            rep.failed.append("verified_order")

        psis = build_psis(params, coeffs)
        for comp in Composition:
            res = mu2(psis, comp, params, trunc_order)
            val = min_valuation(res, trunc_order)
            rep.mu2_valuation[comp.value] = val
            rep.mu2[comp.value] = val >= rep.verified_order
            if not rep.mu2[comp.value]:
                rep.failed.append(f"mu2[{comp.value}]")

        rep.uvw_modu = uvw_modu_check(coeffs)
        rep.mod_u_kernel = mod_u_kernel_check(p, q, trunc_order)
        rep.hat_reduction = hat_reduction_check(psis)
        rep.incidence = incidence_check(params)
        zz = zigzag(params)
        rep.zigzag = zz.is_single_cycle() and set(zz.vertices) == special_indices(params)
        rep.conjugation = conjugation_check(params, trunc_order)
        rep.rank_a, rep.rank_b, rep.f_a_in_b = involution_rank_check(p, q, trunc_order)
        rep.product_constraint = all(not x for x in product_constraint_residual(coeffs))
        for name in ("uvw_modu", "mod_u_kernel", "hat_reduction", "incidence", "zigzag",
                     "conjugation", "f_a_in_b", "product_constraint"):
            if not getattr(rep, name):
                rep.failed.append(name)
        if rep.rank_a != rep.rank_b + 1:
            rep.failed.append("involution_ranks")

        if stability and solved:
            rep.stability = stability_check(p, q, trunc_order, option, guard)
            if not rep.stability:
                rep.failed.append("stability")
    except (SeriesError, AssertionError) as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        rep.failed.append("exception")
    rep.seconds = time.perf_counter() - start
    return rep


def stability_check(p: int, q: int, trunc_order: int = DEFAULT_TRUNC,
                    option: Option | str = Option.UNIT_U,
                    guard: int = DEFAULT_GUARD) -> bool:
    """Coefficients at N and 2N agree below order ``N - guard``."""
    lo = solve_coefficients(p, q, trunc_order, option, guard)
    hi = solve_coefficients(p, q, 2 * trunc_order, option, guard)
    order = trunc_order - guard
    for a, b in ((lo.v, hi.v), (lo.t, hi.t), (lo.u, hi.u), (lo.w, hi.w)):
        for x, y in zip(a, b):
            if x.truncate(order) != y.truncate(order):
                return False
    return True
