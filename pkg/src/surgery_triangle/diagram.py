"""Index-level combinatorics of the genus-one triangle diagram.

Everything here is expressed through integer labels: triangle indices ``n``,
residues ``i = n mod p`` and ``j = n mod q``, and pairs ``(i, l)``.  The two
basepoint counts ``z_n`` and ``n_{z(k)}`` are evaluated from closed-form
floor/ceiling sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterator


class NotCoprime(ValueError):
    pass


class InvalidParams(ValueError):
    pass


def _require_coprime(p: int, q: int) -> None:
    if p < 1 or q < 1:
        raise InvalidParams(f"p and q must be positive, got ({p}, {q})")
    if gcd(p, q) != 1:
        raise NotCoprime(f"p={p} and q={q} are not coprime")


def s_sequence(p: int, q: int) -> tuple[int, ...]:
    """The weakly decreasing sequence of floor/ceil(q/p) values summing to q."""
    _require_coprime(p, q)
    u, v = divmod(q, p)
    return tuple(u + 1 if i < v else u for i in range(p))


@dataclass(frozen=True)
class SlopeParams:
    p: int
    q: int
    k: int = 0
    qinv: int = field(init=False)
    s: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        _require_coprime(self.p, self.q)
        if not 0 <= self.k < self.p:
            raise InvalidParams(f"k must lie in 0..{self.p - 1}, got {self.k}")
        object.__setattr__(self, "qinv", pow(self.q, -1, self.p) if self.p > 1 else 0)
        object.__setattr__(self, "s", s_sequence(self.p, self.q))

    @property
    def c(self) -> tuple[int, ...]:
        """Block sizes at level k: ``c_i = s_{(i-k) mod p}``."""
        return tuple(self.s[(i - self.k) % self.p] for i in range(self.p))

    def with_k(self, k: int) -> "SlopeParams":
        return SlopeParams(self.p, self.q, k)


def index_set(c: tuple[int, ...]) -> list[tuple[int, int]]:
    """Pairs ``(i, l)`` with ``c_i != 0`` and ``0 <= l < c_i``, in lexicographic order."""
    return [(i, l) for i, ci in enumerate(c) for l in range(ci)]


def _floor_form(p: int, q: int, n: int) -> int:
    # z_{-n+p-1} for n >= 0
    total = 0
    t = 0
    while n - t * q >= p:
        total += (n - t * q) // p
        t += 1
    return total


def _ceil_form(p: int, q: int, n: int) -> int:
    # z_{n+p+q-1}, valid for n >= -p-q+1
    total = 0
    t = 0
    while n - t * q > 0:
        total += -((t * q - n) // p)
        t += 1
    return total


def z_count(p: int, q: int, n: int) -> int:
    """Number of basepoints covered by the n-th lifted triangle."""
    _require_coprime(p, q)
    if n <= p - 1:
        return _floor_form(p, q, p - 1 - n)
    return _ceil_form(p, q, n - (p + q - 1))


def z_floor_form(p: int, q: int, n: int) -> int:
    """``z_{-n+p-1}`` from the floor-sum expression (``n >= 0``)."""
    if n < 0:
        raise ValueError("floor form needs n >= 0")
    return _floor_form(p, q, n)


def z_ceil_form(p: int, q: int, n: int) -> int:
    """``z_{n+p+q-1}`` from the ceiling-sum expression (``n >= -p-q+1``)."""
    if n < -p - q + 1:
        raise ValueError("ceiling form needs n >= -p-q+1")
    return _ceil_form(p, q, n)


def nzk_count(params: SlopeParams, n: int) -> int:
    """Twisted basepoint count of the n-th lifted triangle at level k.

    Uses the row-by-row piecewise sums, where rows whose residue falls
    below k pick up (or lose) one extra basepoint.
    """
    p, q, k = params.p, params.q, params.k
    if n <= p - 1:
        m = p - 1 - n
        total = 0
        t = 0
        while m - t * q >= 0:
            x = m - t * q
            r = (-m - 1 + t * q) % p
            total += x // p + (1 if r < k else 0)
            t += 1
        return total
    if n <= p + q - 2:
        return 0
    m = n - (p + q - 1)
    total = 0
    t = 0
    while m - t * q > 0:
        x = m - t * q
        r = (m - 1 - t * q) % p
        total += max(-((-x) // p) - (1 if r < k else 0), 0)
        t += 1
    return total


def z_window(p: int, q: int, bound: int, shift: int = 0) -> range:
    """Indices n with ``z_{n - shift} < bound``, a contiguous range.

    Grown outwards from the zero region, which is sound because z is
    monotone on either side of it.
    """
    lo, hi = 0, p + q - 1
    if bound <= 0:
        return range(shift, shift)
    while z_count(p, q, lo - 1) < bound:
        lo -= 1
    while z_count(p, q, hi + 1) < bound:
        hi += 1
    return range(lo + shift, hi + shift + 1)


def special_indices(params: SlopeParams) -> set[int]:
    p, q, k = params.p, params.q, params.k
    lo, hi = min(p, q), max(p, q)
    return set(range(k, k + lo)) | set(range(k + hi, k + p + q))


@dataclass(frozen=True)
class TriangleLabel:
    """Label data of the lifted triangle with index n at a given level.

    The vertices of the lift shifted by ``d`` are ``theta[i, (d+l) mod c_i]``,
    ``xi[(j-p) mod q]`` and ``zeta[i, d]``.
    """

    n: int
    p: int
    q: int

    @property
    def i(self) -> int:
        return self.n % self.p

    @property
    def j(self) -> int:
        return self.n % self.q

    @property
    def l(self) -> int:
        return self.n // self.p

    @property
    def xi(self) -> int:
        return (self.j - self.p) % self.q

    def vertices(self, c: tuple[int, ...], d: int = 0):
        ci = c[self.i]
        if ci == 0:
            return None
        return ((self.i, (d + self.l) % ci), self.xi, (self.i, d % ci))


@dataclass(frozen=True)
class ZigZag:
    vertices: frozenset[int]
    h_edges: tuple[tuple[int, int], ...]
    l_edges: tuple[tuple[int, int], ...]
    k: int

    def cycles(self) -> list[list[int]]:
        """Connected components as vertex walks alternating H and L edges."""
        h = {}
        lmap = {}
        for a, b in self.h_edges:
            h.setdefault(a, []).append(b)
            h.setdefault(b, []).append(a)
        for a, b in self.l_edges:
            lmap.setdefault(a, []).append(b)
            lmap.setdefault(b, []).append(a)
        seen: set[int] = set()
        out = []
        for start in sorted(self.vertices):
            if start in seen:
                continue
            walk = [start]
            seen.add(start)
            cur, use_h = start, True
            while True:
                nbrs = (h if use_h else lmap).get(cur, [])
                if len(nbrs) != 1:
                    # degenerate or branching: bail out with what we have
                    break
                nxt = nbrs[0]
                use_h = not use_h
                if nxt == start:
                    break
                if nxt in seen:
                    break
                walk.append(nxt)
                seen.add(nxt)
                cur = nxt
            out.append(walk)
        return out

    def is_single_cycle(self) -> bool:
        if len(self.h_edges) != len(self.l_edges):
            return False
        hdeg: dict[int, int] = {}
        ldeg: dict[int, int] = {}
        for a, b in self.h_edges:
            hdeg[a] = hdeg.get(a, 0) + 1
            hdeg[b] = hdeg.get(b, 0) + 1
        for a, b in self.l_edges:
            ldeg[a] = ldeg.get(a, 0) + 1
            ldeg[b] = ldeg.get(b, 0) + 1
        if set(hdeg) != set(self.vertices) or set(ldeg) != set(self.vertices):
            return False
        if len(self.vertices) == 2 and len(self.h_edges) == 1:
            return True
        if any(v != 1 for v in hdeg.values()) or any(v != 1 for v in ldeg.values()):
            return False
        comps = self.cycles()
        return len(comps) == 1 and len(comps[0]) == len(self.vertices)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "vertices": sorted(self.vertices),
            "H": [list(e) for e in self.h_edges],
            "L": [list(e) for e in self.l_edges],
        }


def zigzag(params: SlopeParams) -> ZigZag:
    p, q, k, s = params.p, params.q, params.k, params.s
    lo, hi = max(p, q), p + q - 1
    h_edges = []
    l_edges = []
    for i in range(p):
        if s[i] == 0:
            continue
        h_edges.append((i + k, i + s[i] * p + k))
        t = lo + (i - lo) % q
        if t > hi:
            raise AssertionError(f"no L-edge endpoint for i={i}")
        l_edges.append((i + k, t + k))
    verts = frozenset(v for e in h_edges + l_edges for v in e)
    return ZigZag(verts, tuple(h_edges), tuple(l_edges), k)


def z_bijection(p: int, q: int) -> dict[int, int]:
    """``j -> (s_j p + j) mod q`` on ``{0, ..., min(p,q)-1}``."""
    s = s_sequence(p, q)
    m = min(p, q)
    perm = {j: (s[j] * p + j) % q for j in range(m)}
    if sorted(perm.values()) != list(range(m)):
        raise AssertionError(f"z-bijection is not a permutation for ({p},{q})")
    return perm


def orbits(perm: dict) -> list[list]:
    seen = set()
    out = []
    for x in sorted(perm):
        if x in seen:
            continue
        orb = []
        y = x
        while y not in seen:
            seen.add(y)
            orb.append(y)
            y = perm[y]
        out.append(orb)
    return out


def involution_labels(p: int, q: int) -> tuple[dict[tuple[int, int], tuple[int, int]], dict[int, int]]:
    """Row involution ``(i, l) -> (q-i-1 mod p, -l mod s_i)`` and column involution
    ``j -> -(j+p+1) mod q``."""
    s = s_sequence(p, q)
    rows = {}
    for i, l in index_set(s):
        ib = (q - i - 1) % p
        if s[ib] != s[i]:
            raise AssertionError(f"s_{i} != s_{ib} for ({p},{q})")
        rows[(i, l)] = (ib, (-l) % s[i])
    cols = {j: (-(j + p + 1)) % q for j in range(q)}
    return rows, cols


def middle_pair(p: int, q: int) -> tuple[int, int] | None:
    """``(i0, l0)`` with ``(p+q-1)/2 = l0*p + i0`` when p+q is odd, else None."""
    if (p + q) % 2 == 0:
        return None
    l0, i0 = divmod((p + q - 1) // 2, p)
    return i0, l0


def iter_coprime(bound: int, min_sum: int = 2) -> Iterator[tuple[int, int]]:
    """Coprime pairs with ``p + q <= bound`` ordered by (p+q, p)."""
    for total in range(min_sum, bound + 1):
        for p in range(1, total):
            q = total - p
            if gcd(p, q) == 1:
                yield p, q


def iter_sweep(bound: int) -> Iterator[SlopeParams]:
    """Every ``(p, q, k)`` with p, q coprime, ``p+q <= bound``, ordered by (p+q, p, k)."""
    for p, q in iter_coprime(bound):
        for k in range(p):
            yield SlopeParams(p, q, k)
