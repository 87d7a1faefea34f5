"""Local systems on the three attaching curves and the model module E_{p,q,k}.

All monodromies here are generalized permutation matrices whose nonzero
entries are 1 or U, stored as ``SeriesMatrix`` with the convention that
column ``i`` holds the image of the i-th basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .diagram import SlopeParams
from .useries import DEFAULT_TRUNC, SeriesMatrix

U_BITS = 2  # the series U as a bit set


def u_sequence(params: SlopeParams) -> tuple[int, ...]:
    """Exponents (0 or 1) of the entries ``u_i`` of the infinity-slope monodromy."""
    p, k, qinv = params.p, params.k, params.qinv
    u = [0] * p
    for i in range(k):
        u[(-i * qinv - 1) % p] = 1
    return tuple(u)


def uc_sequences(params: SlopeParams) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """``u`` as strings "1"/"U" together with the block sizes ``c``."""
    u = tuple("U" if e else "1" for e in u_sequence(params))
    return u, params.c


@dataclass(frozen=True)
class LocalSystem:
    rank: int
    monodromy: SeriesMatrix
    label: str

    def u_positions(self) -> list[int]:
        """Columns whose nonzero entry is U."""
        out = []
        for c in range(self.rank):
            for r in range(self.rank):
                if self.monodromy.raw[r][c] == U_BITS:
                    out.append(c)
        return out


def _gen_perm(p: int, target: list[int], weight: list[int], n: int) -> SeriesMatrix:
    data = [[0] * p for _ in range(p)]
    for i in range(p):
        data[target[i]][i] = U_BITS if weight[i] else 1
    return SeriesMatrix(data, n, p)


def monodromy_infinity(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> LocalSystem:
    """``y_i -> u_i y_{i+1}``."""
    p = params.p
    u = u_sequence(params)
    mat = _gen_perm(p, [(i + 1) % p for i in range(p)], list(u), trunc_order)
    return LocalSystem(p, mat, "infinity")


def monodromy_zero_blocks(params: SlopeParams) -> dict[tuple[int, int], tuple[int, int]]:
    """Zero-slope monodromy as an index map ``x_{i,l} -> x_{i,l+1 mod c_i}``."""
    c = params.c
    return {(i, l): (i, (l + 1) % ci) for i, ci in enumerate(c) for l in range(ci)}


@dataclass(frozen=True)
class ModelModule:
    params: SlopeParams
    monodromy: SeriesMatrix

    @property
    def rank(self) -> int:
        return self.params.p


def model_module(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> ModelModule:
    """``e_i -> U e_{i+q}`` when ``(i+q) mod p < k``, else ``e_{i+q}``."""
    p, q, k = params.p, params.q, params.k
    target = [(i + q) % p for i in range(p)]
    weight = [1 if t < k else 0 for t in target]
    return ModelModule(params, _gen_perm(p, target, weight, trunc_order))


def phi_permutation(params: SlopeParams) -> list[int]:
    """Image index of ``y_i`` under ``y_i -> e_{(q i + k - 1) mod p}``."""
    p, q, k = params.p, params.q, params.k
    return [(q * i + k - 1) % p for i in range(p)]


def _perm_matrix(images: list[int], n: int) -> SeriesMatrix:
    p = len(images)
    data = [[0] * p for _ in range(p)]
    for i, t in enumerate(images):
        data[t][i] = 1
    return SeriesMatrix(data, n, p)


def recover_isomorphism_check(params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> bool:
    """Whether conjugating the infinity monodromy by the index permutation gives φ_{p,q,k}."""
    P = _perm_matrix(phi_permutation(params), trunc_order)
    lhs = P @ monodromy_infinity(params, trunc_order).monodromy @ P.transpose()
    return lhs == model_module(params, trunc_order).monodromy


def generalized_inverse_times_u(mat: SeriesMatrix) -> SeriesMatrix:
    """``U * mat^-1`` for a generalized permutation matrix with entries 1 or U."""
    n = mat.rows
    data = [[0] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            x = mat.raw[r][c]
            if x == 1:
                data[c][r] = U_BITS
            elif x == U_BITS:
                data[c][r] = 1
            elif x:
                raise ValueError("entries must be 1 or U")
    return SeriesMatrix(data, mat.trunc_order, n)


def grading_exponents_raw(params: SlopeParams) -> tuple[Fraction, ...]:
    """``m_0 = 0``, ``m_{i+1} = m_i + k/p``, minus one whenever ``u_i = U``."""
    p, k = params.p, params.k
    u = u_sequence(params)
    m = [Fraction(0)]
    for i in range(p - 1):
        m.append(m[-1] + Fraction(k, p) - u[i])
    closing = m[-1] + Fraction(k, p) - u[p - 1]
    if closing != 0:
        raise AssertionError(f"grading recursion does not close up for {params}")
    return tuple(m)


def grading_exponents(params: SlopeParams) -> tuple[Fraction, ...]:
    """Grading exponents ``m'_i = m_i - min m`` attached to ``y_i``."""
    m = grading_exponents_raw(params)
    low = min(m)
    return tuple(x - low for x in m)


def grading_exponents_model(params: SlopeParams) -> tuple[Fraction, ...]:
    """The same exponents transported to the basis ``e_i`` of E_{p,q,k}."""
    mp = grading_exponents(params)
    out = [Fraction(0)] * params.p
    for i, t in enumerate(phi_permutation(params)):
        out[t] = mp[i]
    return tuple(out)


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
