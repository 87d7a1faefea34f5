import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import convolve, naive_matmul
from surgery_triangle.useries import (
    AmbiguousKernel,
    NoKernel,
    NotAUnit,
    Series,
    SeriesMatrix,
    TruncationMismatch,
    kernel_generator,
    series_inverse,
    series_mul,
    smith_normal_form,
)

N = 64


def S(*exps, n=N):
    return Series.from_exponents(exps, n)


def series_st(n=N):
    return st.integers(min_value=0, max_value=(1 << n) - 1).map(lambda b: Series(b, n))


def unit_st(n=N):
    return st.integers(min_value=0, max_value=(1 << (n - 1)) - 1).map(lambda b: Series(2 * b + 1, n))


def test_square_of_one_plus_u():
    assert series_mul(S(0, 1), S(0, 1)) == S(0, 2)


def test_one_is_identity():
    x = S(0, 3, 17, 63)
    assert S(0) * x == x


def test_geometric_series():
    geo = Series((1 << N) - 1, N)
    assert S(0, 1) * geo == S(0)
    assert convolve(S(0, 1), geo) == S(0)


def test_inverse_examples():
    assert series_inverse(S(0)) == S(0)
    assert series_inverse(S(0, 1)) == Series((1 << N) - 1, N)
    with pytest.raises(NotAUnit):
        series_inverse(S(1))


def test_mismatched_truncation():
    with pytest.raises(TruncationMismatch):
        S(0, n=8) * S(0, n=16)
    with pytest.raises(TruncationMismatch):
        S(0, n=8) + S(0, n=16)


def test_exponents_and_json():
    x = S(5, 0, 12)
    assert x.coeffs == (0, 5, 12)
    assert x.to_json() == [0, 5, 12]
    assert S(3, 3).bits == 0
    assert S(70).bits == 0
    assert x.valuation() == 0 and S().valuation() == N
    assert str(S(0, 1, 4)) == "1+U+U^4"


@given(series_st(), series_st())
def test_mul_matches_convolution(a, b):
    assert a * b == convolve(a, b)


@given(series_st(), series_st(), series_st())
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + a == Series.zero(N)


@given(unit_st())
def test_inverse_property(a):
    assert a * a.inverse() == Series.one(N)


@given(st.integers(min_value=1, max_value=130), st.data())
def test_inverse_any_order(n, data):
    b = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    a = Series(b | 1, n)
    assert a * a.inverse() == Series.one(n)


def _rand_matrix(rng, rows, cols, n, density=0.7, maxbits=None):
    maxbits = maxbits or n
    return SeriesMatrix(
        [[rng.getrandbits(maxbits) if rng.random() < density else 0 for _ in range(cols)]
         for _ in range(rows)], n, cols)


def _check_snf(M):
    res = smith_normal_form(M)
    assert res.S @ res.diagonal_matrix() @ res.T == M
    n = M.trunc_order
    I_r = SeriesMatrix.identity(M.rows, n)
    I_c = SeriesMatrix.identity(M.cols, n)
    assert res.T @ res.T_inv == I_c and res.T_inv @ res.T == I_c
    # S is invertible iff its reduction mod U is
    from surgery_triangle.useries import gf2_rank
    assert gf2_rank(res.S.mod_u()) == M.rows
    assert list(res.D) == sorted(res.D)
    assert all(0 <= v <= n for v in res.D)
    assert I_r.rows == M.rows
    return res


def test_snf_examples():
    assert smith_normal_form(SeriesMatrix.identity(3, N)).D == (0, 0, 0)
    res = _check_snf(SeriesMatrix([[2, 0], [0, 1]], N))
    assert res.D == (0, 1)
    res = _check_snf(SeriesMatrix([[1, 1], [1, 1]], N))
    assert res.D == (0, N)


def test_snf_random_reconstruction():
    rng = random.Random(7)
    for _ in range(150):
        rows, cols = rng.randint(1, 8), rng.randint(1, 8)
        n = rng.choice([8, 16, 32, 64])
        M = _rand_matrix(rng, rows, cols, n, density=rng.random())
        _check_snf(M)


def test_snf_high_valuation_matrices():
    rng = random.Random(11)
    for _ in range(60):
        size = rng.randint(1, 6)
        # entries divisible by various powers of U
        M = SeriesMatrix([[rng.getrandbits(16) << rng.randint(0, 6) for _ in range(size)]
                          for _ in range(size)], 32, size)
        _check_snf(M)


def test_snf_valuations_match_naive_products():
    rng = random.Random(3)
    M = _rand_matrix(rng, 4, 5, 16)
    res = smith_normal_form(M)
    assert naive_matmul(naive_matmul(res.S, res.diagonal_matrix()), res.T) == M


def test_kernel_examples():
    assert [x.bits for x in kernel_generator(SeriesMatrix([[0]], N))] == [1]
    v = kernel_generator(SeriesMatrix([[1, 1], [1, 1]], N))
    assert [x.bits for x in v] == [1, 1]
    with pytest.raises(NoKernel):
        kernel_generator(SeriesMatrix([[1]], N))
    with pytest.raises(AmbiguousKernel):
        kernel_generator(SeriesMatrix.zeros(2, 2, N))


def test_kernel_not_square():
    from surgery_triangle.useries import SeriesError
    with pytest.raises(SeriesError):
        kernel_generator(SeriesMatrix.zeros(2, 3, N))


def _random_invertible(rng, size, n):
    while True:
        M = _rand_matrix(rng, size, size, n)
        from surgery_triangle.useries import gf2_rank
        if gf2_rank(M.mod_u()) == size:
            return M


def test_kernel_contract_random_singular():
    rng = random.Random(5)
    n = 64
    for _ in range(80):
        size = rng.randint(1, 7)
        A = _random_invertible(rng, size, n)
        B = _random_invertible(rng, size, n)
        diag = [rng.randint(0, 5) for _ in range(size - 1)] + [None]
        rng.shuffle(diag)
        D = SeriesMatrix([[0 if (i != j or diag[i] is None) else 1 << diag[i]
                           for j in range(size)] for i in range(size)], n, size)
        M = A @ D @ B
        v = kernel_generator(M)
        res = smith_normal_form(M)
        assert any(x.bits & 1 for x in v)
        order = n - max(res.max_finite(), 0)
        for x in M.apply(v):
            assert x.truncate(order).bits == 0
