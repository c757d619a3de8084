import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankbridge import (
    BadIndex,
    CPDecomposition,
    DenseTensor,
    FieldSpec,
    LinearFunctional,
    PureTensor,
    ShapeMismatch,
    basis_vector,
    contract,
    contract_mode,
    expand,
    flatten,
    matrix_rank,
)
from rankbridge.tensor import contract_decomposition, flattening_ranks
from conftest import GOLDEN, bfs_rank, gf2_span_rank

GF2 = FieldSpec.gf(2)
Q = FieldSpec.rational()


@pytest.mark.parametrize(
    "dim, index, expected",
    [(3, 2, [0, 1, 0]), (1, 1, [1]), (5, 5, [0, 0, 0, 0, 1])],
)
def test_basis_vector(dim, index, expected):
    assert basis_vector(dim, index).tolist() == expected


@pytest.mark.parametrize("dim, index", [(3, 0), (3, 4), (0, 1)])
def test_basis_vector_bad_index(dim, index):
    with pytest.raises(BadIndex):
        basis_vector(dim, index)


def test_expand_empty_is_zero():
    assert expand(CPDecomposition((2, 2), Q)) == DenseTensor.zeros((2, 2), Q)


def test_expand_single_outer_product():
    dec = CPDecomposition.from_factors(Q, (2, 2), [([1, 1], [1, -1])])
    assert expand(dec).tolist() == [[1, -1], [1, -1]]


def test_expand_golden_rank_one_matrix():
    dec = CPDecomposition.from_factors(Q, (3, 3), [([1, 1, 2], [2, 3, 1])])
    assert expand(dec).tolist() == GOLDEN


def test_expand_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        CPDecomposition.from_factors(Q, (2, 2), [([1, 1], [1, 1, 1])])


def test_matrix_rank_examples():
    assert matrix_rank(DenseTensor(GOLDEN, Q)) == 1
    assert matrix_rank(DenseTensor.zeros((3, 3), Q)) == 0
    assert matrix_rank(DenseTensor(np.eye(4, dtype=int), GF2)) == 4
    with pytest.raises(ShapeMismatch):
        matrix_rank(DenseTensor(np.zeros((2, 2, 2), dtype=int), GF2))


def test_flatten_order_two_is_identity():
    M = DenseTensor([[1, 2, 3], [4, 5, 6]], Q)
    assert flatten(M, 1) == M


def test_flatten_mode_three():
    e1, e2 = [1, 0], [0, 1]
    dec = CPDecomposition.from_factors(GF2, (2, 2, 2), [(e1, e1, e1), (e2, e2, e2)])
    F = flatten(expand(dec), 3)
    assert F.tolist() == [[1, 0, 0, 0], [0, 0, 0, 1]]
    with pytest.raises(BadIndex):
        flatten(expand(dec), 4)


def test_flatten_columns_are_row_major_over_remaining_modes():
    T = DenseTensor(np.arange(24).reshape(2, 3, 4), Q)
    F = flatten(T, 2)
    # column index for (i1, i3) is i1 * 4 + i3
    assert F[2, 1 * 4 + 3 + 1] == T[2, 2, 4]


def test_flattening_bounds_exact_rank_on_all_gf2_2x2x2():
    for bits in itertools.product(range(2), repeat=8):
        T = DenseTensor(np.array(bits).reshape(2, 2, 2), GF2)
        assert max(flattening_ranks(T)) <= bfs_rank(T)


def test_contract_dual_of_e1():
    T = DenseTensor(np.outer([1, 0], [0, 1]), Q)
    out = contract_mode(T, 1, LinearFunctional.dual_basis(2, 1, Q))
    assert out.tolist() == [0, 1]


def test_contract_shape_checks():
    T = DenseTensor(np.zeros((2, 3), dtype=int), Q)
    with pytest.raises(ShapeMismatch):
        contract_mode(T, 1, LinearFunctional([1, 0, 0], Q))
    with pytest.raises(BadIndex):
        contract_mode(T, 3, LinearFunctional([1, 0], Q))


def test_dense_tensor_validation():
    with pytest.raises(ShapeMismatch):
        DenseTensor([1, 2, 3], Q, shape=(2, 2))
    T = DenseTensor([1, 2, 3, 4], Q, shape=(2, 2))
    assert T.entries.tolist() == [1, 2, 3, 4] and T[2, 1] == 3
    with pytest.raises(BadIndex):
        T[3, 1]


def test_gf2_order_two_exact_rank_matches_span_rank():
    for n, m in [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2)]:
        for bits in itertools.product(range(2), repeat=n * m):
            M = np.array(bits).reshape(n, m)
            T = DenseTensor(M, GF2)
            assert matrix_rank(T) == gf2_span_rank(M) == bfs_rank(T)


def _random_dec(rng, field, shape, r):
    return CPDecomposition.from_factors(
        field, shape, [[rng.integers(0, field.p, size=m) for m in shape] for _ in range(r)]
    )


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 7]), st.integers(0, 4), st.integers(0, 4))
def test_expand_is_linear(seed, p, r1, r2):
    rng = np.random.default_rng(seed)
    F = FieldSpec.gf(p)
    shape = (2, 3, 2)
    d1, d2 = _random_dec(rng, F, shape, r1), _random_dec(rng, F, shape, r2)
    assert expand(d1 + d2) == expand(d1) + expand(d2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 4))
def test_contract_commutes_with_expand(seed, mode, r):
    rng = np.random.default_rng(seed)
    F = FieldSpec.gf(5)
    shape = (2, 3, 4)
    dec = _random_dec(rng, F, shape, r)
    phi = LinearFunctional(rng.integers(0, 5, size=shape[mode - 1]), F)
    assert contract_mode(expand(dec), mode, phi) == expand(contract_decomposition(dec, mode, phi))


def test_contract_multiple_modes_rational():
    rng = np.random.default_rng(1)
    T = DenseTensor(rng.integers(-3, 4, size=(2, 3, 4)), Q)
    h = LinearFunctional(rng.integers(-3, 4, size=(2, 3)), Q)
    out = contract(T, h, [1, 2])
    want = [sum(h.coefficients[i, j] * T.data[i, j, k] for i in range(2) for j in range(3)) for k in range(4)]
    assert out.tolist() == want
