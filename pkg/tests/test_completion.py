import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankbridge import (
    AffineTensorSpace,
    DenseTensor,
    DependentGenerators,
    FieldSpec,
    PartialMatrix,
    PureTensor,
    ShapeMismatch,
    ValidationError,
    apply_completion,
    membership,
    to_affine_space,
    validate_generators,
)
from rankbridge.completion import completion_from_lambdas, known_positions_match
from rankbridge.exact import random_affine_space
from conftest import GOLDEN, GOLDEN_LAMBDAS, worked_partial

GF2 = FieldSpec.gf(2)


def test_worked_affine_space(worked):
    S = to_affine_space(worked)
    assert S.s == 4
    assert S.base.tolist() == [[2, 0, 0], [2, 3, 0], [0, 6, 2]]
    # unknowns in row-major order: (1,2), (1,3), (2,3), (3,1)
    assert S.generators[0].to_dense().tolist() == [[0, 1, 0], [0, 0, 0], [0, 0, 0]]
    assert S.generators[3].to_dense().tolist() == [[0, 0, 0], [0, 0, 0], [1, 0, 0]]


def test_golden_membership(worked):
    S = to_affine_space(worked)
    B = DenseTensor(GOLDEN, S.field)
    assert membership(S, B) == GOLDEN_LAMBDAS
    assert apply_completion(S, GOLDEN_LAMBDAS) == B
    C = completion_from_lambdas(S, GOLDEN_LAMBDAS)
    assert C.achieved_rank == 1
    assert known_positions_match(worked, B)


def test_membership_rejects_wrong_known_entry(worked):
    S = to_affine_space(worked)
    bad = [row[:] for row in GOLDEN]
    bad[0][0] = 5
    assert membership(S, DenseTensor(bad, S.field)) is None
    assert not known_positions_match(worked, DenseTensor(bad, S.field))


def test_no_unknowns():
    P = PartialMatrix.from_array([[1, 0], [0, 1]], GF2)
    S = to_affine_space(P)
    assert S.s == 0
    assert apply_completion(S, []) == S.base
    assert membership(S, S.base) == []


def test_dependent_generators_over_gf2():
    # (1,1)⊗(1,1) has off-diagonal support, so these three are independent;
    # repeating a generator or rescaling one is not
    gens = [
        PureTensor([[1, 0], [1, 0]], GF2),
        PureTensor([[0, 1], [0, 1]], GF2),
        PureTensor([[1, 1], [1, 1]], GF2),
    ]
    S = AffineTensorSpace(DenseTensor.zeros((2, 2), GF2), gens)
    validate_generators(S)
    with pytest.raises(DependentGenerators):
        AffineTensorSpace(DenseTensor.zeros((2, 2), GF2), gens + [PureTensor([[1, 1], [1, 1]], GF2)])
    with pytest.raises(DependentGenerators):
        AffineTensorSpace(
            DenseTensor.zeros((2, 2), FieldSpec.gf(3)),
            [PureTensor([[1, 0], [1, 0]], FieldSpec.gf(3)), PureTensor([[2, 0], [1, 0]], FieldSpec.gf(3))],
        )


def test_partial_matrix_validation():
    with pytest.raises(ValidationError):
        PartialMatrix((2, 2), {(1, 1): 1}, [(1, 2)], GF2)  # two positions unaccounted for
    with pytest.raises(ValidationError):
        PartialMatrix((1, 2), {(1, 1): 1}, [(1, 1), (1, 2)], GF2)
    with pytest.raises(ValidationError):
        PartialMatrix((1, 2), {(1, 1): 1}, [(1, 3)], GF2)
    with pytest.raises(ShapeMismatch):
        apply_completion(to_affine_space(worked_partial()), [1, 2])


def test_partial_tensor_of_order_three():
    P = PartialMatrix.from_array([[[1, None], [0, 1]], [[None, 0], [1, 1]]], GF2)
    S = to_affine_space(P)
    assert S.shape == (2, 2, 2) and S.s == 2
    assert apply_completion(S, [1, 1]).tolist() == [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]), st.integers(0, 3))
def test_membership_inverts_apply(seed, p, s):
    rng = np.random.default_rng(seed)
    F = FieldSpec.gf(p)
    S = random_affine_space(rng, (2, 3), F, s)
    lam = [int(x) for x in rng.integers(0, p, size=s)]
    assert membership(S, apply_completion(S, lam)) == lam


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_apply_completion_real_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    R = FieldSpec.real()
    A = rng.standard_normal((3, 3))
    unknown = [(1, 2), (3, 1)]
    known = {(i, j): A[i - 1, j - 1] for i in range(1, 4) for j in range(1, 4) if (i, j) not in unknown}
    S = to_affine_space(PartialMatrix((3, 3), known, unknown, R))
    lam = rng.standard_normal(2)
    want = A.copy()
    want[0, 1], want[2, 0] = lam
    assert np.allclose(apply_completion(S, list(lam)).data, want, atol=1e-14)
    assert np.allclose(membership(S, DenseTensor(want, R)), lam)
