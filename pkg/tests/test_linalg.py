import itertools
from fractions import Fraction

import numpy as np
import pytest

from rankbridge import FieldSpec, linalg
from conftest import gf2_span_rank


def test_gf2_rank_matches_span_enumeration():
    rng = np.random.default_rng(7)
    F = FieldSpec.gf(2)
    for _ in range(200):
        shape = tuple(rng.integers(1, 5, size=2))
        M = rng.integers(0, 2, size=shape)
        assert linalg.rank(M, F) == gf2_span_rank(M)


def test_rational_rank_matches_determinant_minors():
    # rank = largest k with a nonzero k x k minor, computed with sympy as an independent route
    import sympy

    rng = np.random.default_rng(3)
    Q = FieldSpec.rational()
    for _ in range(40):
        M = rng.integers(-2, 3, size=(3, 4))
        M[2] = M[0] + 2 * M[1] if rng.random() < 0.5 else M[2]
        assert linalg.rank(M, Q) == sympy.Matrix(M.tolist()).rank()


def test_solve_and_inconsistency():
    F = FieldSpec.gf(5)
    A = [[1, 2], [3, 4]]
    x = linalg.solve(A, [1, 1], F)
    assert np.array_equal((np.array(A) @ x) % 5, [1, 1])
    assert linalg.solve([[1, 1], [1, 1]], [0, 1], F) is None


def test_inverse_rational():
    Q = FieldSpec.rational()
    inv = linalg.inverse([[2, 1], [1, 1]], Q)
    assert inv.tolist() == [[1, -1], [-1, 2]]
    assert linalg.inverse([[1, 2], [2, 4]], Q) is None


def test_real_rank_uses_relative_threshold():
    R = FieldSpec.real(1e-9)
    u = np.array([1.0, 2.0, 3.0])
    assert linalg.rank(np.outer(u, u) + 1e-12 * np.eye(3), R) == 1
    assert linalg.rank(np.outer(u, u) + 1e-6 * np.eye(3), R) == 3


def test_prime_echelon_membership():
    ech = linalg.PrimeEchelon(3)
    assert ech.add(np.array([1, 2, 0]))
    assert ech.add(np.array([0, 1, 1]))
    assert not ech.add(np.array([2, 1, 0]))
    assert ech.contains(np.array([1, 0, 1]))  # [1,2,0] + [0,1,1] mod 3
    assert not ech.contains(np.array([0, 0, 1]))
    assert ech.extended(np.array([1, 0, 1])) is None
