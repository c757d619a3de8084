"""Lifting an affine space ``A + U`` to a tensor whose rank is ``rank(A, U) + s``.

Two lifts are provided:

* :func:`build_hat` appends one mode of size ``s + 1``; slot ``k`` holds
  generator ``k`` and the last slot holds ``A``.
* :func:`build_tilde` appends ``s`` modes of size 2; the all-first pattern
  holds ``A`` and the pattern with a single second index in position ``k``
  holds generator ``k``.

:func:`embed_completion` turns a completion with an ``r``-term decomposition
into an ``(r + s)``-term decomposition of the hat tensor, and
:func:`extract_completion` goes the other way: any exact ``l``-term
decomposition of the hat tensor yields a completion of rank at most
``l - s``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .completion import AffineTensorSpace, Completion, apply_completion, validate_generators
from .errors import InconsistentDecomposition, ShapeMismatch, SpanningFailure
from .fields import FieldSpec
from .tensor import (
    CPDecomposition,
    DenseTensor,
    LinearFunctional,
    PureTensor,
    basis_vector,
    contract,
    expand,
    matrix_rank,
)

# refuse real basis systems worse conditioned than this
MAX_CONDITION = 1e12


@dataclass(eq=False)
class HatTensor:
    tensor: DenseTensor
    source: AffineTensorSpace

    @property
    def s(self) -> int:
        return self.source.s


@dataclass(eq=False)
class TildeTensor:
    tensor: DenseTensor
    source: AffineTensorSpace

    @property
    def s(self) -> int:
        return self.source.s


def build_hat(S: AffineTensorSpace) -> HatTensor:
    """``A ⊗ e_{s+1} + sum_k g_k ⊗ e_k`` of shape ``S.shape + (s + 1,)``."""
    validate_generators(S)
    field = S.field
    s = S.s
    data = field.zeros(S.shape + (s + 1,))
    for k, g in enumerate(S.generators):
        data[..., k] = g.to_dense().data
    data[..., s] = S.base.data
    return HatTensor(DenseTensor(data, field), S)


def tilde_pattern(k: int, s: int) -> tuple:
    """0-based trailing index of ``t_k`` (1-based ``k``; ``k = s + 1`` is the all-first pattern)."""
    return tuple(1 if j == k - 1 else 0 for j in range(s))


def build_tilde(S: AffineTensorSpace) -> TildeTensor:
    """``sum_k g_k ⊗ t_k + A ⊗ t_{s+1}`` in ``V ⊗ (F^2)^{⊗s}``; equals ``A`` when ``s = 0``."""
    validate_generators(S)
    field = S.field
    s = S.s
    data = field.zeros(S.shape + (2,) * s)
    lead = (slice(None),) * len(S.shape)
    for k, g in enumerate(S.generators, start=1):
        data[lead + tilde_pattern(k, s)] = g.to_dense().data
    data[lead + tilde_pattern(s + 1, s)] = S.base.data
    return TildeTensor(DenseTensor(data, field), S)


def _check_expands_to(dec: CPDecomposition, target: DenseTensor, what: str, tol=None):
    if dec.shape != target.shape:
        raise InconsistentDecomposition(f"{what}: decomposition shape {dec.shape} != {target.shape}")
    if dec.field != target.field:
        raise InconsistentDecomposition(f"{what}: decomposition over {dec.field}, tensor over {target.field}")
    if not target.field.arrays_equal(expand(dec).data, target.data, tol=tol):
        raise InconsistentDecomposition(f"{what}: decomposition does not expand to the tensor")


def embed_completion(S: AffineTensorSpace, C: Completion, dec_B: CPDecomposition) -> CPDecomposition:
    """An ``(r + s)``-term decomposition of the hat tensor from an ``r``-term one of ``C.matrix``.

    Each term ``x ⊗ y`` of ``dec_B`` becomes ``x ⊗ y ⊗ e_{s+1}`` and each
    generator ``g_k`` becomes ``g_k ⊗ (e_k - lambda_k e_{s+1})``.
    """
    field = S.field
    s = S.s
    if len(C.lambdas) != s:
        raise ShapeMismatch(f"completion has {len(C.lambdas)} coefficients, space has {s} generators")
    if not field.arrays_equal(apply_completion(S, C.lambdas).data, C.matrix.data):
        raise InconsistentDecomposition("completion matrix is not base + sum lambda_k g_k")
    _check_expands_to(dec_B, C.matrix, "embed_completion")

    last = basis_vector(s + 1, s + 1, field)
    terms = [PureTensor(list(t.factors) + [last], field) for t in dec_B.terms]
    for k, (g, lam) in enumerate(zip(S.generators, C.lambdas), start=1):
        c = field.reduce(basis_vector(s + 1, k, field) - field.scalar(lam) * last)
        terms.append(PureTensor(list(g.factors) + [c], field))
    return CPDecomposition(S.shape + (s + 1,), field, terms)


def dual_functionals(S: AffineTensorSpace) -> list:
    """Functionals ``h_i`` on the base space with ``h_i(g_j) = 1 if i == j else 0``.

    Picks ``s`` pivot coordinates of the generator matrix ``G`` and inverts
    the square submatrix there; for standard-basis generators this is the
    coordinate projection onto the unknown slots.
    """
    field = S.field
    s = S.s
    if s == 0:
        return []
    G = S.generator_matrix()
    _, pivots = linalg.rref(G, field)
    if len(pivots) < s:
        raise SpanningFailure("generators are dependent; no dual functionals exist")
    P_inv = linalg.inverse(G[:, pivots], field)
    H = field.zeros(G.shape)
    H[:, pivots] = P_inv.T
    return [LinearFunctional(H[i], field, S.shape) for i in range(s)]


def _third_factor_matrix(dec: CPDecomposition) -> np.ndarray:
    """``(s + 1) x l`` matrix whose columns are the last-mode factors ``c_j``."""
    if not dec.terms:
        return dec.field.zeros((dec.shape[-1], 0))
    return np.stack([t.factors[-1] for t in dec.terms], axis=1)


def _select_basis(C: np.ndarray, s: int, field: FieldSpec):
    """Indices ``j_1 < ... < j_s`` with ``c_{j_1}, ..., c_{j_s}, e_{s+1}`` a basis of ``F^{s+1}``.

    Exact fields take the greedy (lexicographically first) choice. Over the
    reals a near-fit can make almost-dependent columns look independent, so
    every combination is scored by the condition number of its
    column-normalized basis matrix; the best one wins, provided it is below
    ``MAX_CONDITION`` (ties go to the lexicographically first).
    """
    l = C.shape[1]
    last = basis_vector(s + 1, s + 1, field)
    if field.is_prime:
        ech = linalg.PrimeEchelon(field.p)
        ech.add(last.copy())
        chosen = []
        for j in range(l):
            if len(chosen) == s:
                break
            if ech.add(C[:, j].copy()):
                chosen.append(j)
        return chosen if len(chosen) == s else None
    if field.is_exact:
        chosen = []
        current = last[:, None]
        for j in range(l):
            if len(chosen) == s:
                break
            trial = np.concatenate([current, C[:, j : j + 1]], axis=1)
            if linalg.rank(trial, field) == trial.shape[1]:
                current = trial
                chosen.append(j)
        return chosen if len(chosen) == s else None
    best, best_cond = None, MAX_CONDITION
    for combo in itertools.combinations(range(l), s):
        M = np.column_stack([C[:, list(combo)], last]) if s else last[:, None]
        norms = np.linalg.norm(M, axis=0)
        if np.any(norms == 0):
            continue
        cond = np.linalg.cond(M / norms)
        if cond < best_cond:
            best, best_cond = list(combo), cond
    return best


def extract_completion(S: AffineTensorSpace, dec: CPDecomposition, tol: float | None = None) -> Completion:
    """Recover a completion of rank at most ``len(dec) - s`` from a decomposition of the hat tensor.

    ``tol`` overrides the field tolerance for the real-field consistency
    checks and is ignored over exact fields. The returned completion carries
    ``lambdas`` (with ``matrix == apply_completion(S, lambdas)``) and the
    decomposition of the matrix made of the terms that survive the
    projection.
    """
    field = S.field
    s = S.s
    hat = build_hat(S)
    _check_expands_to(dec, hat.tensor, "extract_completion", tol=tol)
    l = len(dec)
    if l < s:
        raise InconsistentDecomposition(f"decomposition has {l} terms but the hat tensor has rank >= {s}")
    d = len(S.shape)
    base_modes = list(range(1, d + 1))
    C = _third_factor_matrix(dec)

    # (h_i ⊗ id)(A_hat) = e_i + h_i(A) e_{s+1} = sum_j h_i(a_j ⊗ b_j) c_j
    for i, h in enumerate(dual_functionals(S), start=1):
        lhs = contract(hat.tensor, h, base_modes).data
        want = field.reduce(basis_vector(s + 1, i, field) + h(S.base) * basis_vector(s + 1, s + 1, field))
        weights = field.array([h(PureTensor(t.factors[:-1], field)) for t in dec.terms])
        rhs = field.tensordot(C, weights, axes=1) if l else field.zeros(s + 1)
        if not (field.arrays_equal(lhs, want, tol=tol) and field.arrays_equal(rhs, want, tol=tol)):
            raise SpanningFailure(f"e_{i} is not reproduced by the h_{i} contraction")

    chosen = _select_basis(C, s, field)
    if chosen is None:
        raise SpanningFailure("third-mode factors together with e_{s+1} do not span F^{s+1}")

    # f vanishes on the chosen c_j and takes the value 1 on e_{s+1}
    last = basis_vector(s + 1, s + 1, field)
    M = np.column_stack([C[:, chosen], last]) if s else last[:, None]
    rhs = field.zeros(s + 1)
    rhs[s] = field.one
    if field.is_exact:
        f = linalg.solve(M.T, rhs, field)
        if f is None:
            raise SpanningFailure("basis system is singular")
    else:
        f = np.linalg.solve(M.T, rhs)
    weights = field.tensordot(f, C, axes=1) if l else field.zeros(0)
    if not field.is_exact:
        weights[chosen] = 0.0
    lambdas = [field.scalar(f[k]) for k in range(s)]

    terms = []
    for j, t in enumerate(dec.terms):
        w = weights[j]
        if j in chosen or field.is_zero(w):
            continue
        head = list(t.factors[:-1])
        head[0] = field.reduce(head[0] * w)
        terms.append(PureTensor(head, field))
    dec_B = CPDecomposition(S.shape, field, terms)
    B = apply_completion(S, lambdas)
    if not field.arrays_equal(expand(dec_B).data, B.data, tol=tol):
        raise InconsistentDecomposition("projected decomposition disagrees with base + sum lambda_k g_k")
    achieved = matrix_rank(B) if d == 2 else len(terms)
    return Completion(lambdas, B, achieved, dec_B)
