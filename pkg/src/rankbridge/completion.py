"""Partially observed matrices (and tensors) and the affine space ``A + U`` they define."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import prod
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import BadIndex, DependentGenerators, ShapeMismatch, ValidationError
from .fields import FieldSpec
from .tensor import CPDecomposition, DenseTensor, PureTensor, basis_vector, matrix_rank


class PartialMatrix:
    """A partially filled array: known entries plus an ordered list of unknown positions.

    Positions are 1-based tuples. The order of ``unknowns`` fixes the index
    ``k`` of each unknown, which becomes the generator index and the slot of
    the lifted tensor. Positions that are neither known nor unknown are
    rejected; a known zero must be listed explicitly.

    Despite the name the shape may have any order >= 1, so the same type
    covers tensor completion.

    >>> P = PartialMatrix((2, 2), {(1, 1): 1, (2, 2): 1}, [(1, 2), (2, 1)], FieldSpec.gf(2))
    >>> P.s
    2
    """

    def __init__(self, shape, known: Mapping, unknowns: Sequence, field: FieldSpec):
        self.shape = tuple(int(m) for m in shape)
        if not self.shape or any(m < 1 for m in self.shape):
            raise ValidationError(f"bad shape {shape}")
        self.field = field
        self.known = {}
        for pos, value in known.items():
            pos = self._check_position(pos)
            self.known[pos] = field.scalar(value)
        self.unknowns = []
        seen = set()
        for pos in unknowns:
            pos = self._check_position(pos)
            if pos in seen:
                raise ValidationError(f"unknown position {pos} listed twice")
            if pos in self.known:
                raise ValidationError(f"position {pos} is both known and unknown")
            seen.add(pos)
            self.unknowns.append(pos)
        missing = prod(self.shape) - len(self.known) - len(self.unknowns)
        if missing:
            raise ValidationError(f"{missing} positions are neither known nor unknown")

    def _check_position(self, pos):
        pos = tuple(int(i) for i in pos)
        if len(pos) != len(self.shape) or any(not 1 <= i <= m for i, m in zip(pos, self.shape)):
            raise ValidationError(f"position {pos} out of range for shape {self.shape}")
        return pos

    @classmethod
    def from_array(cls, rows, field: FieldSpec, unknown=None) -> "PartialMatrix":
        """Build from a nested list where ``unknown`` (default ``None``) marks missing entries.

        Unknowns are ordered row-major.
        """
        arr = np.asarray(rows, dtype=object)
        known, unknowns = {}, []
        for idx, v in np.ndenumerate(arr):
            pos = tuple(i + 1 for i in idx)
            if v is unknown or (unknown is not None and v == unknown):
                unknowns.append(pos)
            else:
                known[pos] = v
        return cls(arr.shape, known, unknowns, field)

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def s(self) -> int:
        return len(self.unknowns)

    def __repr__(self):
        return f"PartialMatrix(shape={self.shape}, known={len(self.known)}, unknowns={self.unknowns}, field={self.field})"


@dataclass(eq=False)
class AffineTensorSpace:
    """``base + span(generators)`` with linearly independent pure-tensor generators."""

    base: DenseTensor
    generators: list = dc_field(default_factory=list)
    validate: bool = True

    def __post_init__(self):
        self.generators = list(self.generators)
        for g in self.generators:
            if g.shape != self.base.shape:
                raise ShapeMismatch(f"generator shape {g.shape} != base shape {self.base.shape}")
            if g.field != self.base.field:
                raise ShapeMismatch("generator field differs from base field")
        if self.validate:
            validate_generators(self)

    @property
    def field(self) -> FieldSpec:
        return self.base.field

    @property
    def shape(self) -> tuple:
        return self.base.shape

    @property
    def s(self) -> int:
        return len(self.generators)

    def generator_matrix(self) -> np.ndarray:
        """The ``s x prod(shape)`` matrix whose rows are the vectorized generators."""
        if not self.generators:
            return self.field.zeros((0, prod(self.shape)))
        return np.stack([g.vectorize() for g in self.generators])


@dataclass(eq=False)
class Completion:
    """A point ``matrix = base + sum_k lambdas[k] * generators[k]`` and its rank."""

    lambdas: list
    matrix: DenseTensor
    achieved_rank: int
    decomposition: CPDecomposition | None = None


def to_affine_space(P: PartialMatrix) -> AffineTensorSpace:
    """Zero the unknown slots of ``P`` and attach one standard generator per unknown."""
    field = P.field
    base = field.zeros(P.shape)
    for pos, value in P.known.items():
        base[tuple(i - 1 for i in pos)] = value
    generators = [
        PureTensor([basis_vector(m, i, field) for m, i in zip(P.shape, pos)], field)
        for pos in P.unknowns
    ]
    # standard basis tensors at distinct positions are independent by construction
    return AffineTensorSpace(DenseTensor(base, field), generators, validate=False)


def validate_generators(S: AffineTensorSpace) -> None:
    """Raise :class:`DependentGenerators` unless the generators have rank ``s``."""
    if S.s == 0:
        return
    r = linalg.rank(S.generator_matrix(), S.field)
    if r < S.s:
        raise DependentGenerators(f"{S.s} generators span only a {r}-dimensional space")


def apply_completion(S: AffineTensorSpace, lambdas: Sequence) -> DenseTensor:
    """``base + sum_k lambdas[k] * generators[k]``."""
    if len(lambdas) != S.s:
        raise ShapeMismatch(f"expected {S.s} coefficients, got {len(lambdas)}")
    field = S.field
    total = S.base.data
    if S.s:
        lam = field.array(list(lambdas))
        total = field.reduce(total + field.tensordot(lam, S.generator_matrix(), axes=1).reshape(S.shape))
    return DenseTensor(total, field)


def membership(S: AffineTensorSpace, B: DenseTensor):
    """Coefficients ``lambdas`` with ``B = apply_completion(S, lambdas)``, or ``None``."""
    if B.shape != S.shape:
        raise ShapeMismatch(f"tensor of shape {B.shape} tested against space of shape {S.shape}")
    field = S.field
    diff = field.reduce(B.entries - S.base.entries)
    if S.s == 0:
        return [] if np.all(field.is_zero_array(diff)) else None
    x = linalg.solve(S.generator_matrix().T, diff, field)
    if x is None:
        return None
    return [field.scalar(v) for v in x]


def completion_from_lambdas(S: AffineTensorSpace, lambdas: Sequence) -> Completion:
    """Wrap ``apply_completion`` with the achieved rank (order-2 only; ``-1`` otherwise)."""
    B = apply_completion(S, lambdas)
    r = matrix_rank(B) if B.order == 2 else -1
    return Completion([S.field.scalar(v) for v in lambdas], B, r)


def known_positions_match(P: PartialMatrix, B: DenseTensor, tol: float | None = None) -> bool:
    """True when ``B`` agrees with every known entry of ``P``."""
    field = P.field
    if not P.known:
        return True
    idx = tuple(np.array([[i - 1 for i in pos] for pos in P.known]).T)
    got = B.data[idx]
    want = field.array(list(P.known.values()))
    if not field.is_exact and tol is not None:
        return bool(np.all(np.abs(got - want) <= tol * np.maximum(1.0, np.abs(want))))
    return field.arrays_equal(got, want)
