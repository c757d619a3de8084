"""Dense tensors, pure tensors and CP decompositions over a :class:`FieldSpec`.

Indices and modes are 1-based at the public API (``basis_vector(3, 1)`` is
``e_1``, ``flatten(T, 1)`` unfolds the first mode); storage is a row-major
numpy array.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import prod
from typing import Sequence

import numpy as np

from . import linalg
from .errors import BadIndex, ShapeMismatch
from .fields import FieldSpec


class DenseTensor:
    """An order-d array of field elements.

    ``data`` is a numpy array of shape ``shape`` in the field's dtype;
    :attr:`entries` gives the row-major flat view.
    """

    __slots__ = ("data", "field")

    def __init__(self, data, field: FieldSpec, shape=None):
        arr = field.array(data)
        if shape is not None:
            shape = tuple(int(m) for m in shape)
            if arr.size != prod(shape):
                raise ShapeMismatch(f"{arr.size} entries do not fill shape {shape}")
            arr = arr.reshape(shape)
        if arr.ndim < 1:
            raise ShapeMismatch("tensor order must be at least 1")
        if any(m < 1 for m in arr.shape):
            raise ShapeMismatch(f"dimensions must be positive, got {arr.shape}")
        arr.flags.writeable = False
        self.data = arr
        self.field = field

    @classmethod
    def zeros(cls, shape, field: FieldSpec) -> "DenseTensor":
        return cls(field.zeros(tuple(shape)), field)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def entries(self) -> np.ndarray:
        return self.data.reshape(-1)

    def __getitem__(self, index):
        """1-based element access: ``T[1, 2]``."""
        if not isinstance(index, tuple):
            index = (index,)
        return self.data[_zero_based(index, self.shape)]

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and self.field.arrays_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.field, self.shape))

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same(self, other)
        return DenseTensor(self.field.reduce(self.data + other.data), self.field)

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same(self, other)
        return DenseTensor(self.field.reduce(self.data - other.data), self.field)

    def scale(self, c) -> "DenseTensor":
        return DenseTensor(self.field.reduce(self.data * self.field.scalar(c)), self.field)

    def is_zero(self) -> bool:
        return bool(np.all(self.field.is_zero_array(self.data)))

    def tolist(self):
        return self.data.tolist()

    def __repr__(self):
        return f"DenseTensor(shape={self.shape}, field={self.field}, data={self.data.tolist()!r})"


def _check_same(a: DenseTensor, b: DenseTensor):
    if a.shape != b.shape or a.field != b.field:
        raise ShapeMismatch(f"shape/field mismatch: {a.shape} {a.field} vs {b.shape} {b.field}")


def _zero_based(index, shape):
    if len(index) != len(shape):
        raise BadIndex(f"index {index} has wrong length for shape {shape}")
    out = []
    for i, m in zip(index, shape):
        if not 1 <= i <= m:
            raise BadIndex(f"index {index} out of range for shape {shape}")
        out.append(i - 1)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class PureTensor:
    """An outer product ``v1 ⊗ v2 ⊗ ... ⊗ vd`` stored as its factor vectors."""

    factors: tuple
    field: FieldSpec

    def __init__(self, factors: Sequence, field: FieldSpec):
        vecs = []
        for f in factors:
            v = field.array(f)
            if v.ndim != 1 or v.size == 0:
                raise ShapeMismatch("pure-tensor factors must be nonempty vectors")
            v.flags.writeable = False
            vecs.append(v)
        if not vecs:
            raise ShapeMismatch("a pure tensor needs at least one factor")
        object.__setattr__(self, "factors", tuple(vecs))
        object.__setattr__(self, "field", field)

    @property
    def shape(self) -> tuple:
        return tuple(v.size for v in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    def to_dense(self) -> DenseTensor:
        return DenseTensor(outer(self.factors, self.field), self.field)

    def vectorize(self) -> np.ndarray:
        return outer(self.factors, self.field).reshape(-1)

    def __repr__(self):
        return f"PureTensor({[v.tolist() for v in self.factors]!r}, {self.field})"


def outer(vectors: Sequence[np.ndarray], field: FieldSpec) -> np.ndarray:
    out = np.asarray(vectors[0])
    for v in vectors[1:]:
        out = field.reduce(np.multiply.outer(out, np.asarray(v)))
    return out


@dataclass(eq=False)
class CPDecomposition:
    """An ordered list of pure tensors of a common shape.

    The length may exceed the true rank of the tensor it expands to.
    """

    shape: tuple
    field: FieldSpec
    terms: list = dc_field(default_factory=list)

    def __post_init__(self):
        self.shape = tuple(int(m) for m in self.shape)
        self.terms = list(self.terms)
        for t in self.terms:
            if t.shape != self.shape:
                raise ShapeMismatch(f"term of shape {t.shape} in a decomposition of shape {self.shape}")

    @classmethod
    def from_factors(cls, field: FieldSpec, shape, factor_lists) -> "CPDecomposition":
        return cls(shape, field, [PureTensor(fs, field) for fs in factor_lists])

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "CPDecomposition") -> "CPDecomposition":
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot concatenate decompositions of shapes {self.shape} and {other.shape}")
        return CPDecomposition(self.shape, self.field, self.terms + other.terms)


@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """A linear map from the space of tensors of ``space_shape`` to the field."""

    space_shape: tuple
    coefficients: np.ndarray
    field: FieldSpec

    def __init__(self, coefficients, field: FieldSpec, space_shape=None):
        c = field.array(coefficients)
        if space_shape is None:
            space_shape = c.shape
        space_shape = tuple(int(m) for m in space_shape)
        if c.size != prod(space_shape):
            raise ShapeMismatch(f"{c.size} coefficients for a space of shape {space_shape}")
        c = c.reshape(space_shape)
        c.flags.writeable = False
        object.__setattr__(self, "space_shape", space_shape)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "field", field)

    @classmethod
    def dual_basis(cls, dim: int, index: int, field: FieldSpec) -> "LinearFunctional":
        """The coordinate functional picking entry ``index`` (1-based)."""
        return cls(basis_vector(dim, index, field), field)

    def __call__(self, x):
        if isinstance(x, PureTensor):
            x = x.vectorize()
        elif isinstance(x, DenseTensor):
            x = x.entries
        x = np.asarray(x).reshape(-1)
        if x.size != self.coefficients.size:
            raise ShapeMismatch("functional applied to a vector of the wrong size")
        return self.field.tensordot(self.coefficients.reshape(-1), x, axes=1)[()]


def basis_vector(dim: int, index: int, field: FieldSpec | None = None) -> np.ndarray:
    """The standard basis vector ``e_index`` of length ``dim`` (1-based index)."""
    if dim < 1 or not 1 <= index <= dim:
        raise BadIndex(f"basis index {index} out of range for dimension {dim}")
    field = field or FieldSpec.rational()
    v = field.zeros(dim)
    v[index - 1] = field.one
    return v


def expand(dec: CPDecomposition) -> DenseTensor:
    """Sum of the outer products of every term (the zero tensor for an empty list)."""
    field = dec.field
    total = field.zeros(dec.shape)
    for term in dec.terms:
        if term.shape != dec.shape:
            raise ShapeMismatch(f"term shape {term.shape} != {dec.shape}")
        total = field.reduce(total + outer(term.factors, field))
    return DenseTensor(total, field)


def matrix_rank(M: DenseTensor) -> int:
    """Rank of an order-2 tensor; exact elimination or singular-value counting for reals."""
    if M.order != 2:
        raise ShapeMismatch(f"matrix_rank needs an order-2 tensor, got order {M.order}")
    return linalg.rank(M.data, M.field)


def flatten(T: DenseTensor, mode: int) -> DenseTensor:
    """Mode-``mode`` unfolding: rows indexed by that mode, columns by the rest in row-major order."""
    if not 1 <= mode <= T.order:
        raise BadIndex(f"mode {mode} out of range for order {T.order}")
    arr = np.moveaxis(T.data, mode - 1, 0)
    return DenseTensor(arr.reshape(T.shape[mode - 1], -1), T.field)


def flattening_ranks(T: DenseTensor) -> list:
    return [matrix_rank(flatten(T, k)) for k in range(1, T.order + 1)]


def flattening_bound(T: DenseTensor) -> int:
    """max over modes of the unfolding rank; a lower bound on tensor rank."""
    return max(flattening_ranks(T))


def contract(T: DenseTensor, phi: LinearFunctional, modes: Sequence[int]) -> DenseTensor:
    """Apply ``phi`` to the given (1-based) modes of ``T`` and identity to the others.

    ``contract(A_hat, h, [1, 2])`` computes ``(h ⊗ id)(A_hat)``.
    """
    modes = [int(k) for k in modes]
    for k in modes:
        if not 1 <= k <= T.order:
            raise BadIndex(f"mode {k} out of range for order {T.order}")
    if len(set(modes)) != len(modes):
        raise BadIndex(f"repeated modes {modes}")
    if tuple(T.shape[k - 1] for k in modes) != phi.space_shape:
        raise ShapeMismatch(
            f"functional on shape {phi.space_shape} cannot consume modes {modes} of shape {T.shape}"
        )
    if len(modes) == T.order:
        raise ShapeMismatch("contracting every mode leaves an order-0 result; call the functional directly")
    out = T.field.tensordot(T.data, phi.coefficients, axes=([k - 1 for k in modes], list(range(len(modes)))))
    return DenseTensor(out, T.field)


def contract_mode(T: DenseTensor, mode: int, phi: LinearFunctional) -> DenseTensor:
    """Contract a single mode of ``T`` against a functional on that mode's space."""
    return contract(T, phi, [mode])


def contract_decomposition(dec: CPDecomposition, mode: int, phi: LinearFunctional) -> CPDecomposition:
    """Termwise contraction: ``phi(factor_mode) * (remaining factors)``."""
    if not 1 <= mode <= len(dec.shape):
        raise BadIndex(f"mode {mode} out of range")
    if phi.space_shape != (dec.shape[mode - 1],):
        raise ShapeMismatch("functional does not match the contracted mode")
    field = dec.field
    shape = dec.shape[: mode - 1] + dec.shape[mode:]
    terms = []
    for t in dec.terms:
        w = phi(t.factors[mode - 1])
        rest = list(t.factors[: mode - 1] + t.factors[mode:])
        rest[0] = field.reduce(rest[0] * w)
        terms.append(PureTensor(rest, field))
    return CPDecomposition(shape, field, terms)
