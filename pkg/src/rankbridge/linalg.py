"""Row reduction over any :class:`FieldSpec`.

Exact fields use plain Gaussian elimination. Real matrices use partial
pivoting for ``rref``/``solve`` and singular values for ``rank``.
"""
from __future__ import annotations

import numpy as np

from .fields import FieldSpec


def rref(M, field: FieldSpec):
    """Reduced row echelon form of ``M``. Returns ``(R, pivot_columns)``."""
    R = field.array(M).copy()
    if R.ndim != 2:
        raise ValueError("rref needs a 2-D array")
    n_rows, n_cols = R.shape
    pivots = []
    row = 0
    if field.is_exact:
        for col in range(n_cols):
            if row == n_rows:
                break
            nz = np.nonzero(~field.is_zero_array(R[row:, col]))[0]
            if nz.size == 0:
                continue
            piv = row + int(nz[0])
            if piv != row:
                R[[row, piv]] = R[[piv, row]]
            R[row] = field.reduce(R[row] * field.inv(R[row, col]))
            factors = R[:, col].copy()
            factors[row] = field.zero
            R = field.reduce(R - np.outer(factors, R[row]))
            pivots.append(col)
            row += 1
        return R, pivots

    scale = float(np.max(np.abs(R))) if R.size else 0.0
    thresh = field.tolerance * max(scale, 1e-300)
    for col in range(n_cols):
        if row == n_rows:
            break
        piv = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[piv, col]) <= thresh:
            R[row:, col] = 0.0
            continue
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = R[row] / R[row, col]
        factors = R[:, col].copy()
        factors[row] = 0.0
        R = R - np.outer(factors, R[row])
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M, field: FieldSpec) -> int:
    """Matrix rank; exact elimination for GF(p)/Q, singular values against tol*sigma_max for reals."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if field.is_exact:
        return len(rref(M, field)[1])
    sv = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > field.tolerance * sv[0]))


def solve(A, b, field: FieldSpec):
    """Solve ``A x = b`` (``b`` a vector or matrix of right-hand sides).

    Returns one solution (free variables set to zero), or ``None`` when the
    system is inconsistent. For reals the least-squares solution is
    returned when its residual is within tolerance.
    """
    A = field.array(A)
    b = field.array(b)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    n_rows, n_cols = A.shape
    if not field.is_exact:
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not field.arrays_equal(A @ x, b):
            return None
        return x[:, 0] if vector else x
    aug = np.concatenate([A, b], axis=1)
    R, pivots = rref(aug, field)
    if any(p >= n_cols for p in pivots):
        return None
    x = field.zeros((n_cols, b.shape[1]))
    for i, p in enumerate(pivots):
        x[p] = R[i, n_cols:]
    return x[:, 0] if vector else x


def inverse(A, field: FieldSpec):
    """Inverse of a square matrix, or ``None`` if singular."""
    A = field.array(A)
    n = A.shape[0]
    if not field.is_exact:
        if rank(A, field) < n:
            return None
        return np.linalg.inv(A)
    eye = field.zeros((n, n))
    for i in range(n):
        eye[i, i] = field.one
    R, pivots = rref(np.concatenate([A, eye], axis=1), field)
    if pivots[:n] != list(range(n)):
        return None
    return R[:, n:]


class PrimeEchelon:
    """Incrementally maintained echelon basis of a subspace of GF(p)^n.

    Used by the exact rank search, where thousands of membership tests run
    against small, growing subspaces.
    """

    __slots__ = ("p", "rows", "pivots")

    def __init__(self, p: int, rows=(), pivots=()):
        self.p = p
        self.rows = list(rows)
        self.pivots = list(pivots)

    def copy(self) -> "PrimeEchelon":
        return PrimeEchelon(self.p, self.rows, self.pivots)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        for piv, row in zip(self.pivots, self.rows):
            c = v[piv]
            if c:
                v = (v - c * row) % self.p
        return v

    def contains(self, v: np.ndarray) -> bool:
        return not self.reduce(v).any()

    def extended(self, v: np.ndarray):
        """A new echelon including ``v``, or ``None`` when ``v`` is already in the span."""
        r = self.reduce(v)
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return None
        piv = int(nz[0])
        r = (r * pow(int(r[piv]), -1, self.p)) % self.p
        return PrimeEchelon(self.p, self.rows + [r], self.pivots + [piv])

    def add(self, v: np.ndarray) -> bool:
        r = self.reduce(v)
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        self.rows.append((r * pow(int(r[piv]), -1, self.p)) % self.p)
        self.pivots.append(piv)
        return True
