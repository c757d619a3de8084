"""Scalar domains: prime fields GF(p), exact rationals, and floats with a tolerance.

Field elements are plain Python objects (``int`` for GF(p), ``Fraction`` for
rationals, ``float`` for reals). Arrays of elements are numpy arrays whose
dtype depends on the field: ``int64`` for GF(p), ``object`` (holding
``Fraction``) for rationals and ``float64`` for reals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple, Callable

import numpy as np
import sympy

from .errors import DivisionByZero, ValidationError

MAX_PRIME = 2**31
DEFAULT_TOLERANCE = 1e-9

PRIME = "prime"
RATIONAL = "rational"
REAL = "real"


@dataclass(frozen=True)
class FieldSpec:
    """Selects the scalar domain used for all arithmetic.

    Use the constructors :meth:`gf`, :meth:`rational`, :meth:`real` or
    :meth:`parse` rather than calling the dataclass directly.

    >>> FieldSpec.gf(3).add(2, 2)
    1
    >>> FieldSpec.parse("rational").scalar("2/4")
    Fraction(1, 2)
    """

    kind: str
    p: int | None = None
    tolerance: float | None = None

    def __post_init__(self):
        if self.kind == PRIME:
            p = self.p
            if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
                raise ValidationError(f"prime modulus must be an integer, got {p!r}")
            if p < 2 or p > MAX_PRIME or not sympy.isprime(int(p)):
                raise ValidationError(f"GF(p) needs a prime p <= 2^31, got {p}")
            object.__setattr__(self, "p", int(p))
        elif self.kind == REAL:
            tol = self.tolerance
            if tol is None or not (0.0 < float(tol) < 1.0):
                raise ValidationError(f"real tolerance must lie in (0, 1), got {tol!r}")
            object.__setattr__(self, "tolerance", float(tol))
        elif self.kind != RATIONAL:
            raise ValidationError(f"unknown field kind {self.kind!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def gf(cls, p: int) -> "FieldSpec":
        return cls(PRIME, p=p)

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls(RATIONAL)

    @classmethod
    def real(cls, tolerance: float = DEFAULT_TOLERANCE) -> "FieldSpec":
        return cls(REAL, tolerance=tolerance)

    @classmethod
    def parse(cls, designator: str) -> "FieldSpec":
        """Parse ``"gf:<p>"``, ``"rational"`` or ``"real:<tol>"``."""
        text = designator.strip().lower()
        if text == RATIONAL:
            return cls.rational()
        head, _, tail = text.partition(":")
        try:
            if head == "gf" and tail:
                return cls.gf(int(tail))
            if head == REAL:
                return cls.real(float(tail) if tail else DEFAULT_TOLERANCE)
        except ValueError as exc:
            raise ValidationError(f"bad field designator {designator!r}: {exc}") from None
        raise ValidationError(f"bad field designator {designator!r}")

    def __str__(self):
        if self.kind == PRIME:
            return f"gf:{self.p}"
        if self.kind == REAL:
            return f"real:{self.tolerance!r}"
        return RATIONAL

    @property
    def is_prime(self) -> bool:
        return self.kind == PRIME

    @property
    def is_exact(self) -> bool:
        return self.kind != REAL

    @property
    def dtype(self):
        return {PRIME: np.int64, RATIONAL: object, REAL: np.float64}[self.kind]

    # -- scalars ----------------------------------------------------------

    def scalar(self, value: Any):
        """Coerce ``value`` (int, Fraction, float or string) into a canonical element."""
        if isinstance(value, str):
            value = value.strip()
            if self.kind == REAL:
                # "p/q" is accepted so rational problems can be cast to the reals
                return float(Fraction(value)) if "/" in value else float(value)
            value = Fraction(value)
        if self.kind == PRIME:
            value = Fraction(value) if not isinstance(value, (int, np.integer)) else int(value)
            if isinstance(value, Fraction):
                if value.denominator % self.p == 0:
                    raise DivisionByZero(f"denominator divisible by {self.p}")
                return value.numerator * pow(value.denominator, -1, self.p) % self.p
            return value % self.p
        if self.kind == RATIONAL:
            if isinstance(value, float) and not value.is_integer():
                raise ValidationError(f"refusing to coerce float {value!r} into an exact rational")
            return Fraction(value)
        return float(value)

    @property
    def zero(self):
        return self.scalar(0)

    @property
    def one(self):
        return self.scalar(1)

    def elements(self):
        """All elements of a prime field in the order 0 < 1 < ... < p-1."""
        if self.kind != PRIME:
            raise ValidationError(f"{self} is not finite")
        return range(self.p)

    def add(self, a, b):
        if self.kind == PRIME:
            return (a + b) % self.p
        return a + b

    def sub(self, a, b):
        if self.kind == PRIME:
            return (a - b) % self.p
        return a - b

    def neg(self, a):
        if self.kind == PRIME:
            return (-a) % self.p
        return -a

    def mul(self, a, b):
        if self.kind == PRIME:
            return (a * b) % self.p
        return a * b

    def inv(self, a):
        if self.is_zero(a):
            raise DivisionByZero(f"inverse of zero in {self}")
        if self.kind == PRIME:
            return pow(int(a), -1, self.p)
        if self.kind == RATIONAL:
            return 1 / Fraction(a)
        return 1.0 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def eq(self, a, b) -> bool:
        if self.kind == REAL:
            return abs(a - b) <= self.tolerance * max(1.0, abs(a), abs(b))
        if self.kind == PRIME:
            return (a - b) % self.p == 0
        return a == b

    def is_zero(self, a) -> bool:
        return self.eq(a, self.zero)

    # -- arrays -----------------------------------------------------------

    def array(self, data) -> np.ndarray:
        """Canonical array of field elements built from nested data or an ndarray."""
        if self.kind == PRIME:
            arr = np.asarray(data)
            if arr.dtype.kind in "iub":
                return np.mod(arr.astype(np.int64), self.p)
            arr = np.asarray(data, dtype=object)
            return np.vectorize(self.scalar, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
        if self.kind == RATIONAL:
            arr = np.asarray(data, dtype=object)
            out = np.empty(arr.shape, dtype=object)
            for idx, v in np.ndenumerate(arr):
                out[idx] = self.scalar(v)
            return out
        arr = np.asarray(data, dtype=object) if _has_strings(data) else np.asarray(data)
        if arr.dtype == object:
            return np.vectorize(self.scalar, otypes=[np.float64])(arr) if arr.size else arr.astype(float)
        return arr.astype(np.float64)

    def zeros(self, shape) -> np.ndarray:
        if self.kind == RATIONAL:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=self.dtype)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        """Bring an array produced by raw numpy arithmetic back to canonical form."""
        if self.kind == PRIME:
            return np.mod(arr, self.p)
        return arr

    def is_zero_array(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr)
        if self.kind == REAL:
            return np.abs(arr) <= self.tolerance
        if self.kind == PRIME:
            return np.mod(arr, self.p) == 0
        return arr == 0

    def arrays_equal(self, a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
        """Exact equality, or for reals a max-norm residual relative to max(1, |b|_max)."""
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape != b.shape:
            return False
        if self.kind == REAL:
            tol = self.tolerance if tol is None else tol
            if a.size == 0:
                return True
            scale = max(1.0, float(np.max(np.abs(b))))
            return float(np.max(np.abs(a - b))) <= tol * scale
        if self.kind == PRIME:
            return bool(np.all(np.mod(a - b, self.p) == 0))
        return bool(np.all(a == b))

    def tensordot(self, a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
        """``np.tensordot`` with modular reduction and overflow protection."""
        if self.kind == PRIME:
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            if (self.p - 1) ** 2 * max(1, a.size) >= 2**62:
                out = np.tensordot(a.astype(object), b.astype(object), axes=axes)
                return np.mod(out, self.p).astype(np.int64)
            return np.mod(np.tensordot(a, b, axes=axes), self.p)
        return np.tensordot(a, b, axes=axes)

    def format(self, value) -> str:
        """Canonical string form used by the file formats."""
        if self.kind == REAL:
            return repr(float(value))
        if self.kind == PRIME:
            return str(int(value) % self.p)
        return str(Fraction(value))


def _has_strings(data) -> bool:
    if isinstance(data, np.ndarray):
        return data.dtype == object
    if isinstance(data, str):
        return True
    if isinstance(data, (list, tuple)):
        return any(_has_strings(x) for x in data)
    return False


class FieldOps(NamedTuple):
    add: Callable
    neg: Callable
    mul: Callable
    inv: Callable
    eq: Callable
    is_zero: Callable


def field_ops(spec: FieldSpec) -> FieldOps:
    """The arithmetic suite of ``spec`` as a tuple of plain callables."""
    return FieldOps(spec.add, spec.neg, spec.mul, spec.inv, spec.eq, spec.is_zero)
