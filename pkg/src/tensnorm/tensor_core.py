"""Dense real/complex tensors and the elementary multilinear operations.

Entries are stored row-major (last index fastest).  Modes are numbered from
zero throughout the Python API.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Field",
    "Tensor",
    "RankOneTerm",
    "RankOneDecomposition",
    "as_tensor",
    "total_size",
    "inner_product",
    "hs_norm",
    "contract",
    "outer",
    "unfold",
    "refold",
    "compress",
    "expand",
    "tensor_product",
    "realify",
    "khatri_rao",
]

_INDEX_LIMIT = np.iinfo(np.int64).max


class Field(str, Enum):
    REAL = "R"
    COMPLEX = "C"

    @classmethod
    def parse(cls, value) -> "Field":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"R": cls.REAL, "REAL": cls.REAL, "C": cls.COMPLEX, "COMPLEX": cls.COMPLEX}
        if key not in aliases:
            raise ValueError(f"unknown field {value!r}; expected 'R' or 'C'")
        return aliases[key]

    @property
    def dtype(self):
        return np.float64 if self is Field.REAL else np.complex128


def total_size(dims: Sequence[int]) -> int:
    """Product of the mode dimensions, with overflow detection."""
    size = 1
    for n in dims:
        n = int(n)
        if n < 1:
            raise ValueError(f"mode dimensions must be positive, got {tuple(dims)}")
        size *= n
        if size > _INDEX_LIMIT:
            raise OverflowError(f"total size of shape {tuple(dims)} overflows int64")
    return size


@dataclass(frozen=True)
class Tensor:
    """Immutable dense tensor tagged with the field it is analysed over.

    A ``Field.REAL`` tensor must have no imaginary part; its entries are kept
    as float64.  A real-valued array may still be tagged ``Field.COMPLEX`` so
    that complex norms of real data can be computed.
    """

    data: np.ndarray
    field: Field = Field.COMPLEX

    def __post_init__(self):
        fld = Field.parse(self.field)
        arr = np.asarray(self.data)
        if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
            raise TypeError("tensor entries must be numeric")
        if arr.ndim:
            total_size(arr.shape)
        if fld is Field.REAL:
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise ValueError("real-tagged tensor has nonzero imaginary parts")
                arr = arr.real
            arr = np.array(arr, dtype=np.float64)
        else:
            arr = np.array(arr, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "field", fld)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def with_field(self, field) -> "Tensor":
        return Tensor(self.data, field)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, field={self.field.value})"


def as_tensor(x, field=None) -> Tensor:
    """Coerce arrays to :class:`Tensor`.

    Without an explicit ``field`` a complex dtype maps to C and anything else
    to R.  An explicit field re-tags an existing tensor.
    """
    if isinstance(x, Tensor):
        return x if field is None else x.with_field(field)
    arr = np.asarray(x)
    if field is None:
        field = Field.COMPLEX if np.iscomplexobj(arr) else Field.REAL
    return Tensor(arr, field)


def _result_field(*tensors: Tensor) -> Field:
    return Field.COMPLEX if any(t.field is Field.COMPLEX for t in tensors) else Field.REAL


def inner_product(t, y):
    """``<t, y> = sum t * conj(y)``, conjugate-linear in the second slot."""
    t, y = as_tensor(t), as_tensor(y)
    if t.shape != y.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {y.shape}")
    return np.vdot(y.data, t.data)


def hs_norm(t) -> float:
    return float(np.linalg.norm(as_tensor(t).data.ravel()))


def contract(t, y, modes: Sequence[int]) -> Tensor:
    """Sum ``t`` against ``y`` over the selected modes (no conjugation).

    ``y`` must have the shapes of ``t`` at ``modes`` taken in ascending order.
    Contracting over every mode returns a 0-mode tensor.
    """
    t, y = as_tensor(t), as_tensor(y)
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ValueError("repeated mode in contraction")
    if any(m < 0 or m >= t.ndim for m in modes):
        raise ValueError(f"modes {modes} out of range for a {t.ndim}-mode tensor")
    modes = sorted(modes)
    expected = tuple(t.shape[m] for m in modes)
    if y.shape != expected:
        raise ValueError(f"contracting tensor has shape {y.shape}, expected {expected}")
    out = np.tensordot(t.data, y.data, axes=(modes, list(range(len(modes)))))
    return Tensor(np.asarray(out), _result_field(t, y))


def outer(factors: Sequence) -> Tensor:
    """Materialise the rank-one tensor ``x_1 (x) ... (x) x_d``."""
    factors = [np.asarray(f) for f in factors]
    if not factors:
        raise ValueError("outer product needs at least one factor")
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    cplx = any(np.iscomplexobj(f) for f in factors)
    return Tensor(out, Field.COMPLEX if cplx else Field.REAL)


def unfold(t, mode: int) -> np.ndarray:
    """Mode-``mode`` matricisation, columns in ascending order of the remaining modes."""
    t = as_tensor(t)
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for a {t.ndim}-mode tensor")
    return np.moveaxis(t.data, mode, 0).reshape(t.shape[mode], -1)


def refold(matrix, mode: int, shape: Sequence[int], field=None) -> Tensor:
    """Inverse of :func:`unfold`."""
    shape = tuple(int(n) for n in shape)
    if not 0 <= mode < len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    moved = (shape[mode],) + shape[:mode] + shape[mode + 1:]
    arr = np.moveaxis(np.asarray(matrix).reshape(moved), 0, mode)
    return as_tensor(arr, field)


def khatri_rao(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Column-wise Kronecker product, first factor slowest.

    Each factor is ``(n_j, K)``; the result is ``(prod n_j, K)`` whose column
    ``i`` is the vectorised ``outer`` of the i-th columns.
    """
    out = np.asarray(factors[0])
    for f in factors[1:]:
        f = np.asarray(f)
        out = np.einsum("ak,bk->abk", out, f).reshape(-1, f.shape[1])
    return out


def _numerical_rank(s: np.ndarray, dims: tuple[int, int]) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    tol = max(dims) * np.finfo(float).eps * s[0]
    return int(np.sum(s > tol))


def compress(t) -> tuple[Tensor, list[np.ndarray]]:
    """Tucker compression onto the column spaces of the unfoldings.

    Returns the core tensor and one isometry per mode.  A mode of full rank
    keeps the identity basis.  ``expand(core, bases)`` reproduces ``t``.
    """
    t = as_tensor(t)
    bases = []
    core = t.data
    for j in range(t.ndim):
        mat = unfold(t, j)
        u, s, _ = np.linalg.svd(mat, full_matrices=False)
        r = max(_numerical_rank(s, mat.shape), 1)
        if r == t.shape[j]:
            basis = np.eye(t.shape[j], dtype=t.field.dtype)
        else:
            basis = u[:, :r]
            if t.field is Field.REAL:
                basis = basis.real
        bases.append(basis)
        core = np.moveaxis(np.tensordot(basis.conj().T, core, axes=(1, j)), 0, j)
    return Tensor(core, t.field), bases


def expand(core, bases: Sequence[np.ndarray]) -> Tensor:
    core = as_tensor(core)
    arr = core.data
    for j, basis in enumerate(bases):
        arr = np.moveaxis(np.tensordot(basis, arr, axes=(1, j)), 0, j)
    return Tensor(arr, core.field)


def tensor_product(t, t2) -> Tensor:
    t, t2 = as_tensor(t), as_tensor(t2)
    if t.field is not t2.field:
        raise ValueError("tensor product of tensors over different fields")
    return Tensor(np.multiply.outer(t.data, t2.data), t.field)


def realify(t) -> Tensor:
    """Real tensor with a leading mode of size 2 holding real and imaginary parts."""
    t = as_tensor(t)
    arr = np.asarray(t.data, dtype=np.complex128)
    return Tensor(np.stack([arr.real, arr.imag]), Field.REAL)


@dataclass(frozen=True)
class RankOneTerm:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(np.asarray(f) for f in self.factors))

    @property
    def norm(self) -> float:
        return float(np.prod([np.linalg.norm(f) for f in self.factors]))

    def materialize(self) -> Tensor:
        return outer(self.factors)


@dataclass
class RankOneDecomposition:
    """``sum_i (x)_j y_{j,i}`` stored column-wise: ``factors[j]`` is ``(n_j, K)``."""

    factors: list
    field: Field = Field.COMPLEX
    signs: np.ndarray | None = dc_field(default=None)

    def __post_init__(self):
        self.field = Field.parse(self.field)
        self.factors = [np.atleast_2d(np.asarray(f, dtype=self.field.dtype)) for f in self.factors]
        counts = {f.shape[1] for f in self.factors}
        if len(counts) > 1:
            raise ValueError(f"inconsistent term counts across modes: {sorted(counts)}")
        if self.signs is not None:
            self.signs = np.asarray(self.signs, dtype=float)

    @classmethod
    def from_terms(cls, terms: Iterable[RankOneTerm], shape, field=Field.COMPLEX):
        terms = list(terms)
        fld = Field.parse(field)
        if not terms:
            return cls([np.zeros((n, 0), dtype=fld.dtype) for n in shape], fld)
        d = len(shape)
        for term in terms:
            if len(term.factors) != d:
                raise ValueError("term order does not match shape")
        factors = [np.stack([term.factors[j] for term in terms], axis=1) for j in range(d)]
        for j, n in enumerate(shape):
            if factors[j].shape[0] != n:
                raise ValueError(f"mode {j}: factor length {factors[j].shape[0]} != {n}")
        return cls(factors, fld)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1] if self.factors else 0

    def __len__(self):
        return self.rank

    @property
    def terms(self) -> list[RankOneTerm]:
        return [RankOneTerm(tuple(f[:, i] for f in self.factors)) for i in range(self.rank)]

    def term_norms(self) -> np.ndarray:
        norms = np.ones(self.rank)
        for f in self.factors:
            norms = norms * np.linalg.norm(f, axis=0)
        return norms

    def bound(self) -> float:
        return float(self.term_norms().sum())

    def materialize(self) -> Tensor:
        weights = np.ones(self.rank) if self.signs is None else self.signs
        cols = khatri_rao(self.factors) @ weights
        return Tensor(cols.reshape(self.shape), self.field)

    def residual(self, target) -> float:
        target = as_tensor(target)
        return hs_norm(Tensor(self.materialize().data - target.data, Field.COMPLEX))
