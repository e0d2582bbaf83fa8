"""Symmetric tensors stored by their sorted multi-index coefficients.

A symmetric ``d``-mode tensor on F^n has one free coefficient per multiset of
``d`` indices, i.e. ``C(n+d-1, d)`` of them.  Multi-indices are enumerated in
the lexicographic order of :func:`itertools.combinations_with_replacement`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor_core import Field, Tensor, as_tensor, total_size

__all__ = [
    "SymTensor",
    "SymRankOneTerm",
    "sorted_indices",
    "multiplicities",
    "sym_from_dense",
    "densify",
    "sym_hs_norm",
    "symmetrize",
    "sym_coefficients",
    "project_symmetric",
    "sym_term_budget",
]

SYMMETRY_TOL = 1e-10
_INT64_MAX = np.iinfo(np.int64).max


@lru_cache(maxsize=64)
def _index_table(n: int, d: int) -> np.ndarray:
    idx = np.array(list(itertools.combinations_with_replacement(range(n), d)), dtype=np.intp)
    idx.setflags(write=False)
    return idx.reshape(-1, d)


def sorted_indices(n: int, d: int) -> np.ndarray:
    """All sorted multi-indices ``i_1 <= ... <= i_d`` as rows (0-based)."""
    return _index_table(int(n), int(d))


@lru_cache(maxsize=64)
def _multiplicity_table(n: int, d: int) -> np.ndarray:
    idx = _index_table(n, d)
    out = np.empty(len(idx))
    for r, row in enumerate(idx):
        _, counts = np.unique(row, return_counts=True)
        out[r] = math.factorial(d) / math.prod(math.factorial(c) for c in counts)
    out.setflags(write=False)
    return out


def multiplicities(n: int, d: int) -> np.ndarray:
    """Number of distinct permutations of each sorted multi-index."""
    return _multiplicity_table(int(n), int(d))


@lru_cache(maxsize=64)
def _dense_lookup(n: int, d: int) -> np.ndarray:
    """Position in the sorted list for every entry of the dense ``n^d`` grid."""
    idx = _index_table(n, d)
    flat_sorted = np.ravel_multi_index(idx.T, (n,) * d) if d else np.zeros(1, int)
    pos = np.full(n ** d, -1, dtype=np.intp)
    pos[flat_sorted] = np.arange(len(idx))
    grid = np.sort(np.indices((n,) * d).reshape(d, -1), axis=0)
    out = pos[np.ravel_multi_index(grid, (n,) * d)]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SymTensor:
    """Symmetric tensor with coefficients indexed by :func:`sorted_indices`."""

    n: int
    d: int
    coeffs: np.ndarray
    field: Field = Field.COMPLEX

    def __post_init__(self):
        fld = Field.parse(self.field)
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        total_size((self.n,) * self.d)
        c = np.asarray(self.coeffs).ravel()
        expected = math.comb(self.n + self.d - 1, self.d)
        if c.size != expected:
            raise ValueError(f"expected {expected} coefficients, got {c.size}")
        if fld is Field.REAL:
            if np.iscomplexobj(c) and np.any(c.imag != 0):
                raise ValueError("real-tagged symmetric tensor has nonzero imaginary parts")
            c = np.array(c.real, dtype=np.float64)
        else:
            c = np.array(c, dtype=np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "field", fld)

    @classmethod
    def from_dict(cls, n: int, d: int, entries: dict, field=Field.COMPLEX) -> "SymTensor":
        """Build from ``{multi-index: value}`` with 0-based indices in any order."""
        idx = sorted_indices(n, d)
        lookup = {tuple(row): k for k, row in enumerate(idx)}
        c = np.zeros(len(idx), dtype=np.complex128)
        for key, val in entries.items():
            key = tuple(sorted(int(i) for i in key))
            if key not in lookup:
                raise ValueError(f"multi-index {key} out of range for n={n}, d={d}")
            c[lookup[key]] = val
        return cls(n, d, c, field)

    @property
    def indices(self) -> np.ndarray:
        return sorted_indices(self.n, self.d)

    def monomials(self) -> dict:
        """Coefficient view keyed by exponent vectors ``(j_1, ..., j_n)``."""
        out = {}
        for row, val in zip(self.indices, self.coeffs):
            out[tuple(np.bincount(row, minlength=self.n))] = val
        return out

    def with_field(self, field) -> "SymTensor":
        return SymTensor(self.n, self.d, self.coeffs, field)

    def __repr__(self):
        return f"SymTensor(n={self.n}, d={self.d}, field={self.field.value})"


@dataclass(frozen=True)
class SymRankOneTerm:
    """``sign * x^{(x) d}``; a negative sign only occurs for real even order."""

    vector: np.ndarray
    sign: int = 1


def _check_symmetric(arr: np.ndarray, tol: float) -> float:
    dev = 0.0
    for a in range(arr.ndim - 1):
        dev = max(dev, float(np.max(np.abs(arr - np.swapaxes(arr, a, a + 1)), initial=0.0)))
    if dev > tol:
        raise ValueError(f"tensor is not symmetric (max deviation {dev:.3e} > {tol:.1e})")
    return dev


def sym_from_dense(t, tol: float = SYMMETRY_TOL) -> SymTensor:
    """Compress a symmetric dense tensor.

    Symmetry is tested on adjacent transpositions, which generate the full
    symmetric group; tensors off by more than ``tol`` are rejected.
    """
    t = as_tensor(t)
    if t.ndim < 1 or len(set(t.shape)) != 1:
        raise ValueError(f"symmetric tensors need equal mode dimensions, got {t.shape}")
    _check_symmetric(t.data, tol)
    n, d = t.shape[0], t.ndim
    idx = sorted_indices(n, d)
    return SymTensor(n, d, t.data[tuple(idx.T)], t.field)


def densify(s: SymTensor) -> Tensor:
    arr = s.coeffs[_dense_lookup(s.n, s.d)].reshape((s.n,) * s.d)
    return Tensor(arr, s.field)


def sym_hs_norm(s: SymTensor) -> float:
    return float(np.sqrt(multiplicities(s.n, s.d) @ np.abs(s.coeffs) ** 2))


def _permanents(mats: np.ndarray) -> np.ndarray:
    """Permanents of a stack of square matrices by Ryser's formula."""
    m = mats.shape[-1]
    if m == 0:
        return np.ones(mats.shape[:-2], dtype=mats.dtype)
    total = np.zeros(mats.shape[:-2], dtype=mats.dtype)
    for mask in range(1, 1 << m):
        cols = [j for j in range(m) if mask >> j & 1]
        rows = mats[..., cols].sum(axis=-1)
        sign = -1 if (m - len(cols)) % 2 else 1
        total = total + sign * np.prod(rows, axis=-1)
    return total


def sym_coefficients(factors) -> np.ndarray:
    """Sorted-index coefficients of ``sym_d(y_1, ..., y_d)`` for a batch of terms.

    ``factors`` has shape ``(d, n, K)``: slot ``j`` of term ``i`` is
    ``factors[j, :, i]``.  Returns an array of shape ``(C(n+d-1, d), K)``.
    """
    f = np.asarray(factors)
    d, n, k = f.shape
    idx = sorted_indices(n, d)
    # mats[r, i, l, j] = y_j[I_l] for sorted index r and term i
    mats = np.transpose(f[:, idx, :], (1, 3, 2, 0))
    return _permanents(mats) / math.factorial(d)


def symmetrize(*vectors, field=None) -> SymTensor:
    """``(1/d!) sum over permutations of the outer product of the vectors``."""
    if not vectors:
        raise ValueError("symmetrize needs at least one vector")
    vecs = [np.asarray(v).ravel() for v in vectors]
    n = vecs[0].size
    if any(v.size != n for v in vecs):
        raise ValueError("all vectors must have the same length")
    coeffs = sym_coefficients(np.stack(vecs)[:, :, None])[:, 0]
    if field is None:
        field = Field.COMPLEX if any(np.iscomplexobj(v) for v in vecs) else Field.REAL
    return SymTensor(n, len(vecs), coeffs, field)


def project_symmetric(t) -> SymTensor:
    """Orthogonal projection of a cubical tensor onto the symmetric subspace."""
    t = as_tensor(t)
    if len(set(t.shape)) != 1:
        raise ValueError(f"symmetric tensors need equal mode dimensions, got {t.shape}")
    d = t.ndim
    acc = np.zeros_like(t.data)
    perms = list(itertools.permutations(range(d)))
    for perm in perms:
        acc = acc + np.transpose(t.data, perm)
    return sym_from_dense(Tensor(acc / len(perms), t.field))


def sym_term_budget(n: int, d: int, field, convention: str = "max") -> int:
    """Number of symmetric rank-one terms ``M`` kept by the symmetric method.

    ``convention`` selects ``C(n+d-1, d-1)`` (``"d-1"``), ``C(n+d-1, d)``
    (``"d"``) or the larger of the two (``"max"``).  Complex budgets are doubled.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    options = {
        "d-1": math.comb(n + d - 1, d - 1),
        "d": math.comb(n + d - 1, d),
    }
    if convention == "max":
        m = max(options.values())
    elif convention in options:
        m = options[convention]
    else:
        raise ValueError(f"unknown budget convention {convention!r}")
    if Field.parse(field) is Field.COMPLEX:
        m *= 2
    if m > _INT64_MAX:
        raise OverflowError("symmetric term budget overflows int64")
    return int(m)
