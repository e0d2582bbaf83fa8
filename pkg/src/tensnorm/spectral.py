"""Lower bounds on the spectral norm by multistart alternating maximisation.

Every reported value is the modulus of an explicit inner product with a
rank-one tensor of unit factors, so it is always a valid lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ._parallel import parallel_map
from .symtensor import SymTensor, densify
from .tensor_core import Field, RankOneTerm, Tensor, as_tensor, hs_norm, outer, unfold

__all__ = ["SpectralResult", "spectral_lower", "sym_spectral_lower", "eta", "random_unit"]

UNIT_TOL = 1e-8


@dataclass
class SpectralResult:
    value: float
    witness: RankOneTerm
    restarts_used: int
    converged: bool
    field: Field = Field.COMPLEX
    history: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    histories: list = dc_field(default_factory=list)


def random_unit(n: int, field: Field, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n)
    if field is Field.COMPLEX:
        x = x + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def _resolve(t, field):
    t = as_tensor(t)
    if field is not None:
        t = t.with_field(field)
    if hs_norm(t) == 0:
        raise ValueError("spectral norm bound of the zero tensor requested")
    return t


def _contract_except(arr: np.ndarray, xs, k: int) -> np.ndarray:
    """Contract ``arr`` with ``conj(x_j)`` on every mode except ``k``."""
    out = arr
    for j in range(arr.ndim - 1, -1, -1):
        if j == k:
            continue
        out = np.tensordot(out, xs[j].conj(), axes=([j], [0]))
    return out


def _phase_fix(arr: np.ndarray, xs: list) -> list:
    c = np.tensordot(arr, outer(xs).data.conj(), axes=arr.ndim)
    if abs(c) > 0:
        xs = list(xs)
        xs[0] = xs[0] * (c / abs(c))
    return xs


def _run_alternating(arr, xs, iters, tol):
    d = arr.ndim
    hist = []
    prev = -np.inf
    converged = False
    for _ in range(iters):
        ng = 0.0
        for k in range(d):
            g = _contract_except(arr, xs, k)
            ng = np.linalg.norm(g)
            if ng == 0:
                break
            xs[k] = g / ng
        hist.append(ng)
        if abs(ng - prev) < tol or ng == 0:
            converged = True
            break
        prev = ng
    return xs, np.asarray(hist), converged


def spectral_lower(t, field=None, restarts: int = 30, iters: int = 500, tol: float = 1e-10,
                   seed: int = 0, workers: int | None = None) -> SpectralResult:
    """Best rank-one overlap found by alternating maximisation.

    Restart 0 starts from the leading left singular vectors of the mode
    unfoldings; the others start from random unit factors drawn from a
    generator seeded with ``(seed, restart)``.  Matrices are handled exactly
    by a dense SVD.
    """
    t = _resolve(t, field)
    fld = t.field
    arr = t.data
    if t.ndim == 1:
        x = arr / np.linalg.norm(arr)
        return SpectralResult(float(np.linalg.norm(arr)), RankOneTerm((x,)), 0, True, fld,
                              np.array([np.linalg.norm(arr)]))
    if t.ndim == 2:
        u, s, vh = np.linalg.svd(arr)
        xs = _phase_fix(arr, [u[:, 0], vh[0]])
        return SpectralResult(float(s[0]), RankOneTerm(tuple(xs)), 0, True, fld, np.array([s[0]]))

    def run(r):
        rng = np.random.default_rng([seed, r])
        if r == 0:
            xs = []
            for k in range(t.ndim):
                uk = np.linalg.svd(unfold(t, k), full_matrices=False)[0][:, 0]
                xs.append(uk.real if fld is Field.REAL else uk)
        else:
            xs = [random_unit(n, fld, rng) for n in t.shape]
        return _run_alternating(arr, xs, iters, tol)

    runs = parallel_map(run, range(max(1, restarts)), workers)
    values = [abs(np.tensordot(arr, outer(xs).data.conj(), axes=t.ndim)) for xs, _, _ in runs]
    best = int(np.argmax(values))  # first maximum wins ties
    xs, hist, conv = runs[best]
    xs = _phase_fix(arr, xs)
    value = float(abs(np.tensordot(arr, outer(xs).data.conj(), axes=t.ndim)))
    return SpectralResult(value, RankOneTerm(tuple(xs)), len(runs), conv, fld, hist,
                          [h for _, h, _ in runs])


def _sym_grad(arr: np.ndarray, x: np.ndarray) -> np.ndarray:
    g = arr
    xc = x.conj()
    for _ in range(arr.ndim - 1):
        g = g @ xc
    return g


def sym_spectral_lower(s: SymTensor, field=None, restarts: int = 30, iters: int = 500,
                       tol: float = 1e-10, seed: int = 0, gamma: float = 0.5,
                       workers: int | None = None) -> SpectralResult:
    """Spectral lower bound restricted to symmetric witnesses ``x^{(x) d}``.

    Uses the damped update ``x <- normalise(x + gamma * g_hat)`` where
    ``g_hat`` is the phase-aligned unit gradient; the best iterate of every
    restart is kept.
    """
    if field is not None:
        s = s.with_field(field)
    fld = s.field
    arr = densify(s).data
    if not np.any(arr):
        raise ValueError("spectral norm bound of the zero tensor requested")
    d = s.d

    def run(r):
        rng = np.random.default_rng([seed, r])
        if r == 0:
            x = np.linalg.svd(arr.reshape(s.n, -1), full_matrices=False)[0][:, 0]
            x = x.real if fld is Field.REAL else x
            x = x / np.linalg.norm(x)
        else:
            x = random_unit(s.n, fld, rng)
        best_val, best_x = -1.0, x
        hist = []
        prev = -np.inf
        conv = False
        for _ in range(iters):
            g = _sym_grad(arr, x)
            f = np.vdot(x, g)
            val = abs(f)
            hist.append(val)
            if val > best_val:
                best_val, best_x = val, x
            ng = np.linalg.norm(g)
            if ng == 0:
                break
            phase = f.conjugate() / val if val > 0 else 1.0
            x_new = x + gamma * (g * phase) / ng
            x = x_new / np.linalg.norm(x_new)
            if abs(val - prev) < tol:
                conv = True
                break
            prev = val
        return best_x, np.asarray(hist), conv

    runs = parallel_map(run, range(max(1, restarts)), workers)
    vals = [abs(np.vdot(x, _sym_grad(arr, x))) for x, _, _ in runs]
    best = int(np.argmax(vals))
    x, hist, conv = runs[best]
    f = np.vdot(x, _sym_grad(arr, x))
    if fld is Field.COMPLEX and abs(f) > 0:
        x = x * np.exp(1j * np.angle(f) / d)
    elif fld is Field.REAL and d % 2 == 1 and f < 0:
        x = -x
    value = float(abs(np.vdot(x, _sym_grad(arr, x))))
    return SpectralResult(value, RankOneTerm((x,) * d), len(runs), conv, fld, hist,
                          [h for _, h, _ in runs])


def eta(t, result: SpectralResult | None = None, field=None, **kwargs) -> float:
    """``-log2`` of the squared spectral lower bound of a unit state.

    The bound is computed with :func:`spectral_lower` unless ``result`` is
    supplied.  A loose bound makes this an over-estimate of the geometric
    measure.
    """
    t = as_tensor(t) if not isinstance(t, SymTensor) else t
    norm = hs_norm(t) if isinstance(t, Tensor) else float(np.linalg.norm(densify(t).data))
    if abs(norm - 1) > UNIT_TOL:
        raise ValueError(f"state must have unit norm, got {norm:.12g}")
    if result is None:
        if isinstance(t, SymTensor):
            result = sym_spectral_lower(t, field, **kwargs)
        else:
            result = spectral_lower(t, field, **kwargs)
    return float(-np.log2(result.value ** 2))
