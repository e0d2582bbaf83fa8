"""Upper bounds on the nuclear norm by alternating convex minimisation.

A decomposition ``T = sum_i y_{1,i} (x) ... (x) y_{d,i}`` has cost
``phi = sum_i prod_j ||y_{j,i}||``, which bounds the nuclear norm from above.
One step of the method picks a mode ``k``, normalises the other factors of
every term (absorbing their norms into mode ``k``), pads the decomposition
with random filler terms whose mode-``k`` factor is zero, and then re-solves
for all mode-``k`` factors at once.  With the other factors fixed this is a
minimum-sum-of-norms program, solved in :mod:`tensnorm.mnorm_socp`, so
``phi`` never increases.

The symmetric variant keeps terms of the form ``sym_d(y_1, ..., y_d)`` and
alternates over the slots in the same way, with the linear constraint
written in sorted multi-index coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ._parallel import parallel_map
from .mnorm_socp import MinSumNormsProblem, SolverOptions, Status, solve
from .spectral import SpectralResult, random_unit
from .symtensor import (SymRankOneTerm, SymTensor, densify, multiplicities,
                        sym_coefficients, sym_hs_norm, sym_term_budget)
from .tensor_core import (Field, RankOneDecomposition, Tensor, as_tensor, compress, hs_norm,
                          khatri_rao, total_size, unfold)

__all__ = [
    "BudgetError",
    "AltOptions",
    "NuclearResult",
    "SymDecomposition",
    "DualityProduct",
    "initial_decomposition",
    "extension_step",
    "minimization_step",
    "nuclear_upper",
    "sym_initial_decomposition",
    "sym_nuclear_upper",
    "duality_gap",
    "omega",
]

UNIT_TOL = 1e-8
RECON_TOL = 1e-7


class BudgetError(ValueError):
    """Raised when a term budget exceeds the configured cap or the current term count."""


@dataclass(frozen=True)
class AltOptions:
    """Controls for the alternating method.

    ``stop_rule="mode"`` stops as soon as some mode's value changes by less
    than ``eps`` between consecutive sweeps; ``"sweep"`` waits until every
    mode in a sweep satisfies the test.
    """

    eps: float = 1e-6
    max_outer: int = 100
    restarts: int = 30
    term_budget_override: int | None = None
    rng_seed: int = 0
    stop_rule: str = "mode"
    budget_cap: int = 4096
    budget_convention: str = "max"
    prune_tol: float = 1e-9
    compress: bool = True
    init: str = "mixed"
    solver: SolverOptions = dc_field(default_factory=SolverOptions)
    workers: int | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_outer < 1 or self.restarts < 1:
            raise ValueError("max_outer and restarts must be at least 1")
        if self.stop_rule not in ("mode", "sweep"):
            raise ValueError(f"unknown stop rule {self.stop_rule!r}")
        if self.init not in ("canonical", "random", "mixed"):
            raise ValueError(f"unknown initialisation {self.init!r}")

    def canonical_start(self, restart: int) -> bool:
        """Whether ``restart`` begins from the basis expansion or from random fillers only."""
        return self.init == "canonical" or (self.init == "mixed" and restart == 0)


@dataclass
class SymDecomposition:
    """``sum_i sym_d(y_{1,i}, ..., y_{d,i})``; ``factors`` has shape ``(d, n, K)``."""

    factors: np.ndarray
    field: Field = Field.COMPLEX
    witness: list | None = None

    @property
    def rank(self) -> int:
        return self.factors.shape[2]

    def term_norms(self) -> np.ndarray:
        return np.prod(np.linalg.norm(self.factors, axis=1), axis=0)

    def bound(self) -> float:
        return float(self.term_norms().sum())

    def sym_tensor(self) -> SymTensor:
        d, n, _ = self.factors.shape
        coeffs = sym_coefficients(self.factors).sum(axis=1)
        return SymTensor(n, d, coeffs, self.field)

    def materialize(self) -> Tensor:
        return densify(self.sym_tensor())

    def residual(self, target: SymTensor) -> float:
        diff = SymTensor(target.n, target.d, self.sym_tensor().coeffs - target.coeffs, Field.COMPLEX)
        return sym_hs_norm(diff)


@dataclass
class NuclearResult:
    value: float
    decomposition: object
    history: np.ndarray
    active_terms: int
    status: str
    field: Field = Field.COMPLEX
    residual: float = 0.0
    restarts_used: int = 1
    histories: list = dc_field(default_factory=list)
    values: list = dc_field(default_factory=list)


@dataclass(frozen=True)
class DualityProduct:
    """``nuclear * spectral`` against ``||T||^2``; equality means both bounds are tight."""

    value: float
    hs_squared: float
    tight: bool

    def __float__(self):
        return self.value


# ---------------------------------------------------------------- nonsymmetric

def initial_decomposition(t, field=None) -> RankOneDecomposition:
    """Canonical basis expansion: one term ``t_I e_{i_1} (x) ... (x) e_{i_d}`` per nonzero entry."""
    t = as_tensor(t, field)
    idx = np.argwhere(t.data != 0)
    if idx.size == 0:
        raise ValueError("initial decomposition of the zero tensor requested")
    factors = []
    for j, n in enumerate(t.shape):
        f = np.zeros((n, len(idx)), dtype=t.field.dtype)
        f[idx[:, j], np.arange(len(idx))] = 1.0
        factors.append(f)
    factors[0] = factors[0] * t.data[tuple(idx.T)]
    return RankOneDecomposition(factors, t.field)


def _budget(shape, field: Field, override, cap) -> int:
    n = override if override is not None else total_size(shape) * (2 if field is Field.COMPLEX else 1)
    if n > cap:
        raise BudgetError(f"term budget {n} exceeds cap {cap}")
    return int(n)


def extension_step(dec: RankOneDecomposition, k: int, budget: int,
                   rng: np.random.Generator) -> RankOneDecomposition:
    """Normalise the factors off mode ``k`` and pad with filler terms up to ``budget``.

    Fillers carry random unit vectors off mode ``k`` and a zero vector at mode
    ``k``, so the represented tensor and the bound are unchanged.  Terms with
    a vanishing factor are dropped first since they contribute nothing.
    """
    if dec.rank > budget:
        raise BudgetError(f"decomposition has {dec.rank} terms, budget is {budget}")
    d = len(dec.factors)
    norms = [np.linalg.norm(f, axis=0) for f in dec.factors]
    keep = np.all([nm > 0 for nm in norms], axis=0) if dec.rank else np.zeros(0, bool)
    absorbed = np.prod([norms[j][keep] for j in range(d) if j != k], axis=0) if d > 1 else 1.0
    factors = []
    for j, f in enumerate(dec.factors):
        f = f[:, keep]
        factors.append(f * absorbed if j == k else f / norms[j][keep])
    pad = budget - factors[0].shape[1]
    if pad > 0:
        for j, n in enumerate(dec.shape):
            if j == k:
                fill = np.zeros((n, pad), dtype=dec.field.dtype)
            else:
                fill = np.stack([random_unit(n, dec.field, rng) for _ in range(pad)], axis=1)
            factors[j] = np.concatenate([factors[j], fill], axis=1)
    return RankOneDecomposition(factors, dec.field)


def minimization_step(dec: RankOneDecomposition, t, k: int,
                      solver: SolverOptions | None = None) -> tuple[RankOneDecomposition, float]:
    """Replace the mode-``k`` factors by the minimiser of ``sum ||y_{k,i}||``.

    The other factors are assumed to be unit vectors (as left by
    :func:`extension_step`), so every weight equals one.  Returns the updated
    decomposition and the new value of ``phi``.
    """
    t = as_tensor(t)
    others = [dec.factors[j] for j in range(len(dec.factors)) if j != k]
    v = khatri_rao(others)
    weights = np.prod([np.linalg.norm(f, axis=0) for f in others], axis=0)
    prob = MinSumNormsProblem.from_factors(unfold(t, k), v, weights, dec.field)
    sol = solve(prob, solver, warm_start=dec.factors[k])
    if sol.status is Status.INFEASIBLE:
        raise RuntimeError("alternating step became infeasible; decomposition is inconsistent")
    factors = list(dec.factors)
    factors[k] = sol.blocks
    new = RankOneDecomposition(factors, dec.field)
    return new, new.bound()


def _prune(dec: RankOneDecomposition, k: int, phi: float, tol: float) -> RankOneDecomposition:
    keep = np.linalg.norm(dec.factors[k], axis=0) >= tol * phi
    return RankOneDecomposition([f[:, keep] for f in dec.factors], dec.field)


def _stop(values: list, d: int, eps: float, rule: str) -> bool:
    """``values`` holds phi after every step; compare each mode with its previous sweep."""
    if len(values) <= d:
        return False
    if rule == "mode":
        return abs(values[-1] - values[-1 - d]) < eps
    if len(values) % d:
        return False
    return all(abs(values[-1 - i] - values[-1 - i - d]) < eps for i in range(d))


def _alternate(core: Tensor, opts: AltOptions, budget: int, restart: int):
    rng = np.random.default_rng([opts.rng_seed, restart])
    if opts.canonical_start(restart):
        dec = initial_decomposition(core)
    else:
        dec = RankOneDecomposition([np.zeros((n, 0)) for n in core.shape], core.field)
    d = core.ndim
    values = []
    status = "MaxIter"
    for _ in range(opts.max_outer):
        done = False
        for k in range(d):
            dec = extension_step(dec, k, budget, rng)
            dec, phi = minimization_step(dec, core, k, opts.solver)
            dec = _prune(dec, k, phi, opts.prune_tol)
            values.append(phi)
            if opts.stop_rule == "mode" and _stop(values, d, opts.eps, "mode"):
                done = True
                break
        if done or (opts.stop_rule == "sweep" and _stop(values, d, opts.eps, "sweep")):
            status = "Converged"
            break
    return dec, np.asarray(values), status


def nuclear_upper(t, field=None, opts: AltOptions | None = None) -> NuclearResult:
    """Multistart alternating upper bound on the nuclear norm.

    The tensor is first compressed onto the column spaces of its unfoldings;
    the best decomposition of the core is lifted back through the bases.
    Restarts differ only in the random filler vectors.
    """
    opts = opts or AltOptions()
    t = as_tensor(t, field)
    if hs_norm(t) == 0:
        raise ValueError("nuclear norm bound of the zero tensor requested")
    if opts.compress:
        core, bases = compress(t)
    else:
        core, bases = t, [np.eye(n) for n in t.shape]
    budget = _budget(core.shape, t.field, opts.term_budget_override, opts.budget_cap)

    runs = parallel_map(lambda r: _alternate(core, opts, budget, r), range(opts.restarts), opts.workers)
    finals = [dec.bound() for dec, _, _ in runs]
    best = int(np.argmin(finals))
    dec, hist, status = runs[best]
    lifted = RankOneDecomposition([b @ f for b, f in zip(bases, dec.factors)], t.field)
    res = lifted.residual(t)
    if res > RECON_TOL * hs_norm(t):
        status = "ReconstructionFailed"
    return NuclearResult(
        value=lifted.bound(),
        decomposition=lifted,
        history=hist,
        active_terms=lifted.rank,
        status=status,
        field=t.field,
        residual=res,
        restarts_used=len(runs),
        histories=[h for _, h, _ in runs],
        values=finals,
    )


# ------------------------------------------------------------------- symmetric

def sym_initial_decomposition(s: SymTensor) -> SymDecomposition:
    """One term per nonzero coefficient ``c_I``: ``sym_d(c_I m_I e_{i_1}, e_{i_2}, ..., e_{i_d})``.

    ``m_I`` is the number of permutations of ``I``, which undoes the
    averaging inside ``sym_d``.
    """
    nz = np.flatnonzero(s.coeffs)
    if nz.size == 0:
        raise ValueError("initial decomposition of the zero tensor requested")
    idx = s.indices[nz]
    f = np.zeros((s.d, s.n, nz.size), dtype=s.field.dtype)
    cols = np.arange(nz.size)
    for slot in range(s.d):
        f[slot, idx[:, slot], cols] = 1.0
    f[0] *= s.coeffs[nz] * multiplicities(s.n, s.d)[nz]
    return SymDecomposition(f, s.field)


def _sym_operator(others: np.ndarray, n: int) -> np.ndarray:
    """``op[I, i, s]``: coefficient at sorted index ``I`` of ``sym(others_i, e_s)``.

    ``others`` has shape ``(d-1, n, K)``.
    """
    dm1, _, k = others.shape
    basis = np.broadcast_to(np.eye(n)[:, :, None], (n, n, k))
    batch = np.concatenate([
        np.repeat(others[:, :, None, :], n, axis=2),       # (d-1, n, n_s, K)
        np.transpose(basis, (1, 0, 2))[None],                # slot holding e_s
    ]).reshape(dm1 + 1, n, n * k)
    coeffs = sym_coefficients(batch)                          # (num_I, n_s * K)
    return np.transpose(coeffs.reshape(-1, n, k), (0, 2, 1))


def _sym_step(dec: SymDecomposition, target: SymTensor, slot: int, budget: int,
              rng: np.random.Generator, solver: SolverOptions) -> tuple[SymDecomposition, float]:
    f = dec.factors
    d, n, _ = f.shape
    norms = np.linalg.norm(f, axis=1)
    keep = np.all(norms > 0, axis=0)
    f, norms = f[:, :, keep], norms[:, keep]
    absorbed = np.prod(np.delete(norms, slot, axis=0), axis=0)
    f = f / norms[:, None, :]
    f[slot] = dec.factors[slot][:, keep] * absorbed
    pad = budget - f.shape[2]
    if pad < 0:
        raise BudgetError(f"decomposition has {f.shape[2]} terms, budget is {budget}")
    if pad:
        fill = np.zeros((d, n, pad), dtype=dec.field.dtype)
        for j in range(d):
            if j != slot:
                fill[j] = np.stack([random_unit(n, dec.field, rng) for _ in range(pad)], axis=1)
        f = np.concatenate([f, fill], axis=2)
    others = np.delete(f, slot, axis=0)
    scale = np.sqrt(multiplicities(n, d))
    op = _sym_operator(others, n) * scale[:, None, None]
    prob = MinSumNormsProblem(op, target.coeffs * scale, np.ones(f.shape[2]), dec.field)
    sol = solve(prob, solver, warm_start=f[slot])
    if sol.status is Status.INFEASIBLE:
        raise RuntimeError("symmetric alternating step became infeasible")
    f = f.copy()
    f[slot] = sol.blocks
    new = SymDecomposition(f, dec.field)
    return new, new.bound()


def _sym_prune(dec: SymDecomposition, slot: int, phi: float, tol: float) -> SymDecomposition:
    keep = np.linalg.norm(dec.factors[slot], axis=0) >= tol * phi
    return SymDecomposition(dec.factors[:, :, keep], dec.field)


def _recover_witness(dec: SymDecomposition, tol: float = 1e-8):
    """Rewrite every term as ``eps_i z_i^{(x) d}`` when all its slots are parallel."""
    d = dec.factors.shape[0]
    out = []
    for i in range(dec.rank):
        ys = dec.factors[:, :, i]
        nrm = np.linalg.norm(ys, axis=1)
        if np.any(nrm == 0):
            return None
        u = ys[0] / nrm[0]
        amps = ys @ u.conj()
        if np.any(np.abs(np.abs(amps) - nrm) > tol * nrm):
            return None
        c = np.prod(amps)
        if dec.field is Field.COMPLEX:
            z = abs(c) ** (1 / d) * np.exp(1j * np.angle(c) / d) * u
            out.append(SymRankOneTerm(z, 1))
        else:
            c = float(np.real(c))
            sign = 1 if c >= 0 else -1
            if d % 2:
                out.append(SymRankOneTerm(sign * abs(c) ** (1 / d) * u.real, 1))
            else:
                out.append(SymRankOneTerm(abs(c) ** (1 / d) * u.real, sign))
    return out


def _sym_alternate(s: SymTensor, opts: AltOptions, budget: int, restart: int):
    rng = np.random.default_rng([opts.rng_seed, restart])
    if opts.canonical_start(restart):
        dec = sym_initial_decomposition(s)
    else:
        dec = SymDecomposition(np.zeros((s.d, s.n, 0), dtype=s.field.dtype), s.field)
    values = []
    status = "MaxIter"
    for _ in range(opts.max_outer):
        done = False
        for slot in range(s.d):
            dec, phi = _sym_step(dec, s, slot, budget, rng, opts.solver)
            dec = _sym_prune(dec, slot, phi, opts.prune_tol)
            values.append(phi)
            if opts.stop_rule == "mode" and _stop(values, s.d, opts.eps, "mode"):
                done = True
                break
        if done or (opts.stop_rule == "sweep" and _stop(values, s.d, opts.eps, "sweep")):
            status = "Converged"
            break
    return dec, np.asarray(values), status


def sym_nuclear_upper(s: SymTensor, field=None, opts: AltOptions | None = None) -> NuclearResult:
    """Upper bound on the nuclear norm of a symmetric tensor from symmetric terms.

    The bound is also valid for the densified tensor.  When every term of the
    best decomposition has parallel slots, ``decomposition.witness`` lists the
    equivalent signed symmetric rank-one terms.
    """
    opts = opts or AltOptions()
    if field is not None:
        s = s.with_field(field)
    if not np.any(s.coeffs):
        raise ValueError("nuclear norm bound of the zero tensor requested")
    budget = opts.term_budget_override or sym_term_budget(s.n, s.d, s.field, opts.budget_convention)
    if budget > opts.budget_cap:
        raise BudgetError(f"term budget {budget} exceeds cap {opts.budget_cap}")

    runs = parallel_map(lambda r: _sym_alternate(s, opts, budget, r), range(opts.restarts), opts.workers)
    finals = [dec.bound() for dec, _, _ in runs]
    best = int(np.argmin(finals))
    dec, hist, status = runs[best]
    dec.witness = _recover_witness(dec)
    res = dec.residual(s)
    if res > RECON_TOL * sym_hs_norm(s):
        status = "ReconstructionFailed"
    return NuclearResult(
        value=dec.bound(),
        decomposition=dec,
        history=hist,
        active_terms=dec.rank,
        status=status,
        field=s.field,
        residual=res,
        restarts_used=len(runs),
        histories=[h for _, h, _ in runs],
        values=finals,
    )


# -------------------------------------------------------------------- measures

def _norm_of(t) -> float:
    return sym_hs_norm(t) if isinstance(t, SymTensor) else hs_norm(t)


def duality_gap(t, field, spectral_result: SpectralResult, nuclear_result: NuclearResult,
                tol: float = 2e-3) -> DualityProduct:
    """Product of the two bounds; ``tight`` when it matches ``||T||^2`` within ``tol``."""
    if field is not None and Field.parse(field) is not nuclear_result.field:
        raise ValueError("nuclear result was computed over a different field")
    hs2 = _norm_of(t) ** 2
    prod = nuclear_result.value * spectral_result.value
    return DualityProduct(float(prod), float(hs2), bool(abs(prod - hs2) <= tol * max(hs2, 1.0)))


def omega(t, nuclear_result: NuclearResult) -> float:
    """``log2`` of the squared nuclear upper bound of a unit state."""
    norm = _norm_of(t)
    if abs(norm - 1) > UNIT_TOL:
        raise ValueError(f"state must have unit norm, got {norm:.12g}")
    return float(np.log2(nuclear_result.value ** 2))
