"""Minimum weighted sum of Euclidean norms under a linear constraint.

The problem solved here is::

    minimise   sum_i w_i ||y_i||
    subject to sum_i B_i y_i = b

with blocks ``y_i`` in F^n and linear maps ``B_i : F^n -> F^p``.  The matrix
form ``sum_i y_i v_i^T = A`` used by the alternating nuclear-norm method is
the special case ``B_i y = vec(y v_i^T)``.

Two solvers are available.  ``"ipm"`` writes the program as a second-order
cone program and hands it to the Clarabel interior-point solver.  ``"admm"``
is a self-contained splitting method that alternates the affine projection
with block soft-thresholding.  Both results are projected exactly onto the
constraint; an optional polish step also snaps near-zero blocks to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .tensor_core import Field

__all__ = [
    "Status",
    "SolverOptions",
    "MinSumNormsProblem",
    "MinSumNormsSolution",
    "solve",
    "affine_project",
    "dual_bound",
    "estimate_multiplier",
    "polish",
]


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolverOptions:
    """Options for :func:`solve`.

    ``tol_abs``/``tol_rel`` drive the stopping tests of both solvers;
    ``max_iter`` bounds the splitting iterations (the interior-point solver
    is capped at ``min(max_iter, ipm_max_iter)``).  ``rho`` is the initial
    ADMM penalty.  ``polish`` snaps near-zero blocks to exact zeros; it is
    off by default because the interior-point solution spreads weight over
    all optimal blocks, which helps the alternating method leave flat
    regions.  A warm start is kept only when the new point is worse by more
    than ``guard_slack`` relative.
    """

    method: str = "ipm"
    tol_abs: float = 1e-9
    tol_rel: float = 1e-7
    max_iter: int = 50000
    rho: float = 1.0
    weight_floor: float = 1e-12
    feas_tol: float = 1e-9
    ipm_max_iter: int = 500
    polish: bool = False
    guard_slack: float = 1e-9

    def __post_init__(self):
        if self.method not in ("ipm", "admm"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.tol_abs <= 0 or self.tol_rel <= 0 or self.max_iter < 1 or self.rho <= 0:
            raise ValueError("solver tolerances, max_iter and rho must be positive")


class _RangeBasis:
    """Thin SVD of the stacked operator, shared by projection and feasibility."""

    def __init__(self, mat: np.ndarray):
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        tol = max(mat.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        r = int(np.sum(s > tol))
        self.u, self.s, self.vh = u[:, :r], s[:r], vh[:r]

    def min_norm_solution(self, rhs):
        return self.vh.conj().T @ ((self.u.conj().T @ rhs) / self.s)

    def range_residual(self, rhs) -> float:
        return float(np.linalg.norm(rhs - self.u @ (self.u.conj().T @ rhs)))


@dataclass
class MinSumNormsProblem:
    """One instance of the minimum-sum-of-norms program.

    ``operator`` has shape ``(p, Q, n)``: ``operator[:, i, :]`` is the matrix
    of ``B_i``.  ``target`` is the right-hand side ``b`` of length ``p``.
    When built with :meth:`from_factors` the matrix data ``A`` and ``V``
    (column ``i`` is ``v_i``) are kept as well.
    """

    operator: np.ndarray
    target: np.ndarray
    weights: np.ndarray
    field: Field = Field.COMPLEX
    target_matrix: np.ndarray | None = None
    fixed_factors: np.ndarray | None = None

    def __post_init__(self):
        self.field = Field.parse(self.field)
        dt = self.field.dtype
        op = np.asarray(self.operator)
        tgt = np.asarray(self.target).ravel()
        if self.field is Field.REAL and (np.iscomplexobj(op) and np.any(op.imag) or
                                         np.iscomplexobj(tgt) and np.any(tgt.imag)):
            raise ValueError("real problem with complex data")
        self.operator = np.asarray(op.real if self.field is Field.REAL else op, dtype=dt)
        self.target = np.asarray(tgt.real if self.field is Field.REAL else tgt, dtype=dt)
        if self.operator.ndim != 3:
            raise ValueError("operator must have shape (p, Q, n)")
        if self.operator.shape[0] != self.target.size:
            raise ValueError("operator rows do not match target length")
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != self.Q:
            raise ValueError(f"expected {self.Q} weights, got {w.size}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        self.weights = w
        self._basis = None

    @classmethod
    def from_factors(cls, target_matrix, fixed_factors, weights=None, field=Field.COMPLEX):
        """Problem ``min sum w_i ||y_i||`` s.t. ``sum_i y_i v_i^T = A``.

        ``target_matrix`` is ``A`` (n x m) and ``fixed_factors`` is the m x Q
        matrix whose columns are the ``v_i``.
        """
        field = Field.parse(field)
        a = np.atleast_2d(np.asarray(target_matrix))
        v = np.atleast_2d(np.asarray(fixed_factors))
        if a.shape[1] != v.shape[0]:
            raise ValueError(f"A is {a.shape} but factors have length {v.shape[0]}")
        if np.any(np.linalg.norm(v, axis=0) == 0):
            raise ValueError("fixed factors must be nonzero")
        n, q = a.shape[0], v.shape[1]
        op = np.einsum("ci,rs->rcis", v, np.eye(n)).reshape(n * v.shape[0], q, n)
        w = np.ones(q) if weights is None else weights
        prob = cls(op, a.ravel(), w, field)
        prob.target_matrix = prob.target.reshape(a.shape)
        prob.fixed_factors = np.asarray(v, dtype=field.dtype)
        return prob

    @property
    def p(self) -> int:
        return self.operator.shape[0]

    @property
    def Q(self) -> int:
        return self.operator.shape[1]

    @property
    def n(self) -> int:
        return self.operator.shape[2]

    @property
    def matrix(self) -> np.ndarray:
        """The operator as a ``p x (Q n)`` matrix acting on ``Y.T.ravel()``."""
        return self.operator.reshape(self.p, self.Q * self.n)

    @property
    def basis(self) -> _RangeBasis:
        if self._basis is None:
            self._basis = _RangeBasis(self.matrix)
        return self._basis

    def apply(self, blocks: np.ndarray) -> np.ndarray:
        """``sum_i B_i y_i`` for blocks given as an ``n x Q`` array."""
        return np.einsum("pis,si->p", self.operator, blocks)

    def adjoint(self, lam: np.ndarray) -> np.ndarray:
        """``B_i^H lam`` for every block, as an ``n x Q`` array."""
        return np.einsum("pis,p->si", self.operator.conj(), lam)

    def objective(self, blocks: np.ndarray) -> float:
        return float(self.weights @ np.linalg.norm(blocks, axis=0))

    def residual(self, blocks: np.ndarray) -> float:
        return float(np.linalg.norm(self.apply(blocks) - self.target))

    def feasibility_gap(self) -> float:
        return self.basis.range_residual(self.target)


@dataclass
class MinSumNormsSolution:
    """Solver output.  ``blocks`` is ``n x Q`` with column ``i`` equal to ``y_i``."""

    blocks: np.ndarray
    objective: float
    residual: float
    iterations: int
    status: Status
    multiplier: np.ndarray | None = None
    lower_bound: float | None = None


def affine_project(blocks, problem: MinSumNormsProblem) -> np.ndarray:
    """Euclidean projection of ``blocks`` onto ``{Y : sum_i B_i y_i = b}``.

    Rank-deficient operators are handled through the thin SVD, so an
    infeasible right-hand side is replaced by its least-squares part.
    """
    blocks = np.asarray(blocks, dtype=problem.field.dtype)
    flat = blocks.T.ravel()
    basis = problem.basis
    corr = basis.vh.conj().T @ (basis.vh @ flat - (basis.u.conj().T @ problem.target) / basis.s)
    return (flat - corr).reshape(problem.Q, problem.n).T


def _support_project(blocks, problem: MinSumNormsProblem, support: np.ndarray):
    """Projection onto the constraint with blocks outside ``support`` fixed at zero."""
    sub = problem.operator[:, support, :].reshape(problem.p, -1)
    y = np.zeros_like(blocks)
    if sub.shape[1] == 0:
        return y
    flat = blocks[:, support].T.ravel()
    delta, *_ = np.linalg.lstsq(sub, problem.target - sub @ flat, rcond=None)
    y[:, support] = (flat + delta).reshape(-1, problem.n).T
    return y


def polish(blocks, problem: MinSumNormsProblem, rel_thresholds=(1e-4, 1e-6, 1e-8)):
    """Zero near-vanishing blocks and restore feasibility on the remaining support.

    Thresholds are tried from most to least aggressive; the first candidate
    that stays feasible without raising the objective is returned.  When none
    qualifies the input is merely projected onto the full constraint.
    """
    blocks = np.asarray(blocks, dtype=problem.field.dtype)
    base = affine_project(blocks, problem)
    base_obj = problem.objective(base)
    norms = np.linalg.norm(blocks, axis=0)
    top = norms.max() if norms.size else 0.0
    tol = 1e-10
    scale = max(1.0, np.linalg.norm(problem.target))
    for thr in rel_thresholds:
        support = norms > thr * top
        if support.all():
            continue
        cand = _support_project(blocks, problem, support)
        if problem.residual(cand) > tol * scale:
            continue
        if problem.objective(cand) <= base_obj * (1 + 1e-10) + 1e-14:
            return cand
    return base


def dual_bound(problem: MinSumNormsProblem, lam) -> float:
    """Lower bound on the optimum from an arbitrary multiplier ``lam``.

    Weak duality gives ``Re<lam, b> <= optimum`` whenever
    ``||B_i^H lam|| <= w_i`` for all ``i``; other multipliers are rescaled
    into that set first.
    """
    lam = np.asarray(lam)
    g = np.linalg.norm(problem.adjoint(lam), axis=0)
    w = np.maximum(problem.weights, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, g / np.where(w > 0, w, 1.0), np.where(g > 0, np.inf, 0.0))
    worst = max(1.0, float(np.max(ratio)) if ratio.size else 1.0)
    if not np.isfinite(worst):
        return 0.0
    return float(np.real(np.vdot(lam, problem.target))) / worst


def estimate_multiplier(problem: MinSumNormsProblem, blocks, active_tol=1e-8) -> np.ndarray:
    """Least-squares multiplier for the stationarity conditions of the active blocks.

    Solves ``B_i^H lam = w_i y_i / ||y_i||`` jointly over blocks whose norm
    exceeds ``active_tol`` times the largest block norm.
    """
    blocks = np.asarray(blocks)
    norms = np.linalg.norm(blocks, axis=0)
    active = norms > active_tol * max(norms.max(), np.finfo(float).tiny)
    if not active.any():
        return np.zeros(problem.p, dtype=problem.field.dtype)
    lhs = np.concatenate([problem.operator[:, i, :].conj().T for i in np.flatnonzero(active)])
    rhs = np.concatenate([problem.weights[i] * blocks[:, i] / norms[i] for i in np.flatnonzero(active)])
    lam, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return lam


def _solve_ipm(problem: MinSumNormsProblem, weights, opts: SolverOptions):
    import clarabel

    p, q, n = problem.operator.shape
    cplx = problem.field is Field.COMPLEX
    if cplx:
        br, bi = problem.operator.real, problem.operator.imag
        # block layout per i: [t_i, Re y_i, Im y_i]
        eq = np.concatenate([
            np.concatenate([np.zeros((p, q, 1)), br, -bi], axis=2),
            np.concatenate([np.zeros((p, q, 1)), bi, br], axis=2),
        ])
        rhs = np.concatenate([problem.target.real, problem.target.imag])
    else:
        eq = np.concatenate([np.zeros((p, q, 1)), problem.operator], axis=2)
        rhs = problem.target
    width = eq.shape[2]
    eq = eq.reshape(eq.shape[0], q * width)
    nvar = q * width
    if problem.basis.s.size == p:
        # full row rank: keep the sparse rows as they are
        eq_mat, rhs_red, lift = sp.csc_matrix(eq), rhs, None
    else:
        red = _RangeBasis(eq)
        eq_mat, rhs_red, lift = sp.csc_matrix(red.vh), (red.u.T @ rhs) / red.s, red
    n_eq = eq_mat.shape[0]
    a_mat = sp.vstack([eq_mat, -sp.identity(nvar, format="csc")], format="csc")
    b_vec = np.concatenate([rhs_red, np.zeros(nvar)])
    c_vec = np.zeros(nvar)
    c_vec[::width] = weights
    cones = [clarabel.ZeroConeT(n_eq)] + [clarabel.SecondOrderConeT(width)] * q
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = int(min(opts.max_iter, opts.ipm_max_iter))
    settings.tol_gap_abs = opts.tol_abs
    settings.tol_gap_rel = min(opts.tol_rel, 1e-8)
    settings.tol_feas = min(opts.tol_abs, 1e-8)
    solver = clarabel.DefaultSolver(sp.csc_matrix((nvar, nvar)), c_vec, a_mat, b_vec, cones, settings)
    sol = solver.solve()
    x = np.asarray(sol.x).reshape(q, width)
    blocks = x[:, 1:1 + n].T
    if cplx:
        blocks = blocks + 1j * x[:, 1 + n:].T
    mu = -np.asarray(sol.z)[:n_eq]
    if lift is not None:
        mu = lift.u @ (mu / lift.s)
    lam = mu[:p] + 1j * mu[p:] if cplx else mu
    ok = str(sol.status) in ("Solved", "AlmostSolved")
    return blocks, int(sol.iterations), ok, lam


def _solve_admm(problem: MinSumNormsProblem, weights, opts: SolverOptions, start):
    z = np.array(start, dtype=problem.field.dtype)
    u = np.zeros_like(z)
    rho = opts.rho
    size = np.sqrt(z.size)
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        y = affine_project(z - u, problem)
        x = y + u
        nx = np.linalg.norm(x, axis=0)
        shrink = np.maximum(0.0, 1.0 - (weights / rho) / np.maximum(nx, np.finfo(float).tiny))
        z_new = x * shrink
        u = u + y - z_new
        r_norm = np.linalg.norm(y - z_new)
        s_norm = rho * np.linalg.norm(z_new - z)
        z = z_new
        eps_pri = size * opts.tol_abs + opts.tol_rel * max(np.linalg.norm(y), np.linalg.norm(z))
        eps_dual = size * opts.tol_abs + opts.tol_rel * rho * np.linalg.norm(u)
        if r_norm < eps_pri and s_norm < eps_dual:
            converged = True
            break
        if r_norm > 10 * s_norm:
            rho *= 2.0
            u /= 2.0
        elif s_norm > 10 * r_norm:
            rho /= 2.0
            u *= 2.0
    return z, it, converged


def solve(problem: MinSumNormsProblem, opts: SolverOptions | None = None,
          warm_start=None) -> MinSumNormsSolution:
    """Solve the program to the requested tolerances.

    A feasible ``warm_start`` (``n x Q``) seeds the splitting method and acts
    as a safeguard for both methods: if the computed point is worse, the warm
    start is returned, which makes repeated solves monotone.
    """
    opts = opts or SolverOptions()
    scale = max(1.0, float(np.linalg.norm(problem.target)))
    gap = problem.feasibility_gap()
    if gap > opts.feas_tol * scale:
        y = affine_project(np.zeros((problem.n, problem.Q)), problem)
        return MinSumNormsSolution(y, problem.objective(y), problem.residual(y), 0, Status.INFEASIBLE)

    weights = np.maximum(problem.weights, opts.weight_floor)
    if opts.method == "ipm":
        y, iters, ok, lam = _solve_ipm(problem, weights, opts)
    else:
        start = np.zeros((problem.n, problem.Q)) if warm_start is None else warm_start
        y, iters, ok = _solve_admm(problem, weights, opts, start)
        lam = estimate_multiplier(problem, y)

    y = polish(y, problem) if opts.polish else affine_project(y, problem)
    if warm_start is not None:
        w0 = np.asarray(warm_start, dtype=problem.field.dtype)
        obj0 = problem.objective(w0)
        if (problem.residual(w0) <= opts.feas_tol * scale
                and problem.objective(y) > obj0 * (1 + opts.guard_slack) + 1e-14):
            y = w0
    status = Status.CONVERGED if ok else Status.MAX_ITER
    return MinSumNormsSolution(
        blocks=y,
        objective=problem.objective(y),
        residual=problem.residual(y),
        iterations=iters,
        status=status,
        multiplier=lam,
        lower_bound=dual_bound(problem, lam) if lam is not None else None,
    )
