"""Random-state experiments: sample states, bound their norms, report extremes."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._parallel import parallel_map
from .nuclear import AltOptions, nuclear_upper, sym_nuclear_upper
from .quantum import DensityTensor, separable_mixture
from .spectral import random_unit, spectral_lower, sym_spectral_lower
from .symtensor import project_symmetric
from .tensor_core import Field, Tensor, as_tensor, hs_norm, total_size

__all__ = [
    "OBJECTIVES",
    "ExperimentConfig",
    "ExperimentReport",
    "random_state",
    "random_separable_density",
    "run_experiment",
]

OBJECTIVES = ("max-nuclear", "min-spectral", "max-product")
ROW_COLUMNS = ("sample", "seed", "nuclear", "spectral", "product", "eta", "omega", "iterations",
               "nuclear_time", "spectral_time", "status", "error")


def random_state(shape, field, rng: np.random.Generator) -> Tensor:
    """Unit tensor with i.i.d. Gaussian entries.

    Complex entries have independent real and imaginary parts of variance
    1/2, so the ensemble is invariant under local unitaries.
    """
    field = Field.parse(field)
    shape = tuple(int(n) for n in shape)
    total_size(shape)
    if field is Field.REAL:
        arr = rng.standard_normal(shape)
    else:
        arr = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return Tensor(arr / np.linalg.norm(arr), field)


def random_separable_density(shape, field, rng: np.random.Generator) -> DensityTensor:
    """Convex mixture of ``r`` random product states, ``r`` uniform in ``[1, 2 prod n]``."""
    field = Field.parse(field)
    shape = tuple(int(n) for n in shape)
    r = int(rng.integers(1, 2 * total_size(shape) + 1))
    weights = rng.random(r)
    probs = weights / weights.sum()
    states = [[random_unit(n, field, rng) for n in shape] for _ in range(r)]
    return separable_mixture(probs, states)


@dataclass(frozen=True)
class ExperimentConfig:
    shape: tuple
    field: Field = Field.COMPLEX
    num_samples: int = 50
    restarts: int = 30
    rng_seed: int = 0
    objective: str = "max-nuclear"
    symmetric: bool = False
    spectral_restarts: int = 30
    eps: float = 1e-6
    max_outer: int = 100
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "field", Field.parse(self.field))
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.symmetric and len(set(self.shape)) != 1:
            raise ValueError("symmetric experiments need equal mode dimensions")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    best_index: int | None
    best_state: Tensor | None
    best_values: dict
    summary: dict = dc_field(default_factory=dict)
    wall_time: float = 0.0

    def to_csv(self) -> str:
        """Per-sample rows, one line each, in sample order."""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=ROW_COLUMNS, restval="", lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: row.get(k, "") for k in ROW_COLUMNS})
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = self.config
        doc = {
            "config": {
                "shape": list(cfg.shape), "field": cfg.field.value, "num_samples": cfg.num_samples,
                "restarts": cfg.restarts, "rng_seed": cfg.rng_seed, "objective": cfg.objective,
                "symmetric": cfg.symmetric, "spectral_restarts": cfg.spectral_restarts,
                "eps": cfg.eps, "max_outer": cfg.max_outer,
            },
            "best_index": self.best_index,
            "best_values": self.best_values,
            "best_state": None if self.best_state is None else
            [[float(z.real), float(z.imag)] for z in np.asarray(self.best_state.data, complex).ravel()],
            "summary": self.summary,
            "wall_time": self.wall_time,
            "rows": [{k: row.get(k) for k in ROW_COLUMNS if k in row} for row in self.rows],
        }
        return json.dumps(doc, indent=2)


def _sample_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _evaluate(cfg: ExperimentConfig, index: int, state) -> dict:
    row = {"sample": index, "seed": _sample_seed(cfg.rng_seed, index)}
    try:
        if state is None:
            state = random_state(cfg.shape, cfg.field, np.random.default_rng([cfg.rng_seed, index]))
        state = as_tensor(state, cfg.field)
        opts = AltOptions(eps=cfg.eps, max_outer=cfg.max_outer, restarts=cfg.restarts,
                          rng_seed=row["seed"])
        t0 = time.perf_counter()
        if cfg.symmetric:
            sym = project_symmetric(state)
            nuc = sym_nuclear_upper(sym, cfg.field, opts)
        else:
            nuc = nuclear_upper(state, cfg.field, opts)
        t1 = time.perf_counter()
        if cfg.symmetric:
            spec = sym_spectral_lower(sym, cfg.field, restarts=cfg.spectral_restarts, seed=row["seed"])
        else:
            spec = spectral_lower(state, cfg.field, restarts=cfg.spectral_restarts, seed=row["seed"])
        t2 = time.perf_counter()
        norm2 = hs_norm(state) ** 2
        row.update(
            nuclear=nuc.value,
            spectral=spec.value,
            product=nuc.value * spec.value / norm2,
            eta=float(-np.log2(spec.value ** 2 / norm2)),
            omega=float(np.log2(nuc.value ** 2 / norm2)),
            iterations=int(np.mean([len(h) for h in nuc.histories])),
            nuclear_time=t1 - t0,
            spectral_time=t2 - t1,
            status=nuc.status,
            error="",
        )
        row["_state"] = state
    except Exception as exc:  # recorded per sample, the experiment carries on
        row.update(error=f"{type(exc).__name__}: {exc}")
    return row


def run_experiment(cfg: ExperimentConfig, states=None) -> ExperimentReport:
    """Evaluate ``cfg.num_samples`` states and pick the extreme one.

    Sample ``i`` draws its state from a generator seeded with
    ``(cfg.rng_seed, i)`` unless ``states`` supplies it, so results do not
    depend on the order in which workers finish.
    """
    if states is not None:
        states = list(states)
        if len(states) != cfg.num_samples:
            raise ValueError("need exactly one injected state per sample")
    t0 = time.perf_counter()
    rows = parallel_map(lambda i: _evaluate(cfg, i, None if states is None else states[i]),
                        range(cfg.num_samples), cfg.workers)
    wall = time.perf_counter() - t0
    good = [r for r in rows if not r["error"]]
    best = None
    if good:
        key = {"max-nuclear": lambda r: r["nuclear"],
               "min-spectral": lambda r: -r["spectral"],
               "max-product": lambda r: r["product"]}[cfg.objective]
        best = max(good, key=key)  # first sample wins ties
    summary = {}
    for col in ("nuclear", "spectral", "product", "iterations", "nuclear_time", "spectral_time"):
        vals = np.array([r[col] for r in good], dtype=float)
        if vals.size:
            summary[col] = {"min": float(vals.min()), "avg": float(vals.mean()), "max": float(vals.max())}
    best_state = best.get("_state") if best else None
    for r in rows:
        r.pop("_state", None)
    best_values = {}
    if best:
        best_values = {k: best[k] for k in ("nuclear", "spectral", "product", "eta", "omega")}
    return ExperimentReport(cfg, rows, best["sample"] if best else None, best_state, best_values,
                            summary, wall)
