"""Command-line entry point: ``tensnorm <subcommand> ...``.

Exit status is 0 on success, 2 for unusable input (bad flags, unreadable or
malformed files), 3 when a computation fails numerically and 4 when the input
is well formed but mathematically inconsistent (e.g. a density tensor that is
not PSD, or a state that is not normalised).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .fileio import (TensorFileError, emit_report, load_density, load_tensor, save_decomposition,
                     save_tensor, tensor_to_doc)
from .mnorm_socp import SolverOptions
from .nuclear import AltOptions, BudgetError, nuclear_upper, sym_nuclear_upper
from .quantum import known_state, known_state_names, qubit_bounds, separability_check
from .search import OBJECTIVES, ExperimentConfig, run_experiment
from .spectral import spectral_lower, sym_spectral_lower
from .symtensor import sym_from_dense
from .tensor_core import Field, hs_norm

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INCONSISTENT = 0, 2, 3, 4


class NumericalFailure(RuntimeError):
    pass


def _field(text):
    try:
        return Field.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _shape(text):
    try:
        shape = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must be comma-separated integers, got {text!r}") from None
    if not shape or min(shape) < 1:
        raise argparse.ArgumentTypeError("shape entries must be positive")
    return shape


def _number(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _param(text):
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"parameters look like key=value, got {text!r}")
    return key, _number(val)


def _modes(text):
    try:
        modes = tuple(int(p) - 1 for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"modes must be comma-separated integers, got {text!r}") from None
    if min(modes) < 0:
        raise argparse.ArgumentTypeError("modes are numbered from 1")
    return modes


def _common(p, restarts=30, max_iter=None):
    p.add_argument("--input", "-i", help="tensor file (JSON)")
    p.add_argument("--field", type=_field, default=None, help="R or C (default: the file's tag)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--eps", type=float, default=1e-6, help="stopping tolerance")
    p.add_argument("--max-iter", type=int, default=max_iter, help="outer iteration cap")
    p.add_argument("--out", "-o", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")


def _nuclear_flags(p):
    p.add_argument("--socp-tol", type=float, default=None, help="inner solver relative tolerance")
    p.add_argument("--socp-max-iter", type=int, default=None, help="inner solver iteration cap")
    p.add_argument("--solver", choices=("ipm", "admm"), default="ipm")
    p.add_argument("--symmetric", action="store_true", help="treat the input as a symmetric tensor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensnorm", description="Spectral and nuclear norm bounds for tensors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="lower bound on the spectral norm")
    _common(p, max_iter=500)
    p.add_argument("--symmetric", action="store_true", help="restrict to symmetric witnesses")

    p = sub.add_parser("nuclear", help="upper bound on the nuclear norm")
    _common(p, max_iter=100)
    _nuclear_flags(p)
    p.add_argument("--emit-decomposition", metavar="PATH", help="save the best decomposition")

    p = sub.add_parser("measure", help="both bounds and the entanglement measures of a unit state")
    _common(p, max_iter=100)
    _nuclear_flags(p)

    p = sub.add_parser("separability", help="nuclear-norm and PPT separability test")
    _common(p, max_iter=100)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--ppt", type=_modes, action="append", metavar="MODES",
                   help="1-based modes to transpose, e.g. 1 or 1,2 (repeatable; default: all bipartitions)")
    p.add_argument("--socp-tol", type=float, default=None)
    p.add_argument("--socp-max-iter", type=int, default=None)

    p = sub.add_parser("known-state", help="write a catalogue state to a tensor file")
    p.add_argument("name", choices=known_state_names())
    p.add_argument("--param", "-p", type=_param, action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; states are deterministic")
    p.add_argument("--out", "-o", help="output file (default: stdout)")

    p = sub.add_parser("search", help="random-state experiment")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--field", type=_field, default=Field.COMPLEX)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--restarts", type=int, default=30)
    p.add_argument("--spectral-restarts", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--objective", choices=OBJECTIVES, default="max-nuclear")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--csv", help="per-sample rows as CSV")
    p.add_argument("--json", help="full report as JSON")
    p.add_argument("--out", "-o", help="write the summary here instead of stdout")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")

    p = sub.add_parser("bounds", help="known extremal nuclear and spectral values for a shape")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--field", type=_field, default=Field.COMPLEX)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; output is deterministic")
    p.add_argument("--out", "-o")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    return parser


def _emit(args, rows, columns=None):
    text = emit_report(rows, args.format, columns)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _require_input(args):
    if not args.input:
        raise TensorFileError("--input is required")
    return load_tensor(args.input)


def _alt_options(args) -> AltOptions:
    solver = SolverOptions(method=getattr(args, "solver", "ipm"))
    if args.socp_tol is not None:
        solver = dataclasses.replace(solver, tol_rel=args.socp_tol)
    if args.socp_max_iter is not None:
        solver = dataclasses.replace(solver, max_iter=args.socp_max_iter, ipm_max_iter=args.socp_max_iter)
    return AltOptions(eps=args.eps, max_outer=args.max_iter, restarts=args.restarts,
                      rng_seed=args.seed, solver=solver)


def _nuclear(t, args):
    opts = _alt_options(args)
    if getattr(args, "symmetric", False):
        res = sym_nuclear_upper(sym_from_dense(t), args.field, opts)
    else:
        res = nuclear_upper(t, args.field, opts)
    if res.status == "ReconstructionFailed":
        raise NumericalFailure(f"decomposition does not reproduce the tensor (residual {res.residual:.2e})")
    if res.status != "Converged":
        print(f"warning: alternating method stopped with status {res.status}", file=sys.stderr)
    return res


def _spectral(t, args, iters):
    kw = dict(restarts=args.restarts, iters=iters, seed=args.seed)
    if getattr(args, "symmetric", False):
        return sym_spectral_lower(sym_from_dense(t), args.field, **kw)
    return spectral_lower(t, args.field, **kw)


def cmd_spectral(args):
    t = _require_input(args)
    res = _spectral(t, args, args.max_iter)
    _emit(args, [{"field": res.field.value, "spectral": res.value, "restarts": res.restarts_used,
                  "converged": res.converged}])


def cmd_nuclear(args):
    t = _require_input(args)
    res = _nuclear(t, args)
    if args.emit_decomposition:
        target = sym_from_dense(t) if args.symmetric else t
        save_decomposition(res.decomposition, args.emit_decomposition, target)
    _emit(args, [{"field": res.field.value, "nuclear": res.value, "terms": res.active_terms,
                  "residual": res.residual, "status": res.status, "restarts": res.restarts_used}])


def cmd_measure(args):
    t = _require_input(args)
    norm = hs_norm(t)
    if abs(norm - 1) > 1e-8:
        raise ValueError(f"state must have unit norm, got {norm:.12g}")
    nuc = _nuclear(t, args)
    spec = _spectral(t, args, 500)
    _emit(args, [{"field": nuc.field.value, "nuclear": nuc.value, "spectral": spec.value,
                  "P": nuc.value * spec.value, "eta": -np.log2(spec.value ** 2),
                  "omega": np.log2(nuc.value ** 2)}])


def cmd_separability(args):
    if not args.input:
        raise TensorFileError("--input is required")
    rho = load_density(args.input)
    args.field = Field.COMPLEX
    v = separability_check(rho, args.margin, _alt_options(args), args.ppt)
    if v.nuclear is not None and v.nuclear.status == "ReconstructionFailed":
        raise NumericalFailure("decomposition does not reproduce the density tensor")
    ppt = ";".join(f"{'+'.join(str(m + 1) for m in s)}:{'pass' if ok else 'fail'}"
                   for s, ok in v.ppt_passed.items())
    _emit(args, [{"verdict": v.status.value, "nuclear": v.nuclear_value, "margin": v.margin,
                  "ppt": ppt, "heuristic": v.heuristic}])


def cmd_known_state(args):
    state = known_state(args.name, **dict(args.param))
    meta = {"name": args.name, **{k: str(v) for k, v in args.param}}
    if args.out:
        save_tensor(state, args.out, meta)
    else:
        sys.stdout.write(json.dumps(tensor_to_doc(state, meta)) + "\n")


def cmd_search(args):
    cfg = ExperimentConfig(args.shape, args.field, args.samples, args.restarts, args.seed,
                           args.objective, args.symmetric, args.spectral_restarts, args.eps,
                           args.max_iter)
    rep = run_experiment(cfg)
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    if args.json:
        Path(args.json).write_text(rep.to_json())
    failed = sum(1 for r in rep.rows if r["error"])
    rows = [{"statistic": k, **v} for k, v in rep.summary.items()]
    _emit(args, rows, ["statistic", "min", "avg", "max"])
    if rep.best_index is None:
        raise NumericalFailure(f"all {failed} samples failed")
    best = ", ".join(f"{k}={v:.4f}" for k, v in rep.best_values.items())
    print(f"best sample {rep.best_index}: {best}", file=sys.stderr)


def cmd_bounds(args):
    rows = [{"quantity": b.quantity, "value": b.value, "kind": b.kind, "source": b.source}
            for b in qubit_bounds(args.shape, args.field)]
    _emit(args, rows, ["quantity", "value", "kind", "source"])


COMMANDS = {
    "spectral": cmd_spectral,
    "nuclear": cmd_nuclear,
    "measure": cmd_measure,
    "separability": cmd_separability,
    "known-state": cmd_known_state,
    "search": cmd_search,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (TensorFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, BudgetError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"inconsistent input: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
