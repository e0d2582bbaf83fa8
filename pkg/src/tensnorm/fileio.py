"""JSON file formats for tensors and decompositions, and report rendering.

Floats are written with Python's shortest round-trip representation, which
never needs more than 17 significant digits, so ``load(save(x))`` is exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np

from .nuclear import SymDecomposition
from .quantum import DensityTensor
from .symtensor import SymTensor, densify, sym_from_dense
from .tensor_core import Field, RankOneDecomposition, Tensor, as_tensor, total_size

__all__ = [
    "SCHEMA_VERSION",
    "TensorFileError",
    "tensor_to_doc",
    "tensor_from_doc",
    "save_tensor",
    "load_tensor",
    "load_density",
    "decomposition_to_doc",
    "decomposition_from_doc",
    "save_decomposition",
    "load_decomposition",
    "format_decimal",
    "emit_report",
    "REPORT_COLUMNS",
]

SCHEMA_VERSION = 1
REPORT_COLUMNS = ("name", "nuc_R", "nuc_C", "spec_R", "spec_C", "P_R", "P_C")


class TensorFileError(ValueError):
    """Malformed or inconsistent file contents."""


def _pairs(arr) -> list:
    flat = np.asarray(arr).ravel()
    if np.iscomplexobj(flat):
        return [[float(z.real), float(z.imag)] for z in flat]
    return [[float(x), 0.0] for x in flat]


def _unpairs(entries, count: int, what: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != count:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise TensorFileError(f"{what}: expected {count} entries, got {got}")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise TensorFileError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.shape != (count, 2):
        raise TensorFileError(f"{what}: entries must be [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise TensorFileError(f"{what}: non-finite entry")
    return arr[:, 0] + 1j * arr[:, 1]


def _field(doc) -> Field:
    try:
        return Field.parse(doc["field"])
    except (KeyError, ValueError) as exc:
        raise TensorFileError("missing or unknown field tag") from exc


def _shape(doc) -> tuple:
    shape = doc.get("shape")
    if not isinstance(shape, list) or not all(isinstance(n, int) and n >= 1 for n in shape):
        raise TensorFileError(f"shape must be a list of positive integers, got {shape!r}")
    return tuple(shape)


def _finish(vals: np.ndarray, field: Field, what: str) -> np.ndarray:
    if field is Field.REAL:
        if np.any(vals.imag != 0):
            raise TensorFileError(f"{what}: real-tagged data has nonzero imaginary parts")
        return vals.real.copy()
    return vals


def tensor_to_doc(t, metadata: dict | None = None) -> dict:
    if isinstance(t, DensityTensor):
        doc = tensor_to_doc(t.tensor, metadata)
        doc["kind"] = "density"
        doc["base_shape"] = list(t.base_shape)
        return doc
    t = as_tensor(t)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "tensor",
        "shape": list(t.shape),
        "field": t.field.value,
        "entries": _pairs(t.data),
    }
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def _check_version(doc):
    if not isinstance(doc, dict):
        raise TensorFileError("top-level JSON value must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise TensorFileError(f"unsupported schema_version {doc.get('schema_version')!r}")


def tensor_from_doc(doc) -> Tensor:
    _check_version(doc)
    shape = _shape(doc)
    field = _field(doc)
    vals = _unpairs(doc.get("entries"), total_size(shape), "tensor")
    return Tensor(_finish(vals, field, "tensor").reshape(shape), field)


def _write(doc, path):
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _read(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"{path}: not valid JSON ({exc.msg})") from exc


def save_tensor(t, path, metadata: dict | None = None) -> None:
    _write(tensor_to_doc(t, metadata), path)


def load_tensor(path) -> Tensor:
    return tensor_from_doc(_read(path))


def load_density(path, check: bool = True) -> DensityTensor:
    """Load a density tensor; a plain tensor file is accepted when its modes pair up.

    Validation failures (not hermitian, not PSD, trace not one) raise a plain
    ``ValueError`` so callers can tell them apart from malformed files.
    """
    doc = _read(path)
    t = tensor_from_doc(doc)
    base = doc.get("base_shape")
    return DensityTensor.from_array(t.data, None if base is None else tuple(base), check)


def decomposition_to_doc(dec, target=None) -> dict:
    """Serialize a decomposition with its bound and, given ``target``, its residual."""
    if isinstance(dec, SymDecomposition):
        d, n, k = dec.factors.shape
        terms = [{"factors": [_pairs(dec.factors[j, :, i]) for j in range(d)], "sign": 1}
                 for i in range(k)]
        doc = {"kind": "symmetric", "shape": [n] * d}
        target_t = None if target is None else (
            target if isinstance(target, SymTensor) else sym_from_dense(target))
    elif isinstance(dec, RankOneDecomposition):
        signs = np.ones(dec.rank) if dec.signs is None else dec.signs
        terms = [{"factors": [_pairs(f[:, i]) for f in dec.factors], "sign": float(signs[i])}
                 for i in range(dec.rank)]
        doc = {"kind": "general", "shape": list(dec.shape)}
        target_t = None if target is None else as_tensor(target)
    else:
        raise TypeError(f"cannot serialize {type(dec).__name__}")
    doc = {"schema_version": SCHEMA_VERSION, **doc, "field": dec.field.value, "terms": terms,
           "bound": dec.bound()}
    if target_t is not None:
        doc["residual"] = dec.residual(target_t)
        dense = target_t if isinstance(target_t, Tensor) else densify(target_t)
        doc["target"] = _pairs(dense.data)
    return doc


def decomposition_from_doc(doc):
    """Rebuild a decomposition; returns ``(decomposition, target or None)``."""
    _check_version(doc)
    shape = _shape(doc)
    field = _field(doc)
    terms = doc.get("terms")
    if not isinstance(terms, list):
        raise TensorFileError("terms must be a list")
    factors = [[] for _ in shape]
    signs = []
    for t_i, term in enumerate(terms):
        fs = term.get("factors") if isinstance(term, dict) else None
        if not isinstance(fs, list) or len(fs) != len(shape):
            raise TensorFileError(f"term {t_i}: expected {len(shape)} factors")
        for j, (n, f) in enumerate(zip(shape, fs)):
            factors[j].append(_finish(_unpairs(f, n, f"term {t_i} factor {j}"), field, "factor"))
        signs.append(float(term.get("sign", 1)))
    kind = doc.get("kind", "general")
    dtype = field.dtype
    mats = [np.array(fj, dtype=dtype).reshape(len(terms), n).T for n, fj in zip(shape, factors)]
    if kind == "symmetric":
        if len(set(shape)) != 1:
            raise TensorFileError("symmetric decomposition needs equal mode dimensions")
        dec = SymDecomposition(np.stack(mats) if mats else np.zeros((0, 0, 0)), field)
    elif kind == "general":
        s = np.array(signs)
        dec = RankOneDecomposition(mats, field, None if np.all(s == 1) else s)
    else:
        raise TensorFileError(f"unknown decomposition kind {kind!r}")
    target = None
    if "target" in doc:
        vals = _unpairs(doc["target"], total_size(shape), "target")
        target = Tensor(_finish(vals, field, "target").reshape(shape), field)
        if kind == "symmetric":
            target = sym_from_dense(target)
    return dec, target


def save_decomposition(dec, path, target=None) -> None:
    _write(decomposition_to_doc(dec, target), path)


def load_decomposition(path):
    return decomposition_from_doc(_read(path))


def format_decimal(x, places: int = 4) -> str:
    """Fixed-point rendering with round-half-even on the shortest decimal form of ``x``."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    q = Decimal(repr(x)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    if q.is_zero():
        q = abs(q)
    return f"{q:f}"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating, int, np.integer)) and not isinstance(v, bool):
        return format_decimal(v)
    return "" if v is None else str(v)


def _columns(rows, columns):
    if columns is not None:
        return list(columns)
    if not rows:
        return list(REPORT_COLUMNS)
    cols = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    return cols


def _json_safe(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def emit_report(results, format: str = "table", columns=None) -> str:
    """Render result rows (dicts) as an aligned table, CSV or JSON.

    Numbers are shown with four decimals in ``table`` and ``csv`` output;
    ``json`` keeps full precision.  An empty result list renders the header
    only.
    """
    rows = [dict(r) for r in results]
    cols = _columns(rows, columns)
    if format == "json":
        return json.dumps([{c: _json_safe(r.get(c)) for c in cols} for r in rows], indent=2)
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows(cells)
        return buf.getvalue()
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip(),
             "  ".join("-" * w for w in widths)]
    for row in cells:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
