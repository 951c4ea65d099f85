"""File formats: JSON models and operators, CSV traces, JSON verdicts.

Numbers round-trip exactly (shortest-repr JSON floats, 17 significant
digits in CSV), writes are atomic (temp file + rename), and every load
re-validates: stored flags are advisory, the truth is re-derived from
the entries, and any contradiction or malformed field rejects the whole
file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import BKLabError, CorruptFileError
from .lattice import BaseSpace, BooleanAtoms, Model, VectorMeasure
from .operators import FiberedOperator
from .zerotwo import DichotomyTrace, FiberVerdict

__all__ = [
    "atomic_write_text",
    "store_model",
    "load_model",
    "store_operator",
    "load_operator",
    "write_trace_csv",
    "load_trace_csv",
    "write_verdicts",
    "load_verdicts",
]


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _model_payload(model: Model) -> dict:
    return {
        "omega_atoms": [
            {"id": k, "weight": float(w)} for k, w in enumerate(model.base.weights)
        ],
        "nabla_atom_count": model.atoms.atom_count,
        "measure": model.measure.matrix.tolist(),
    }


def _model_from_payload(payload) -> Model:
    try:
        atoms_raw = payload["omega_atoms"]
        ids = [a["id"] for a in atoms_raw]
        weights = [float(a["weight"]) for a in atoms_raw]
        if ids != list(range(len(ids))):
            raise CorruptFileError(f"omega atom ids must be 0..K-1 in order, got {ids}")
        n = int(payload["nabla_atom_count"])
        measure = np.array(payload["measure"], dtype=float)
        return Model(BaseSpace(np.array(weights)), BooleanAtoms(n), VectorMeasure(measure))
    except CorruptFileError:
        raise
    except (KeyError, TypeError, ValueError, BKLabError) as exc:
        raise CorruptFileError(f"invalid model file: {exc}") from exc


def store_model(model: Model, path) -> None:
    atomic_write_text(path, json.dumps(_model_payload(model), indent=2) + "\n")


def load_model(path) -> Model:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"cannot read model file {path}: {exc}") from exc
    return _model_from_payload(payload)


def store_operator(T: FiberedOperator, model: Model, path, *,
                   inline_model: bool = True, model_path: str | None = None,
                   majorant_ref: str | None = None) -> None:
    """Write an operator file; the model goes inline unless a path is given.

    Flags are written only after re-deriving them from the entries, so a
    file can never carry flags its matrices contradict.
    """
    pos, sub = T.derived_flags()
    payload = {
        "model": _model_payload(model) if inline_model else model_path,
        "fibers": T.fibers.tolist(),
        "flags": {"positive": pos, "sub_unital": sub},
    }
    if majorant_ref is not None:
        payload["majorant"] = majorant_ref
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def load_operator(path) -> tuple[FiberedOperator, Model]:
    """Load and re-validate an operator file.

    The model may be inline or a path relative to the operator file.
    Stored flags must agree with the flags derived from the entries.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"cannot read operator file {path}: {exc}") from exc
    try:
        model_field = payload["model"]
        if isinstance(model_field, str):
            model = load_model((path.parent / model_field) if not os.path.isabs(model_field)
                               else model_field)
        else:
            model = _model_from_payload(model_field)
        fibers = np.array(payload["fibers"], dtype=float)
        T = FiberedOperator(fibers)
        K, N = model.shape
        if T.shape != (K, N):
            raise CorruptFileError(f"fibers {T.fibers.shape} do not match model ({K}, {N})")
        flags = payload.get("flags", {})
        pos, sub = T.derived_flags()
        for name, derived in (("positive", pos), ("sub_unital", sub)):
            if name in flags and bool(flags[name]) != derived:
                raise CorruptFileError(
                    f"stored flag {name}={flags[name]} contradicts entries (derived {derived})")
        return FiberedOperator(fibers, pos, sub), model
    except CorruptFileError:
        raise
    except (KeyError, TypeError, ValueError, BKLabError) as exc:
        raise CorruptFileError(f"invalid operator file {path}: {exc}") from exc


def trace_csv_text(trace: DichotomyTrace) -> str:
    lines = ["n,fiber,d"]
    for n in range(trace.d.shape[0]):
        for k in range(trace.d.shape[1]):
            lines.append(f"{n},{k},{trace.d[n, k]:.17g}")
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: DichotomyTrace, path) -> None:
    atomic_write_text(path, trace_csv_text(trace))


def load_trace_csv(path) -> np.ndarray:
    """Read a trace back as an (n_steps, K) array of d values."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorruptFileError(f"cannot read trace file {path}: {exc}") from exc
    if not lines or lines[0] != "n,fiber,d":
        raise CorruptFileError(f"trace file {path} has a bad header")
    cells = {}
    for ln in lines[1:]:
        if not ln:
            continue
        try:
            n_s, k_s, d_s = ln.split(",")
            cells[(int(n_s), int(k_s))] = float(d_s)
        except ValueError as exc:
            raise CorruptFileError(f"bad trace row {ln!r}") from exc
    if not cells:
        raise CorruptFileError(f"trace file {path} has no rows")
    n_steps = max(n for n, _ in cells) + 1
    k_count = max(k for _, k in cells) + 1
    if len(cells) != n_steps * k_count:
        raise CorruptFileError(f"trace file {path} has missing (n, fiber) rows")
    out = np.empty((n_steps, k_count))
    for (n, k), v in cells.items():
        out[n, k] = v
    return out


def write_verdicts(verdicts: list[FiberVerdict], path) -> None:
    payload = [
        {"fiber": v.fiber, "verdict": v.verdict,
         "first_below_2": v.first_below_2, "final_value": v.final_value}
        for v in verdicts
    ]
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def load_verdicts(path) -> list[FiberVerdict]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return [FiberVerdict(int(v["fiber"]), str(v["verdict"]),
                             v["first_below_2"], float(v["final_value"]))
                for v in payload]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"invalid verdict file {path}: {exc}") from exc
