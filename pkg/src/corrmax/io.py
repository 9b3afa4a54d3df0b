"""JSON file formats for states and POMs.

State documents carry either ``dims`` and ``matrix`` (rows of ``[re, im]``
pairs in composite-index order) or ``named: {variant, params}``. POM
documents carry ``dim`` and ``kets`` (each a list of ``[re, im]``), or a
``spin`` direction as shorthand for a two-outcome qubit measurement.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .measurement import MaximalPOM, new_pom, spin_pom
from .state import DensityOperator, NamedStateSpec, named_state, new_density
from .validation import DimensionError, ValidationError


def _complex_rows(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _from_pairs(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.shape[-1] != 2:
        raise ValidationError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(rho: DensityOperator) -> dict:
    return {"dims": list(rho.dims), "matrix": _complex_rows(rho.matrix)}


def state_from_dict(doc: dict) -> DensityOperator:
    if not isinstance(doc, dict):
        raise ValidationError("state document must be a mapping")
    if "named" in doc:
        spec = doc["named"]
        if not isinstance(spec, dict) or "variant" not in spec:
            raise ValidationError("'named' needs a 'variant' field")
        return named_state(NamedStateSpec(spec["variant"], dict(spec.get("params", {}))))
    try:
        d1, d2 = (int(v) for v in doc["dims"])
        rows = doc["matrix"]
    except KeyError as exc:
        raise ValidationError(f"state document is missing field {exc}") from None
    except (TypeError, ValueError):
        raise ValidationError("'dims' must be a pair of integers") from None
    m = _from_pairs(rows)
    if m.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"matrix shape {m.shape} does not match dims ({d1}, {d2})")
    return new_density(m, d1, d2)


def pom_to_dict(pom: MaximalPOM) -> dict:
    return {"dim": pom.dim, "kets": _complex_rows(pom.kets.T)}


def pom_from_dict(doc: dict) -> MaximalPOM:
    if not isinstance(doc, dict):
        raise ValidationError("POM document must be a mapping")
    if "spin" in doc:
        return spin_pom(doc["spin"])
    try:
        d = int(doc["dim"])
        kets = _from_pairs(doc["kets"])
    except KeyError as exc:
        raise ValidationError(f"POM document is missing field {exc}") from None
    if kets.ndim != 2 or kets.shape[1] != d:
        raise DimensionError(f"kets must each have {d} components")
    return new_pom(list(kets), d)


def _read(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}") from None


def _write(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_state(path) -> DensityOperator:
    return state_from_dict(_read(path))


def save_state(rho: DensityOperator, path) -> None:
    _write(state_to_dict(rho), path)


def load_pom(path) -> MaximalPOM:
    return pom_from_dict(_read(path))


def save_pom(pom: MaximalPOM, path) -> None:
    _write(pom_to_dict(pom), path)


def load_document(path):
    """Load either a state or a POM, deciding by the fields present."""
    doc = _read(path)
    if isinstance(doc, dict) and ("kets" in doc or "spin" in doc):
        return pom_from_dict(doc)
    return state_from_dict(doc)


def save_document(obj, path) -> None:
    if isinstance(obj, MaximalPOM):
        save_pom(obj, path)
    else:
        save_state(obj, path)
