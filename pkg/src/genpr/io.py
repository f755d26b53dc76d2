"""JSON encodings for matrices, signals and ensembles.

Matrices are row-major nested lists.  Complex numbers are ``[re, im]`` pairs;
real-field data uses plain numbers.  Ensemble documents look like::

    {"field": "C", "d": 2, "matrices": [...],
     "meta": {"ranks": [1, 1, 1], "projectors": false}}
"""

import json

import numpy as np

from .core import Ensemble, InputError, check_field


def encode_array(a, field=None):
    a = np.asarray(a)
    if field is None:
        field = "C" if np.iscomplexobj(a) else "R"
    if field == "R":
        return np.real(a).tolist()
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_array(obj, field, ndim, where="value"):
    try:
        a = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: expected a numeric array ({exc})") from None
    if field == "C":
        if a.ndim != ndim + 1 or a.shape[-1] != 2:
            raise InputError(f"{where}: complex entries must be [re, im] pairs")
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim != ndim:
        raise InputError(f"{where}: expected a {ndim}-dimensional array, got {a.ndim}")
    return a


def ensemble_to_dict(ens):
    return {
        "field": ens.field,
        "d": ens.d,
        "matrices": [encode_array(A, ens.field) for A in ens.matrices],
        "meta": {
            "ranks": list(ens.ranks) if ens.ranks is not None else None,
            "projectors": bool(ens.projectors),
        },
    }


def ensemble_from_dict(doc):
    if not isinstance(doc, dict):
        raise InputError("$: ensemble document must be a JSON object")
    for key in ("field", "matrices"):
        if key not in doc:
            raise InputError(f"$.{key}: missing")
    field = doc["field"]
    try:
        check_field(field)
    except InputError as exc:
        raise InputError(f"$.field: {exc}") from None
    mats = doc["matrices"]
    if not isinstance(mats, list) or not mats:
        raise InputError("$.matrices: expected a non-empty list")
    arrs = [decode_array(m, field, 2, f"$.matrices[{j}]") for j, m in enumerate(mats)]
    d = doc.get("d", arrs[0].shape[0])
    for j, A in enumerate(arrs):
        if A.shape != (d, d):
            raise InputError(f"$.matrices[{j}]: expected shape ({d}, {d}), got {A.shape}")
    meta = doc.get("meta") or {}
    try:
        return Ensemble(np.stack(arrs), field, ranks=meta.get("ranks"),
                        projectors=bool(meta.get("projectors", False)))
    except InputError as exc:
        raise InputError(f"$.matrices: {exc}") from None


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def load_ensemble(path):
    try:
        return ensemble_from_dict(load_json(path))
    except InputError as exc:
        msg = str(exc)
        raise InputError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def save_ensemble(ens, path):
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(ens), fh, indent=1)
        fh.write("\n")


def load_vector(path, field):
    """A measurement or signal vector: a bare list or {"values": [...]}."""
    doc = load_json(path)
    if isinstance(doc, dict):
        if "values" not in doc:
            raise InputError(f"{path}: $.values missing")
        doc = doc["values"]
    return decode_array(doc, field, 1, f"{path}: $.values")
