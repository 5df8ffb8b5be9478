"""JSON schemas for elements, matrices, and condition reports.

All artifacts are plain JSON so fixtures stay human-diffable; writes go
through a temp file plus rename so readers never observe partial output.
Coefficients round-trip bit-exactly for binary64 values.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .algebra import GrassmannElement, make_element


class FormatError(ValueError):
    """Malformed input artifact; the message names the offending field."""


def _need(obj: dict, field: str, kinds, where: str):
    if field not in obj:
        raise FormatError(f"missing field '{field}' in {where}")
    val = obj[field]
    if not isinstance(val, kinds):
        raise FormatError(f"field '{field}' in {where} has wrong type {type(val).__name__}")
    return val


def element_to_dict(a: GrassmannElement) -> dict:
    terms = []
    for key in sorted(a.terms):
        c = a.terms[key]
        terms.append({
            "bar": list(key.bar_indices()),
            "unbar": list(key.unbar_indices()),
            "re": c.real,
            "im": c.imag,
        })
    return {"m": a.m, "terms": terms}


def element_from_dict(d: dict) -> GrassmannElement:
    m = _need(d, "m", int, "element")
    raw = _need(d, "terms", list, "element")
    triples = []
    for k, t in enumerate(raw):
        if not isinstance(t, dict):
            raise FormatError(f"field 'terms[{k}]' in element is not an object")
        bar = _need(t, "bar", list, f"element term {k}")
        unbar = _need(t, "unbar", list, f"element term {k}")
        re = _need(t, "re", (int, float), f"element term {k}")
        im = _need(t, "im", (int, float), f"element term {k}")
        triples.append((bar, unbar, complex(re, im)))
    try:
        return make_element(m, triples)
    except ValueError as exc:
        raise FormatError(f"element terms invalid: {exc}") from exc


def matrix_to_dict(mat: np.ndarray, kind: str, m: int) -> dict:
    mat = np.asarray(mat, dtype=complex)
    return {
        "kind": kind,
        "m": m,
        "dim": mat.shape[0],
        "re": mat.real.tolist(),
        "im": mat.imag.tolist(),
    }


_EXPECTED_DIM = {
    "gamma": lambda m: m,
    "Gamma": lambda m: m * m,
    "density": lambda m: 1 << m,
    "operator": lambda m: 1 << m,
}


def matrix_from_dict(d: dict, expect_kind: str | None = None) -> tuple[np.ndarray, str, int]:
    kind = _need(d, "kind", str, "matrix")
    if kind not in _EXPECTED_DIM:
        raise FormatError(f"field 'kind' has unknown value {kind!r}")
    if expect_kind is not None and kind != expect_kind:
        raise FormatError(f"field 'kind' is {kind!r}, expected {expect_kind!r}")
    m = _need(d, "m", int, f"{kind} matrix")
    dim = _need(d, "dim", int, f"{kind} matrix")
    want = _EXPECTED_DIM[kind](m)
    if dim != want:
        raise FormatError(f"field 'dim' is {dim}, expected {want} for kind {kind!r} with m = {m}")
    re = _need(d, "re", list, f"{kind} matrix")
    im = _need(d, "im", list, f"{kind} matrix")
    try:
        mat = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"fields 're'/'im' are not numeric matrices: {exc}") from exc
    if mat.ndim != 2 or mat.shape != (dim, dim):
        raise FormatError(f"fields 're'/'im' have shape {mat.shape}, expected ({dim}, {dim})")
    return mat, kind, m


def atomic_write_json(path: str, obj) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
