"""JSON density files and CSV export."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .density import (
    CircleDensity,
    ComplexDensity,
    FinitePMF,
    GridDensity,
    JointPMF,
    ParametricDensity,
    PositiveDensity,
)
from .errors import RuzsaError, ValidationError
from .groups import GroupSpec

FILE_VERSION = 1


def to_dict(d) -> dict:
    if isinstance(d, FinitePMF):
        return {"type": "finite", "group": d.group.to_json(), "probs": d.probs.tolist(),
                "version": FILE_VERSION}
    if isinstance(d, GridDensity):
        return {"type": "grid", "box": {"lo": list(d.lo), "hi": list(d.hi)},
                "masses": d.masses.tolist(), "version": FILE_VERSION}
    if isinstance(d, ParametricDensity):
        return {"type": "parametric", "family": d.family,
                "params": {k: np.asarray(v).tolist() for k, v in d.params.items()},
                "version": FILE_VERSION}
    if isinstance(d, CircleDensity):
        return {"type": "circle", "masses": d.masses.tolist(), "version": FILE_VERSION}
    if isinstance(d, PositiveDensity):
        return {"type": "positive", "log_density": to_dict(d.log_density), "version": FILE_VERSION}
    if isinstance(d, ComplexDensity):
        return {"type": "complex", "log_modulus": [d.lo, d.hi], "masses": d.masses.tolist(),
                "version": FILE_VERSION}
    raise TypeError(f"cannot serialise {type(d).__name__}")


def from_dict(obj: dict):
    """Rebuild a density; raises ValidationError / NormalizationError on bad content."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("density file must be an object with a 'type' field")
    if obj.get("version", FILE_VERSION) != FILE_VERSION:
        raise ValidationError(f"unsupported density file version {obj.get('version')}")
    kind = obj["type"]
    try:
        if kind == "finite":
            return FinitePMF(GroupSpec.from_json(obj["group"]), obj["probs"])
        if kind == "grid":
            return GridDensity(obj["box"]["lo"], obj["box"]["hi"], obj["masses"])
        if kind == "parametric":
            return ParametricDensity(obj["family"], dict(obj["params"]))
        if kind == "circle":
            return CircleDensity(obj["masses"])
        if kind == "positive":
            return PositiveDensity(from_dict(obj["log_density"]))
        if kind == "complex":
            lo, hi = obj["log_modulus"]
            return ComplexDensity(lo, hi, obj["masses"])
    except KeyError as exc:
        raise ValidationError(f"density file missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RuzsaError):
            raise
        raise ValidationError(f"malformed density file: {exc}") from None
    raise ValidationError(f"unknown density type {kind!r}")


def encode_value(a):
    """JSON form of a check argument: densities, joints, matrices, groups, sets."""
    if isinstance(a, (FinitePMF, GridDensity, ParametricDensity, CircleDensity,
                      PositiveDensity, ComplexDensity)):
        return to_dict(a)
    if isinstance(a, JointPMF):
        return {"type": "joint", "groups": [g.to_json() for g in a.groups],
                "tensor": a.tensor.tolist()}
    if isinstance(a, np.ndarray):
        return {"type": "array", "data": a.tolist()}
    if isinstance(a, GroupSpec):
        return {"type": "group", "group": a.to_json()}
    if isinstance(a, (set, frozenset)):
        return {"type": "set", "elements": sorted(a)}
    if isinstance(a, np.generic):
        return a.item()
    return a


def decode_value(obj):
    """Inverse of ``encode_value``; plain scalars pass through unchanged."""
    if not isinstance(obj, dict):
        return obj
    kind = obj.get("type")
    try:
        if kind == "joint":
            return JointPMF([GroupSpec.from_json(g) for g in obj["groups"]], obj["tensor"])
        if kind == "array":
            return np.asarray(obj["data"], dtype=float)
        if kind == "group":
            return GroupSpec.from_json(obj["group"])
        if kind == "set":
            return frozenset(_hashable(e) for e in obj["elements"])
    except KeyError as exc:
        raise ValidationError(f"{kind} value missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RuzsaError):
            raise
        raise ValidationError(f"malformed {kind} value: {exc}") from None
    return from_dict(obj)


def _hashable(e):
    return tuple(e) if isinstance(e, list) else e


def write_density(d, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_dict(d), indent=1))
    return path


def read_density(path):
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    try:
        return from_dict(obj)
    except RuzsaError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_csv(d, path) -> Path:
    """One row per cell/element: coordinates then mass."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(d, FinitePMF):
            w.writerow(["index", "element", "mass"])
            for i, p in enumerate(d.probs):
                w.writerow([i, d.group.element(i), repr(float(p))])
        elif isinstance(d, GridDensity):
            w.writerow([f"x{a}" for a in range(d.dim)] + ["mass", "density"])
            centers = np.meshgrid(*[d.centers(a) for a in range(d.dim)], indexing="ij")
            vol = d.cell_volume
            for idx in np.ndindex(d.cells):
                m = float(d.masses[idx])
                w.writerow([repr(float(c[idx])) for c in centers] + [repr(m), repr(m / vol)])
        elif isinstance(d, CircleDensity):
            w.writerow(["theta", "mass"])
            for i, m in enumerate(d.masses):
                w.writerow([repr((i + 0.5) * d.spacing), repr(float(m))])
        else:
            raise TypeError(f"no CSV export for {type(d).__name__}")
    return path
