"""Check results, tolerances and the evaluation context."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..convolve import MAX_GRID_CELLS, convolve, weighted_sum
from ..density import DEFAULT_CELLS
from ..entropy import CLOSED_FORM, EXACT, GRID, _weaker, entropy

PASS = "PASS"
FAIL = "FAIL"
SKIPPED = "SKIPPED"
CONJECTURE = "CONJECTURE"
OBSERVATIONAL = "OBSERVATIONAL"

THEOREM = "theorem"

TOLERANCES = {EXACT: 1e-9, CLOSED_FORM: 1e-6, GRID: 5e-3}


@dataclass
class Part:
    """One inequality lhs <= rhs inside a (possibly multi-part) check."""

    label: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class Outcome:
    parts: list[Part]
    metadata: dict = field(default_factory=dict)
    skipped: str | None = None
    scale: float = 1.0  # multiplies the tolerance (determinant checks)


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tolerance: float
    status: str
    inputs_digest: str
    reference: str
    metadata: dict = field(default_factory=dict)

    @property
    def pass_(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _jsonable(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        v = float(o)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


class Context:
    """Computes entropies and convolutions for a check, tracking the weakest
    representation used so the default tolerance can be chosen afterwards."""

    def __init__(self, cells: int = DEFAULT_CELLS, max_cells: int = MAX_GRID_CELLS):
        self.cells = cells
        self.max_cells = max_cells
        self.rep = EXACT
        self.truncated = 0.0

    def note(self, rep: str):
        self.rep = _weaker(self.rep, rep)

    def h(self, d) -> float:
        v = entropy(d)
        self.note(v.representation)
        meta = getattr(d, "meta", None)
        if meta:
            self.truncated = max(self.truncated, float(meta.get("truncated_mass", 0.0)))
        return float(v)

    def conv(self, p, q, sign=1):
        return convolve(p, q, sign, cells=self.cells, max_cells=self.max_cells)

    def wsum(self, ops, coeffs):
        return weighted_sum(ops, coeffs, cells=self.cells, max_cells=self.max_cells)

    def dR(self, p, q) -> float:
        """d_R(p || q) = h(p - q) - h(p)."""
        return self.h(self.conv(p, q, -1)) - self.h(p)

    @property
    def tolerance(self) -> float:
        return TOLERANCES[self.rep]
