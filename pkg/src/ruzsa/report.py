"""Machine-readable reports and the reference table.

Report schema (version 1)::

    {
      "version": 1,
      "tool_version": "0.1.0",
      "kind": "verify" | "scan" | "det" | "search" | "table",
      "seed": int | null,
      "results": [...],          # CheckResult rows, ensemble summaries, ...
      "summary": {...},
      "metadata": {"timestamp": ...}
    }

Everything outside ``metadata`` is a deterministic function of the command
and its seed, so two runs can be compared after dropping that block.
"""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .checks import CONJECTURE, FAIL, OBSERVATIONAL, PASS, SKIPPED
from .checks.result import CheckResult, _jsonable
from .density import ParametricDensity
from .metrics import difference_constant, doubling_constant, ruzsa_divergence

REPORT_VERSION = 1
RESULT_COLUMNS = ("name", "status", "pass", "lhs", "rhs", "slack", "tolerance",
                  "reference", "inputs_digest")


def summarize(results: list[CheckResult]) -> dict:
    counts = {PASS: 0, FAIL: 0, SKIPPED: 0, CONJECTURE: 0, OBSERVATIONAL: 0}
    for r in results:
        counts[r.status] = counts.get(r.status, 0) + 1
    return {"pass": counts[PASS], "fail": counts[FAIL], "skipped": counts[SKIPPED],
            "conjecture": counts[CONJECTURE], "observational": counts[OBSERVATIONAL]}


def build_report(kind: str, results: list, *, seed=None, summary: dict | None = None,
                 extra: dict | None = None) -> dict:
    rows = [r.to_dict() if isinstance(r, CheckResult) else _jsonable(r) for r in results]
    if summary is None:
        summary = summarize([r for r in results if isinstance(r, CheckResult)])
    rep = {"version": REPORT_VERSION, "tool_version": __version__, "kind": kind,
           "seed": seed, "results": rows, "summary": _jsonable(summary)}
    if extra:
        rep.update(_jsonable(extra))
    rep["metadata"] = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    return rep


def deterministic_part(report: dict) -> dict:
    """The report without its metadata block."""
    return {k: v for k, v in report.items() if k != "metadata"}


def _csv_rows(report: dict) -> tuple[list[str], list[list]]:
    rows = report["results"]
    if rows and all(set(RESULT_COLUMNS) <= set(r) for r in rows):
        cols = list(RESULT_COLUMNS)
    else:
        cols = sorted({k for r in rows for k, v in r.items() if not isinstance(v, (dict, list))})
    cols = ["tool_version", "seed"] + [c for c in cols if c not in ("tool_version", "seed")]
    out = []
    for r in rows:
        full = {"tool_version": report["tool_version"], "seed": report["seed"], **r}
        out.append([full.get(c, "") for c in cols])
    return cols, out


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=1, sort_keys=True)
    if fmt == "csv":
        cols, rows = _csv_rows(report)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def write_report(report: dict, path, fmt: str = "json") -> Path:
    path = Path(path)
    path.write_text(render(report, fmt))
    return path


# ---------------------------------------------------------------------------
# reference table
# ---------------------------------------------------------------------------

TABLE_DISTRIBUTIONS = {
    "N(0,1)": lambda: ParametricDensity.gaussian(0.0, 1.0),
    "Exp(1)": lambda: ParametricDensity.exponential(1.0),
    "U[0,1]": lambda: ParametricDensity.uniform(0.0, 1.0),
}


def reference_table(cells: int = 4096) -> list[dict]:
    """sigma_-, sigma_+ and d_R(X||X) for the standard one-dimensional laws.

    ``source`` records how each value was obtained (closed form or grid).
    """
    rows = []
    for label, make in TABLE_DISTRIBUTIONS.items():
        p = make()
        for qty, fn in (("σ₋", difference_constant), ("σ₊", doubling_constant),
                        ("d_R(X‖X)", ruzsa_divergence)):
            v = fn(p, p, cells=cells) if fn is ruzsa_divergence else fn(p, cells=cells)
            rows.append({"distribution": label, "quantity": qty, "value": float(v),
                         "source": v.representation.replace("-", " ")})
    return rows


def format_table(rows: list[dict]) -> str:
    width = max(len(f"{r['distribution']}: {r['quantity']}") for r in rows)
    lines = []
    for r in rows:
        head = f"{r['distribution']}: {r['quantity']}"
        val = r["value"]
        txt = f"{val:.3f}" if math.isfinite(val) else str(val)
        lines.append(f"{head} = {txt}".ljust(width + 9) + f"  {val:.10f}  ({r['source']})")
    return "\n".join(lines)
