"""Deterministic serialization of check reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .checks import CheckReport, Status

SIG_DIGITS = 12
CSV_COLUMNS = ("check_id", "domain_id", "status", "lhs", "rhs", "margin", "tolerance", "orientation", "detail")


def round_float(x) -> Optional[object]:
    """Float rounded to 12 significant digits; non-finite values become null or a signed string."""
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj):
    """Recursively round floats and convert numpy/enum values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def sort_reports(reports: Sequence[CheckReport]) -> list[CheckReport]:
    return sorted(reports, key=lambda r: (r.check_id.value, r.domain_id))


def exit_code(reports: Sequence[CheckReport]) -> int:
    """0 unless some check failed or errored; other statuses are not failures."""
    return int(any(r.counts_as_failure for r in reports))


def summary(reports: Sequence[CheckReport]) -> dict:
    counts = {s.value: 0 for s in Status}
    for r in reports:
        counts[r.status.value] += 1
    return {"total": len(reports), "counts": counts, "exit_code": exit_code(reports)}


def _fmt(x) -> str:
    v = round_float(x)
    return "" if v is None else (v if isinstance(v, str) else f"{x:.{SIG_DIGITS}g}")


def render(reports: Sequence[CheckReport], fmt: str = "json") -> str:
    reps = sort_reports(reports)
    if fmt == "json":
        doc = {"reports": [normalize(r.to_dict()) for r in reps], "summary": summary(reps)}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reps:
            w.writerow([r.check_id.value, r.domain_id, r.status.value, _fmt(r.lhs), _fmt(r.rhs),
                        _fmt(r.margin), _fmt(r.tolerance), r.orientation, r.detail])
        return buf.getvalue()
    if fmt == "text":
        lines = []
        for r in reps:
            lines.append(f"{r.check_id.value:<18} {r.domain_id:<36} {r.status.value:<19} "
                         f"lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} margin={_fmt(r.margin)} tol={_fmt(r.tolerance)}"
                         + (f"  [{r.detail}]" if r.detail else ""))
        s = summary(reps)
        lines.append(f"{s['total']} checks: " + ", ".join(f"{k}={v}" for k, v in s["counts"].items() if v))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(reports: Sequence[CheckReport], fmt: str = "json", out=None) -> int:
    """Write the rendered report to ``out`` (a path) or return it via stdout; returns the exit code."""
    text = render(reports, fmt)
    if out is None:
        print(text, end="")
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {out}: {exc}") from exc
    return exit_code(reports)
