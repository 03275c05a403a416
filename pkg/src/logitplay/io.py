"""Payoff ingestion and stable, byte-reproducible output files.

Floats are written as their shortest round-trip decimal (``repr``), so a value
read back is bit-identical to the one written and equal runs give equal bytes.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .dlfp import Trace, VerificationReport
from .errors import InvalidInputError, LogitPlayError, ParseError
from .lfp import AggregateTrace

_SHAPE = r"(\d+)\s*[x×]\s*(\d+)"


def _shape(m: str, n: str) -> tuple[int, int]:
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise InvalidInputError(f"matrix dimensions must be positive, got {m}x{n}")
    return m, n


def builtin_payoff(name: str) -> np.ndarray | None:
    """Named matrices; returns ``None`` when ``name`` is not a builtin.

    ``random:<m>x<n>:<seed>`` draws entries uniform on ``[-1, 1]`` from
    ``numpy.random.default_rng(seed)``.
    """
    text = name.strip().lower()
    if text == "matching-pennies":
        return np.array([[1.0, -1.0], [-1.0, 1.0]])
    if mt := re.fullmatch(rf"zero:{_SHAPE}", text):
        return np.zeros(_shape(*mt.groups()))
    if mt := re.fullmatch(rf"random:{_SHAPE}:(\d+)", text):
        m, n = _shape(mt.group(1), mt.group(2))
        return np.random.default_rng(int(mt.group(3))).uniform(-1.0, 1.0, (m, n))
    if re.match(r"(zero|random):", text):
        raise InvalidInputError(f"malformed builtin payoff {name!r}")
    return None


def parse_payoff_csv(text: str) -> np.ndarray:
    """Parse ``m`` rows of ``n`` comma-separated decimals.

    Trailing blank lines are ignored; any other deviation raises
    :class:`ParseError` with a 1-based row (and column, for bad cells).
    """
    rows = list(csv.reader(text.splitlines()))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("empty payoff file", row=1)
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", row=r)
        for c, cell in enumerate(row, start=1):
            try:
                val = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric cell {cell.strip()!r}", row=r, column=c) from None
            if not math.isfinite(val):
                raise ParseError(f"non-finite cell {cell.strip()!r}", row=r, column=c)
            out[r - 1, c - 1] = val
    return out


def load_payoff(source) -> np.ndarray:
    """A builtin name (``matching-pennies``, ``zero:mxn``, ``random:mxn:seed``) or a CSV path."""
    if isinstance(source, str):
        A = builtin_payoff(source)
        if A is not None:
            return A
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read payoff file {str(path)!r}: {exc.strerror}") from None
    return parse_payoff_csv(text)


# ---------------------------------------------------------------------------
# writers


def fmt(value) -> str:
    """Shortest round-trip decimal; NaN (an absent value) becomes an empty cell."""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def save_payoff(A, path) -> Path:
    A = np.asarray(A, dtype=float)
    return _write_rows(path, None, [[fmt(v) for v in row] for row in A])


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    lines = [] if header is None else [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise LogitPlayError(f"cannot write {str(path)!r}: {exc.strerror}") from None
    return path


TRACE_COLUMNS = ("iteration", "step_size", "gap", "theory_bound")
AGGREGATE_COLUMNS = (
    "iteration",
    "step_size",
    "mean_gap",
    "std_gap",
    "ci95",
    "event_fraction",
    "conditional_mean_gap",
)
CHECK_COLUMNS = ("check", "checked", "passed", "failed", "worst_t", "worst_margin")


def write_trace(trace: Trace, path) -> Path:
    rows = (
        [str(int(t)), fmt(a), fmt(g), fmt(b)]
        for t, a, g, b in zip(trace.iterations, trace.alphas, trace.gaps, trace.bounds)
    )
    return _write_rows(path, TRACE_COLUMNS, rows)


def write_aggregate(agg: AggregateTrace, path) -> Path:
    frac = agg.event_fraction
    rows = (
        [str(int(agg.iterations[k]))]
        + [fmt(col[k]) for col in (agg.alphas, agg.mean_gap, agg.std_gap, agg.ci95, frac, agg.conditional_mean_gap)]
        for k in range(agg.iterations.size)
    )
    return _write_rows(path, AGGREGATE_COLUMNS, rows)


def write_checks(report: VerificationReport, path) -> Path:
    rows = []
    for name, c in report.summary()["checks"].items():
        worst_t = "" if c["worst_t"] is None else str(c["worst_t"])
        worst = "" if c["worst_margin"] is None else fmt(c["worst_margin"])
        rows.append([name, str(c["checked"]), str(c["passed"]), str(c["failed"]), worst_t, worst])
    return _write_rows(path, CHECK_COLUMNS, rows)


def emit_report(results, path) -> Path:
    """Write a trace, an aggregate or a verification report as CSV."""
    if isinstance(results, VerificationReport):
        return write_checks(results, path)
    if isinstance(results, AggregateTrace):
        return write_aggregate(results, path)
    if isinstance(results, Trace):
        return write_trace(results, path)
    raise InvalidInputError(f"cannot emit {type(results).__name__}")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_json(obj, path) -> Path:
    """Key-sorted JSON; non-finite floats become ``null``."""
    path = Path(path)
    text = json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False)
    try:
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise LogitPlayError(f"cannot write {str(path)!r}: {exc.strerror}") from None
    return path


def sibling(path, tag: str, suffix: str | None = None) -> Path:
    """``run.csv`` -> ``run.<tag>.csv`` (or ``run.<tag><suffix>``)."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{tag}{path.suffix if suffix is None else suffix}")
