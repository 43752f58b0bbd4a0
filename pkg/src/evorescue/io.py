"""CSV and JSON emitters.

Every CSV starts with a ``# schema=1`` line followed by a header row.
Floats are written with ``repr`` (shortest round-trip, at most 17
significant digits); absent values are empty cells. Output is byte-stable
for identical inputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis.outcome import DIAGNOSTIC_COLUMNS, RunOutcome

SCHEMA_LINE = "# schema=1"
HEATMAP_MAX_NODES = 601
SLICE_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else repr(v)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        first = fh.readline().strip()
        if first != SCHEMA_LINE:
            raise ValueError(f"{path}: missing or unsupported schema line {first!r}")
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def diagnostic_columns(run: RunOutcome) -> list[str]:
    """Diagnostics columns, dropping max_a / energy when the run has no such field."""
    s = run.series
    cols = []
    for name in DIAGNOSTIC_COLUMNS:
        if name in ("max_a", "energy") and (len(s) == 0 or np.all(np.isnan(s.column(name)))):
            continue
        cols.append(name)
    return cols


def write_diagnostics(run: RunOutcome, path: Path) -> Path:
    cols = diagnostic_columns(run)
    s = run.series
    return write_csv(path, cols, ([s.column(c)[i] for c in cols] for i in range(len(s))))


def _field_header(run: RunOutcome) -> list[str]:
    has_a = bool(run.snapshots) and run.snapshots[0].a is not None
    return ["t", "x", "u", "a"] if has_a else ["t", "x", "u"]


def _field_rows(snap, x, stride=1):
    idx = range(0, len(x), stride)
    if snap.a is None:
        return ([snap.t, x[i], snap.u[i]] for i in idx)
    return ([snap.t, x[i], snap.u[i], snap.a[i]] for i in idx)


def write_snapshots(run: RunOutcome, path: Path) -> Path:
    x = run.grid.x
    rows = (r for s in run.snapshots for r in _field_rows(s, x))
    return write_csv(path, _field_header(run), rows)


def _stride(n_nodes: int) -> int:
    return max(1, math.ceil((n_nodes - 1) / (HEATMAP_MAX_NODES - 1)))


def slice_indices(run: RunOutcome) -> list[int]:
    """Snapshot indices nearest to the quartile times of the run."""
    times = np.array([s.t for s in run.snapshots])
    t_end = times[-1]
    out = []
    for frac in SLICE_FRACTIONS:
        out.append(int(np.argmin(np.abs(times - frac * t_end))))
    return out


def emit_plotdata(run: RunOutcome, out_dir: Path) -> list[Path]:
    """heatmap.csv (t, x, u[, a]) on a thinned mesh; slices.csv at quartile times.

    A run with t_end = 0 yields header-only files.
    """
    out_dir = Path(out_dir)
    header = _field_header(run)
    empty = not run.snapshots or run.snapshots[-1].t == 0
    x = run.grid.x
    stride = _stride(len(x))
    heat_rows = [] if empty else (r for s in run.snapshots for r in _field_rows(s, x, stride))
    p1 = write_csv(out_dir / "heatmap.csv", header, heat_rows)
    slice_rows = []
    if not empty:
        for frac, k in zip(SLICE_FRACTIONS, slice_indices(run)):
            slice_rows.extend([frac] + r for r in _field_rows(run.snapshots[k], x))
    p2 = write_csv(out_dir / "slices.csv", ["quantile"] + header, slice_rows)
    return [p1, p2]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else (str(v) if math.isinf(v) else v)
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and not isinstance(obj, (str, int)):
        return obj.value
    return obj


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_run(run: RunOutcome, out_dir: Path, outputs: Sequence[str]) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    if "diagnostics" in outputs:
        written.append(write_diagnostics(run, out_dir / "diagnostics.csv"))
    if "snapshots" in outputs:
        written.append(write_snapshots(run, out_dir / "snapshots.csv"))
    if "plotdata" in outputs:
        written.extend(emit_plotdata(run, out_dir))
    written.append(write_json(out_dir / "summary.json", run_summary(run)))
    return written


def run_summary(run: RunOutcome) -> dict:
    return {
        "classification": run.classification.value,
        "t_end": run.t_end,
        "final_max_u": float(run.series.max_u[-1]),
        "speed_estimate": run.speed_estimate,
        "clipped": run.clipped,
        "max_substeps": run.max_substeps,
        "boundary_contact_t": run.boundary_contact_t,
    }


def fingerprint(obj) -> str:
    """Stable 12-hex-digit digest of a (frozen dataclass) configuration."""
    return hashlib.sha256(repr(obj).encode()).hexdigest()[:12]
