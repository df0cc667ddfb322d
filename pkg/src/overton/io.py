"""Writers and readers for run outputs.

Data files are deterministic. CSV floats are printed with 17 significant
digits and every line ends in LF. JSON uses Python's shortest round-trip
float repr, so re-reading opinions reproduces them exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from . import metrics
from .models import Trajectory
from .sweep import AGGREGATE_FIELDS, CellResult

PathLike = Union[str, Path]

SWEEP_HEADER = ("K", "t_delta", "snapshot") + AGGREGATE_FIELDS
HIST_HEADER = ("snapshot", "bin_lo", "bin_hi", "count")


class OutputError(OSError):
    pass


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_text(path: PathLike, text: str) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"{p}: {exc.strerror or exc}") from exc
    return p


def trajectory_records(traj: Trajectory) -> list[dict]:
    return [
        {"t": s.time, "opinions": s.opinions.tolist(), "manipulator": f}
        for s, f in zip(traj.snapshots, traj.manipulator_opinions)
    ]


def write_jsonl(path: PathLike, records: Iterable[dict]) -> Path:
    return _write_text(path, "".join(json.dumps(r) + "\n" for r in records))


def read_jsonl(path: PathLike) -> list[dict]:
    p = Path(path)
    out = []
    try:
        with open(p, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{p}:{lineno}: invalid JSON: {exc.msg}") from exc
                if not isinstance(rec, dict) or "opinions" not in rec:
                    raise ValueError(f"{p}:{lineno}: record needs an 'opinions' list")
                out.append(rec)
    except OSError as exc:
        raise OutputError(f"{p}: {exc.strerror or exc}") from exc
    return out


def write_json(path: PathLike, obj) -> Path:
    return _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def sweep_rows(matrix: Sequence[Sequence[CellResult]], snapshots: Sequence[str]) -> list[tuple]:
    rows = []
    for row in matrix:
        for cell in row:
            for label in snapshots:
                agg = cell.aggregates[label]
                rows.append((cell.k, cell.t_delta, label) + tuple(agg[f] for f in AGGREGATE_FIELDS))
    return rows


def sweep_csv(matrix: Sequence[Sequence[CellResult]], snapshots: Sequence[str]) -> str:
    lines = [",".join(SWEEP_HEADER)]
    for k, td, label, *vals in sweep_rows(matrix, snapshots):
        lines.append(",".join([str(k), str(td), label] + [fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


def histogram_csv(matrix: Sequence[Sequence[CellResult]], snapshots: Sequence[str]) -> str:
    lines = [",".join(HIST_HEADER)]
    for label in snapshots:
        weights = [w for row in matrix for cell in row for w in cell.effective_weights[label]]
        edges, counts = metrics.weight_histogram(weights)
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            hi_s = "inf" if np.isinf(hi) else fmt(hi)
            lines.append(f"{label},{fmt(lo)},{hi_s},{int(c)}")
    return "\n".join(lines) + "\n"


def write_sweep(matrix, snapshots: Sequence[str], csv_path: PathLike, hist_path: PathLike) -> list[Path]:
    return [
        _write_text(csv_path, sweep_csv(matrix, snapshots)),
        _write_text(hist_path, histogram_csv(matrix, snapshots)),
    ]


def write_svg(path: PathLike, svg: str) -> Path:
    return _write_text(path, svg)
