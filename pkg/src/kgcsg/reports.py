"""Report serialization: CSV and JSON with round-trip-exact floats.

CSV layouts
-----------
CsgReport      rows of ``field,value``: csg_full, one ``csg_at[k_c]`` row per
               cutoff, then every parameter as ``param.<name>``.
SweepGrid      header ``m,k,csg,pool_size,wall_ms,status``, one row per cell
               sorted by (m, k); error cells leave csg empty.
Correlation    header ``kind,dataset,model,csg,mrr,r``; point rows first
               (sorted by dataset, model), then per_model / per_dataset /
               mean_per_model / pooled summary rows. Undefined coefficients
               are the literal string ``undefined``.
DatasetStats   rows of ``field,value``.

JSON mirrors the dataclass field names, with keys sorted.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO, Any

from .correlate import CorrelationReport
from .errors import ConfigError, DataError
from .pipeline import SweepGrid
from .similarity import SimilarityMatrix
from .spectral import CsgReport, Spectrum
from .triples import DatasetStats

FORMATS = ("csv", "json")


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def _writer(sink: IO[str]) -> csv.writer:
    return csv.writer(sink, lineterminator="\n")


def _csg_csv(report: CsgReport, sink: IO[str]) -> None:
    w = _writer(sink)
    w.writerow(["field", "value"])
    w.writerow(["csg_full", _fmt(report.csg_full)])
    for k_c, value in report.csg_at:
        w.writerow([f"csg_at[{k_c}]", _fmt(value)])
    for key in sorted(report.parameters):
        w.writerow([f"param.{key}", _fmt(report.parameters[key])])


def _csg_json(report: CsgReport) -> dict:
    return {
        "csg_full": report.csg_full,
        "csg_at": [[k_c, value] for k_c, value in report.csg_at],
        "parameters": dict(report.parameters),
    }


def _sweep_csv(grid: SweepGrid, sink: IO[str]) -> None:
    w = _writer(sink)
    w.writerow(["m", "k", "csg", "pool_size", "wall_ms", "status"])
    for cell in sorted(grid.cells, key=lambda c: (c.m, c.k)):
        w.writerow(
            [
                cell.m,
                cell.k,
                _fmt(cell.csg),
                cell.pool_size,
                _fmt(cell.wall_ms),
                cell.status,
            ]
        )


def _sweep_json(grid: SweepGrid) -> dict:
    return {
        "m_values": grid.m_values,
        "k_values": grid.k_values,
        "cells": [
            {
                "m": c.m,
                "k": c.k,
                "csg": c.csg,
                "pool_size": c.pool_size,
                "wall_ms": c.wall_ms,
                "status": c.status,
            }
            for c in sorted(grid.cells, key=lambda c: (c.m, c.k))
        ],
        "parameters": dict(grid.parameters),
    }


def _undef(r: float | None) -> Any:
    return "undefined" if r is None else r


def _correlation_csv(report: CorrelationReport, sink: IO[str]) -> None:
    w = _writer(sink)
    w.writerow(["kind", "dataset", "model", "csg", "mrr", "r"])
    for p in report.points:
        w.writerow(["point", p.dataset, p.model, _fmt(p.csg), _fmt(p.mrr), ""])
    for model, r in report.per_model.items():
        w.writerow(["per_model", "", model, "", "", _fmt(_undef(r))])
    for dataset, r in report.per_dataset.items():
        w.writerow(["per_dataset", dataset, "", "", "", _fmt(_undef(r))])
    w.writerow(["mean_per_model", "", "", "", "", _fmt(_undef(report.mean_model_r))])
    w.writerow(["pooled", "", "", "", "", _fmt(_undef(report.pooled_r))])


def _correlation_json(report: CorrelationReport) -> dict:
    return {
        "points": [
            {"dataset": p.dataset, "model": p.model, "csg": p.csg, "mrr": p.mrr}
            for p in report.points
        ],
        "per_model": {m: _undef(r) for m, r in report.per_model.items()},
        "per_dataset": {d: _undef(r) for d, r in report.per_dataset.items()},
        "mean_per_model_r": _undef(report.mean_model_r),
        "pooled_r": _undef(report.pooled_r),
    }


def _stats_csv(stats: DatasetStats, sink: IO[str]) -> None:
    w = _writer(sink)
    w.writerow(["field", "value"])
    w.writerow(["entity_count", stats.entity_count])
    w.writerow(["relation_count", stats.relation_count])
    w.writerow(["triple_count", stats.triple_count])
    w.writerow(["class_count", stats.class_count])


def _stats_json(stats: DatasetStats) -> dict:
    return {
        "entity_count": stats.entity_count,
        "relation_count": stats.relation_count,
        "triple_count": stats.triple_count,
        "class_count": stats.class_count,
    }


Report = CsgReport | SweepGrid | CorrelationReport | DatasetStats


def emit_report(report: Report, fmt: str, sink: IO[str] | str | Path) -> None:
    """Serialize a report deterministically; floats survive a parse round-trip."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format '{fmt}', expected one of {FORMATS}")
    if isinstance(sink, (str, Path)):
        try:
            with open(sink, "w", encoding="utf-8", newline="") as fh:
                emit_report(report, fmt, fh)
        except OSError as e:
            raise DataError(f"cannot write report: {e}") from None
        return
    if fmt == "csv":
        if isinstance(report, CsgReport):
            _csg_csv(report, sink)
        elif isinstance(report, SweepGrid):
            _sweep_csv(report, sink)
        elif isinstance(report, CorrelationReport):
            _correlation_csv(report, sink)
        elif isinstance(report, DatasetStats):
            _stats_csv(report, sink)
        else:
            raise ConfigError(f"cannot emit {type(report).__name__}")
        return
    if isinstance(report, CsgReport):
        obj = _csg_json(report)
    elif isinstance(report, SweepGrid):
        obj = _sweep_json(report)
    elif isinstance(report, CorrelationReport):
        obj = _correlation_json(report)
    elif isinstance(report, DatasetStats):
        obj = _stats_json(report)
    else:
        raise ConfigError(f"cannot emit {type(report).__name__}")
    sink.write(json.dumps(obj, indent=2, sort_keys=True))
    sink.write("\n")


def report_text(report: Report, fmt: str) -> str:
    buf = io.StringIO()
    emit_report(report, fmt, buf)
    return buf.getvalue()


def load_csg_report(source: IO[str] | str | Path) -> CsgReport:
    """Read back a JSON CsgReport written by :func:`emit_report`."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                return load_csg_report(fh)
        except OSError as e:
            raise DataError(f"cannot read report: {e}") from None
    try:
        obj = json.load(source)
    except json.JSONDecodeError as e:
        raise DataError(f"not a valid JSON report: {e}") from None
    try:
        return CsgReport(
            csg_full=float(obj["csg_full"]),
            csg_at=[(int(k), float(v)) for k, v in obj.get("csg_at", [])],
            parameters=dict(obj.get("parameters", {})),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed CSG report: {e}") from None


def write_similarity_csv(s: SimilarityMatrix, sink: IO[str] | str | Path) -> None:
    """Debug dump of S: header of class tail tokens, one row per class."""
    if isinstance(sink, (str, Path)):
        try:
            with open(sink, "w", encoding="utf-8", newline="") as fh:
                write_similarity_csv(s, fh)
        except OSError as e:
            raise DataError(f"cannot write similarity dump: {e}") from None
        return
    w = _writer(sink)
    w.writerow(s.tails)
    for row in s.entries:
        w.writerow([repr(float(x)) for x in row])


def write_spectrum(spectrum: Spectrum, sink: IO[str] | str | Path) -> None:
    """One eigenvalue per line, full precision."""
    if isinstance(sink, (str, Path)):
        try:
            with open(sink, "w", encoding="utf-8") as fh:
                write_spectrum(spectrum, fh)
        except OSError as e:
            raise DataError(f"cannot write spectrum dump: {e}") from None
        return
    for value in spectrum.eigenvalues:
        sink.write(repr(float(value)))
        sink.write("\n")
