"""Pearson correlation between CSG values and externally supplied MRR scores.

MRR values are strictly inputs: they arrive in a CSV of
``dataset,model,mrr`` rows and are joined against CSG reports by dataset
name. The headline number is the mean of per-model coefficients across
datasets; the pooled all-points coefficient is also emitted so both
readings of "mean Pearson" are available.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

from .errors import DataError
from .spectral import CsgReport

METRICS_HEADER = ["dataset", "model", "mrr"]


def pearson(points: Sequence[tuple[float, float]]) -> float | None:
    """Product-moment coefficient; None when either variance is zero
    (the emitted reports render that as "undefined", never NaN)."""
    n = len(points)
    if n < 2:
        raise DataError(f"pearson needs at least 2 points, got {n}")
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class MetricRow:
    dataset: str
    model: str
    mrr: float


def load_metrics(source: IO[str] | str | Path) -> list[MetricRow]:
    """Parse the metrics CSV, validating the header and the [0, 1] MRR range."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8", newline="") as fh:
                return load_metrics(fh)
        except OSError as e:
            raise DataError(f"cannot read metrics file: {e}") from None
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("metrics file is empty") from None
    if [h.strip() for h in header] != METRICS_HEADER:
        raise DataError(
            f"metrics header must be {','.join(METRICS_HEADER)}, "
            f"got {','.join(header)}"
        )
    rows = []
    for lineno, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != 3:
            raise DataError(f"metrics row {lineno}: expected 3 fields, got {len(fields)}")
        dataset, model, mrr_text = (f.strip() for f in fields)
        try:
            mrr = float(mrr_text)
        except ValueError:
            raise DataError(f"metrics row {lineno}: non-numeric mrr '{mrr_text}'") from None
        if not 0.0 <= mrr <= 1.0:
            raise DataError(f"metrics row {lineno}: mrr {mrr} outside [0, 1]")
        rows.append(MetricRow(dataset=dataset, model=model, mrr=mrr))
    if not rows:
        raise DataError("metrics file has no data rows")
    return rows


@dataclass(frozen=True)
class CorrelationPoint:
    dataset: str
    model: str
    csg: float
    mrr: float


@dataclass
class CorrelationReport:
    points: list[CorrelationPoint]
    per_model: dict[str, float | None] = field(default_factory=dict)
    per_dataset: dict[str, float | None] = field(default_factory=dict)
    mean_model_r: float | None = None
    pooled_r: float | None = None


def correlate_with_metrics(
    csg_reports: Sequence[CsgReport], metrics_source: IO[str] | str | Path
) -> CorrelationReport:
    """Join each (dataset, model, MRR) row with its dataset's CSG value."""
    csg_by_dataset: dict[str, float] = {}
    for report in csg_reports:
        name = report.parameters.get("dataset")
        if not name:
            raise DataError("a CSG report is missing its dataset name")
        if name in csg_by_dataset:
            raise DataError(f"duplicate CSG report for dataset '{name}'")
        csg_by_dataset[name] = report.csg_full

    rows = load_metrics(metrics_source)
    known = ", ".join(sorted(csg_by_dataset)) or "<none>"
    points = []
    for row in rows:
        if row.dataset not in csg_by_dataset:
            raise DataError(
                f"metrics dataset '{row.dataset}' has no CSG report; known: {known}"
            )
        points.append(
            CorrelationPoint(
                dataset=row.dataset,
                model=row.model,
                csg=csg_by_dataset[row.dataset],
                mrr=row.mrr,
            )
        )
    points.sort(key=lambda p: (p.dataset, p.model))
    if len(points) < 2:
        raise DataError("need at least 2 joined points to correlate")

    def group_r(key: str) -> dict[str, float | None]:
        groups: dict[str, list[tuple[float, float]]] = {}
        for p in points:
            groups.setdefault(getattr(p, key), []).append((p.csg, p.mrr))
        return {
            name: (pearson(pts) if len(pts) >= 2 else None)
            for name, pts in sorted(groups.items())
        }

    per_model = group_r("model")
    per_dataset = group_r("dataset")
    defined = [r for r in per_model.values() if r is not None]
    return CorrelationReport(
        points=points,
        per_model=per_model,
        per_dataset=per_dataset,
        mean_model_r=(math.fsum(defined) / len(defined)) if defined else None,
        pooled_r=pearson([(p.csg, p.mrr) for p in points]),
    )
