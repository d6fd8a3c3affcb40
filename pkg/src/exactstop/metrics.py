"""End-to-end accuracy metrics: per-point errors, AUC@X and table rows."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import DualRunResult
from .models import ModelHypothesis
from .synth import ProblemInstance

DEFAULT_THRESHOLDS = (1.0, 2.0, 3.0)


def error_samples(instance: ProblemInstance, model: Optional[ModelHypothesis]) -> np.ndarray:
    """Distance of every noise-free ground-truth point to the estimated model.

    A missing model (no verifiable hypothesis) yields ``+inf`` per point.
    """
    clean = instance.clean_points
    if len(clean) == 0:
        raise ValueError("instance has no ground-truth points")
    if model is None:
        return np.full(len(clean), np.inf)
    return np.asarray(model.distance(clean), dtype=float)


def auc(errors, t: float) -> float:
    """Area under the recall-vs-error curve up to ``t``, normalised to a percentage.

    Equals ``100 * mean(max(0, 1 - e / t))``; infinite errors earn no credit.
    """
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise ValueError("auc needs at least one error sample")
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    credit = 1.0 - np.minimum(e, t) / t
    return float(100.0 * credit.mean())


def relative_change_pct(new: float, base: float) -> float:
    if base == 0.0:
        return 0.0 if new == 0.0 else float("inf")
    return 100.0 * (new - base) / base


@dataclass
class BenchRow:
    family: str
    p: float
    thresholds: tuple[float, ...]
    auc_approx: dict[float, float]
    auc_exact: dict[float, float]
    mean_Nea_pct: float
    instance_count: int
    delta_pct: dict[float, float] = field(init=False)

    def __post_init__(self):
        self.delta_pct = {
            t: relative_change_pct(self.auc_exact[t], self.auc_approx[t]) for t in self.thresholds
        }

    def columns(self) -> list[str]:
        cols = ["family", "p"]
        for t in self.thresholds:
            tag = f"{t:g}"
            cols += [f"auc{tag}_approx", f"auc{tag}_exact", f"auc{tag}_delta_pct"]
        return cols + ["delta_time_pct", "instances"]

    def values(self) -> list:
        vals: list = [self.family, self.p]
        for t in self.thresholds:
            vals += [self.auc_approx[t], self.auc_exact[t], self.delta_pct[t]]
        return vals + [self.mean_Nea_pct, self.instance_count]

    def as_dict(self) -> dict:
        return dict(zip(self.columns(), self.values()))


def aggregate(results: Sequence[DualRunResult], instances: Sequence[ProblemInstance],
              thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> BenchRow:
    """Pool error samples over all instances of one (family, p) configuration."""
    if not results or len(results) != len(instances):
        raise ValueError("need one result per instance and at least one of each")
    errs_a = np.concatenate([error_samples(i, r.best_at_approx.model) for r, i in zip(results, instances)])
    errs_e = np.concatenate([error_samples(i, r.best_at_exact.model) for r, i in zip(results, instances)])
    nea = np.mean([r.undersampling for r in results])
    first = instances[0].params
    return row_from_errors(first.family, first.p, errs_a, errs_e, 100.0 * nea, len(results), thresholds)


def row_from_errors(family, p, errs_a, errs_e, mean_nea_pct, count, thresholds=DEFAULT_THRESHOLDS) -> BenchRow:
    thresholds = tuple(float(t) for t in thresholds)
    return BenchRow(
        family=family,
        p=p,
        thresholds=thresholds,
        auc_approx={t: auc(errs_a, t) for t in thresholds},
        auc_exact={t: auc(errs_e, t) for t in thresholds},
        mean_Nea_pct=float(mean_nea_pct),
        instance_count=count,
    )


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rows[0].columns())
    for row in rows:
        writer.writerow([v if isinstance(v, str) else repr(v) for v in row.values()])
    return buf.getvalue()
