"""Failure-detection evaluation: AUROC, cut-off curves, AUCOC, IR.

The cut-off curve tracks the mean of a target metric over the data that
remains after filtering out the top-q fraction by uncertainty; its
trapezoidal area (AUCOC) is compared against an optimal baseline (filtering
by the target itself) and the analytic random baseline (flat at the overall
mean). The improvement ratio locates a detector between those two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Mapping

import numpy as np
from scipy.stats import rankdata

from .core import UqfdError

CurveKind = Literal["accuracy-up", "error-down"]


class DegenerateLabelsError(UqfdError):
    pass


class EmptyInputError(UqfdError):
    pass


class DegenerateBaselinesError(UqfdError):
    pass


@dataclass(frozen=True)
class LabeledScore:
    """An uncertainty score paired with a failure flag or error severity."""

    sample_id: str
    score: float
    target: float  # bool-valued for classification, error in meters otherwise

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise EmptyInputError(f"non-finite score for {self.sample_id!r}")


@dataclass(frozen=True)
class CutoffCurve:
    points: tuple[tuple[float, float], ...]  # (filtered fraction q, remaining mean)
    aucoc: float
    kind: CurveKind


@dataclass(frozen=True)
class DetectionReport:
    auroc: float | None
    aucoc_uncertainty: float
    aucoc_optimal: float
    aucoc_random: float
    ir: float
    n: int


def auroc(items: Iterable[LabeledScore]) -> float:
    """Probability that a failure outranks a non-failure, ties counted half.

    Computed in the Mann-Whitney mid-rank form, equivalent to brute-force
    pairwise counting.
    """
    items = list(items)
    scores = np.array([it.score for it in items])
    failures = np.array([bool(it.target) for it in items])
    n_pos = int(failures.sum())
    n_neg = failures.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("need at least one failure and one non-failure")
    ranks = rankdata(scores)
    u = float(ranks[failures].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _filter_order(scores: np.ndarray, ids: list[str]) -> np.ndarray:
    """Indices in filtering order: descending score, ties by ascending id."""
    return np.array(
        sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i])), dtype=int
    )


def _trapezoid(points) -> float:
    q = np.array([p[0] for p in points])
    v = np.array([p[1] for p in points])
    return float(np.trapezoid(v, q))


def cutoff_curve(items: Iterable[LabeledScore], kind: CurveKind) -> CutoffCurve:
    """Remaining-mean curve when filtering in descending order of uncertainty.

    For each removal count m in 0..n-1 the point (m/n, mean of remaining
    targets) is emitted; the terminal point carries the last remaining
    target to q = 1 so the integral spans the full unit interval.
    """
    items = list(items)
    n = len(items)
    if n < 2:
        raise EmptyInputError(f"need at least 2 items, got {n}")
    scores = np.array([it.score for it in items])
    targets = np.array([float(it.target) for it in items])
    order = _filter_order(scores, [it.sample_id for it in items])
    ordered_targets = targets[order]
    # remaining mean after removing the first m in filtering order
    suffix_means = np.cumsum(ordered_targets[::-1])[::-1] / np.arange(n, 0, -1)
    points = [(m / n, float(suffix_means[m])) for m in range(n)]
    points.append((1.0, float(ordered_targets[-1])))
    return CutoffCurve(points=tuple(points), aucoc=_trapezoid(points), kind=kind)


def baseline_curves(targets, kind: CurveKind) -> tuple[CutoffCurve, CutoffCurve]:
    """Optimal and random reference curves for a set of target values.

    The optimal curve filters worst-first using the target itself as the
    score; the random curve is the exact expectation under uniformly random
    filtering order, which is flat at the overall mean.
    """
    targets = np.asarray(list(targets), dtype=float)
    n = targets.size
    if n < 2:
        raise EmptyInputError(f"need at least 2 targets, got {n}")
    sign = 1.0 if kind == "error-down" else -1.0
    items = [
        LabeledScore(sample_id=f"{i:09d}", score=sign * t, target=t)
        for i, t in enumerate(targets)
    ]
    optimal = cutoff_curve(items, kind)
    mean = float(targets.mean())
    random = CutoffCurve(points=((0.0, mean), (1.0, mean)), aucoc=mean, kind=kind)
    return optimal, random


def improvement_ratio(aucoc_uncertainty: float, aucoc_optimal: float, aucoc_random: float) -> float:
    """Where a detector's AUCOC sits between random (0) and optimal (1)."""
    denom = aucoc_random - aucoc_optimal
    if abs(denom) < 1e-12:
        raise DegenerateBaselinesError("optimal and random AUCOC coincide")
    return (aucoc_random - aucoc_uncertainty) / denom


def detection_report(
    items: Iterable[LabeledScore], kind: CurveKind, with_auroc: bool = False
) -> tuple[DetectionReport, CutoffCurve, CutoffCurve, CutoffCurve]:
    """Full evaluation of one uncertainty score against one target."""
    items = list(items)
    curve = cutoff_curve(items, kind)
    optimal, random = baseline_curves([it.target for it in items], kind)
    report = DetectionReport(
        auroc=auroc(items) if with_auroc else None,
        aucoc_uncertainty=curve.aucoc,
        aucoc_optimal=optimal.aucoc,
        aucoc_random=random.aucoc,
        ir=improvement_ratio(curve.aucoc, optimal.aucoc, random.aucoc),
        n=len(items),
    )
    return report, curve, optimal, random


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray  # (bins + 1,)
    counts: np.ndarray  # (bins,)


def score_histograms(items: Iterable[LabeledScore], bins: int) -> dict[str, Histogram]:
    """Equal-width score histograms for correct vs misclassified samples."""
    items = list(items)
    if not items:
        raise EmptyInputError("no items to histogram")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    scores = np.array([it.score for it in items])
    lo, hi = float(scores.min()), float(scores.max())
    if lo == hi:  # all scores equal: one occupied bin around the common value
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    out = {}
    for name, flag in (("correct", False), ("misclassified", True)):
        cls = scores[[bool(it.target) == flag for it in items]]
        counts, _ = np.histogram(cls, bins=edges)
        out[name] = Histogram(edges=edges, counts=counts)
    return out


class EmptySplitError(UqfdError):
    pass


def split_mean_scores(rows: Iterable[Mapping[str, object]]) -> dict[str, dict[str, float]]:
    """Per-split arithmetic means of every numeric score field.

    Each row is a mapping with a "split" key plus named numeric values;
    None values (scores undefined for a record) are skipped.
    """
    groups: dict[str, dict[str, list[float]]] = {}
    for row in rows:
        split = str(row["split"])
        bucket = groups.setdefault(split, {})
        for key, value in row.items():
            if key == "split" or value is None:
                continue
            if isinstance(value, (int, float, np.floating)) and not isinstance(value, bool):
                bucket.setdefault(key, []).append(float(value))
    if not groups:
        raise EmptySplitError("no records to aggregate")
    return {
        split: {name: float(np.mean(vals)) for name, vals in bucket.items()}
        for split, bucket in groups.items()
    }
