"""Ground-truth displacement error metrics and their aggregations.

ADE/FDE are the usual average and final displacement errors in meters.
`set_errors` provides the single-level min/mean/average-trajectory
aggregation over a trajectory set; `two_level_error` reduces first over a
member's modes (min/mean/maxp) and then over ensemble members (mean/min).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    EmptySetError,
    EnsembleOutput,
    ShapeMismatchError,
    Trajectory,
    average_trajectory,
)

ModelReduce = Literal["mean", "min"]
ModeReduce = Literal["min", "mean", "maxp"]


@dataclass(frozen=True)
class ErrorBundle:
    """Min/mean/average-trajectory ADE and FDE over a set of predictions (m)."""

    min_ade: float
    mean_ade: float
    ade_avg: float
    min_fde: float
    mean_fde: float
    fde_avg: float


@dataclass(frozen=True)
class TwoLevelError:
    model_reduce: ModelReduce
    mode_reduce: ModeReduce
    value: float


def ade(pred: Trajectory, gt: Trajectory) -> float:
    """Average displacement error: mean per-step Euclidean distance."""
    if pred.horizon != gt.horizon:
        raise ShapeMismatchError(f"horizons differ: {pred.horizon} vs {gt.horizon}")
    return float(np.linalg.norm(pred.points - gt.points, axis=1).mean())


def fde(pred: Trajectory, gt: Trajectory) -> float:
    """Final displacement error: Euclidean distance at the last step."""
    if pred.horizon != gt.horizon:
        raise ShapeMismatchError(f"horizons differ: {pred.horizon} vs {gt.horizon}")
    return float(np.linalg.norm(pred.points[-1] - gt.points[-1]))


def set_errors(trajs, gt: Trajectory) -> ErrorBundle:
    """Min/mean ADE and FDE over a trajectory set, plus the errors of its mean."""
    trajs = list(trajs)
    if not trajs:
        raise EmptySetError("cannot compute errors of an empty trajectory set")
    ades = [ade(t, gt) for t in trajs]
    fdes = [fde(t, gt) for t in trajs]
    avg = average_trajectory(trajs)
    return ErrorBundle(
        min_ade=min(ades),
        mean_ade=float(np.mean(ades)),
        ade_avg=ade(avg, gt),
        min_fde=min(fdes),
        mean_fde=float(np.mean(fdes)),
        fde_avg=fde(avg, gt),
    )


def displacement_matrices(ensemble: EnsembleOutput, gt: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """(K, Z) matrices of per-mode ADE and FDE against the ground truth."""
    if ensemble.members[0].horizon != gt.horizon:
        raise ShapeMismatchError(
            f"horizons differ: {ensemble.members[0].horizon} vs {gt.horizon}"
        )
    preds = np.stack([[t.points for t in m.mode_trajectories] for m in ensemble.members])
    dists = np.linalg.norm(preds - gt.points, axis=3)  # (K, Z, t_f)
    return dists.mean(axis=2), dists[:, :, -1]


def two_level_error(
    ensemble: EnsembleOutput,
    gt: Trajectory,
    model_reduce: ModelReduce,
    mode_reduce: ModeReduce,
    metric: Literal["ade", "fde"] = "ade",
) -> TwoLevelError:
    """Reduce per-member over modes, then over ensemble members."""
    ades, fdes = displacement_matrices(ensemble, gt)
    values = {"ade": ades, "fde": fdes}[metric]
    if mode_reduce == "min":
        per_member = values.min(axis=1)
    elif mode_reduce == "mean":
        per_member = values.mean(axis=1)
    elif mode_reduce == "maxp":
        # equal max probabilities break toward the lower mode index
        maxp_idx = [int(np.argmax(m.mode_probs.p)) for m in ensemble.members]
        per_member = values[np.arange(ensemble.k), maxp_idx]
    else:
        raise ValueError(f"unknown mode reduce {mode_reduce!r}")
    if model_reduce == "mean":
        value = float(per_member.mean())
    elif model_reduce == "min":
        value = float(per_member.min())
    else:
        raise ValueError(f"unknown model reduce {model_reduce!r}")
    return TwoLevelError(model_reduce=model_reduce, mode_reduce=mode_reduce, value=value)
