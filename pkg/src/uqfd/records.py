"""Per-sample score records: the join of uncertainty scores and error metrics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .core import EnsembleOutput, Sample
from .errors import set_errors, two_level_error
from .uq_class import ProbMatrix, ensemble_scores, mean_probs
from .uq_traj import DEFAULT_EPS, trajectory_score_suite


@dataclass(frozen=True)
class ScoreRecord:
    """All named uncertainty scores and error metrics for one sample.

    Optional fields are None when undefined (EDL u without evidence input,
    cross-model trajectory scores for K = 1).
    """

    sample_id: str
    split: str
    gt_maneuver: int
    predicted_maneuver: int
    is_misclassified: bool
    # classification-stage uncertainty
    te: float
    de: float
    mi: float
    nmap: float
    u: float | None
    # trajectory-stage uncertainty
    ape_z: float | None
    fpe_z: float | None
    ape_avg: float | None
    fpe_avg: float | None
    mean_ape: float
    mean_fpe: float
    ape_all: float
    ape_maxp: float | None
    # errors of the K true-maneuver trajectories
    min_ade: float
    mean_ade: float
    ade_avg: float
    min_fde: float
    mean_fde: float
    fde_avg: float
    # two-level (model x mode) reductions
    meanmin_ade: float
    meanmean_ade: float
    minmin_ade: float
    meanmaxp_ade: float
    meanmin_fde: float
    meanmean_fde: float
    minmin_fde: float
    meanmaxp_fde: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreRecord":
        return cls(**{f.name: data[f.name] for f in dataclasses.fields(cls)})


SCORE_FIELDS = (
    "te",
    "de",
    "mi",
    "nmap",
    "u",
    "ape_z",
    "fpe_z",
    "ape_avg",
    "fpe_avg",
    "mean_ape",
    "mean_fpe",
    "ape_all",
    "ape_maxp",
)

METRIC_FIELDS = (
    "min_ade",
    "mean_ade",
    "ade_avg",
    "min_fde",
    "mean_fde",
    "fde_avg",
    "meanmin_ade",
    "meanmean_ade",
    "minmin_ade",
    "meanmaxp_ade",
    "meanmin_fde",
    "meanmean_fde",
    "minmin_fde",
    "meanmaxp_fde",
)


def compute_score_record(sample: Sample, ensemble: EnsembleOutput, eps: float = DEFAULT_EPS) -> ScoreRecord:
    """Score one sample against one ensemble output."""
    matrix = ProbMatrix.from_vectors([m.mode_probs for m in ensemble.members])
    class_scores = ensemble_scores(matrix)
    predicted = int(np.argmax(mean_probs(matrix).p))  # ties break toward lower index

    traj = trajectory_score_suite(ensemble, sample.gt_maneuver, eps)
    true_trajs = [m.mode_trajectories[sample.gt_maneuver] for m in ensemble.members]
    bundle = set_errors(true_trajs, sample.gt_future)

    def two_level(model_reduce, mode_reduce, metric):
        return two_level_error(ensemble, sample.gt_future, model_reduce, mode_reduce, metric).value

    return ScoreRecord(
        sample_id=sample.id,
        split=sample.split,
        gt_maneuver=sample.gt_maneuver,
        predicted_maneuver=predicted,
        is_misclassified=predicted != sample.gt_maneuver,
        te=class_scores.te,
        de=class_scores.de,
        mi=class_scores.mi,
        nmap=class_scores.nmap,
        u=class_scores.u,
        ape_z=traj.ape_z,
        fpe_z=traj.fpe_z,
        ape_avg=traj.ape_avg,
        fpe_avg=traj.fpe_avg,
        mean_ape=traj.mean_ape,
        mean_fpe=traj.mean_fpe,
        ape_all=traj.ape_all,
        ape_maxp=traj.ape_maxp,
        min_ade=bundle.min_ade,
        mean_ade=bundle.mean_ade,
        ade_avg=bundle.ade_avg,
        min_fde=bundle.min_fde,
        mean_fde=bundle.mean_fde,
        fde_avg=bundle.fde_avg,
        meanmin_ade=two_level("mean", "min", "ade"),
        meanmean_ade=two_level("mean", "mean", "ade"),
        minmin_ade=two_level("min", "min", "ade"),
        meanmaxp_ade=two_level("mean", "maxp", "ade"),
        meanmin_fde=two_level("mean", "min", "fde"),
        meanmean_fde=two_level("mean", "mean", "fde"),
        minmin_fde=two_level("min", "min", "fde"),
        meanmaxp_fde=two_level("mean", "maxp", "fde"),
    )
