"""Uncertainty-based failure detection toolkit for multimodal motion prediction."""

from .core import (
    EnsembleOutput,
    GaussianStep,
    ManeuverSet,
    ModelOutput,
    ProbVector,
    Sample,
    Trajectory,
    UqfdError,
    average_trajectory,
    validate_prob_vector,
)
from .errors import ErrorBundle, TwoLevelError, ade, fde, set_errors, two_level_error
from .evaluation import (
    CutoffCurve,
    DetectionReport,
    LabeledScore,
    auroc,
    baseline_curves,
    cutoff_curve,
    detection_report,
    improvement_ratio,
    score_histograms,
    split_mean_scores,
)
from .records import ScoreRecord, compute_score_record
from .sim import SimConfig, SurrogateModel, generate_dataset, label_maneuver, make_ensemble, predict, rollout
from .uq_class import (
    ClassScores,
    EvidenceVector,
    ProbMatrix,
    data_entropy,
    edl_alpha,
    edl_scores,
    edl_u,
    ensemble_scores,
    entropy,
    mean_probs,
    mutual_information,
    nmap,
    total_entropy,
)
from .uq_traj import (
    TrajGroup,
    TrajScores,
    ape,
    fit_step_gaussians,
    fpe,
    gaussian_step_entropy,
    trajectory_score_suite,
    unified_cluster,
)

__version__ = "0.1.0"
