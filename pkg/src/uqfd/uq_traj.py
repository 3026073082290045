"""Trajectory-stage uncertainty.

A group of predicted trajectories is summarized by per-timestep bivariate
Gaussian fits; the mean and final differential entropies of those fits give
the average and final predictive entropy. The grouping variants (per true
maneuver, cross-model averages, per-member modes, pooled, max-probability)
cover the different sources of trajectory disagreement in a deep ensemble.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    EmptySetError,
    EnsembleOutput,
    GaussianStep,
    InvalidManeuverError,
    ShapeMismatchError,
    SingularCovarianceError,
    Trajectory,
    UqfdError,
)

DEFAULT_EPS = 1e-6  # ridge added to fitted covariances, m^2

ENTROPY_CONST = np.log(2.0 * np.pi) + 1.0


class TooFewTrajectoriesError(UqfdError):
    pass


class Provenance(enum.Enum):
    PER_MODEL_TRUE_MANEUVER = "per-model-true-maneuver"
    CROSS_MODEL_AVERAGED_PER_MANEUVER = "cross-model-averaged-per-maneuver"
    PER_MODEL_ALL_MODES = "per-model-all-modes"
    POOLED_ALL = "pooled-all"
    MAXP_PER_MODEL = "maxp-per-model"


@dataclass(frozen=True)
class TrajGroup:
    """Equal-horizon trajectories that are scored together."""

    trajs: tuple[Trajectory, ...]
    provenance: Provenance | None = None

    def __post_init__(self):
        trajs = tuple(self.trajs)
        if not trajs:
            raise EmptySetError("trajectory group is empty")
        horizon = trajs[0].horizon
        for t in trajs[1:]:
            if t.horizon != horizon:
                raise ShapeMismatchError("group trajectories have different horizons")
        object.__setattr__(self, "trajs", trajs)

    @property
    def horizon(self) -> int:
        return self.trajs[0].horizon

    def stacked(self) -> np.ndarray:
        """(n, t_f, 2) array of all member positions."""
        return np.stack([t.points for t in self.trajs])


@dataclass(frozen=True)
class TrajScores:
    """Named trajectory-stage uncertainty scores for one sample.

    Cross-model fields (ape_z, fpe_z, ape_avg, fpe_avg, ape_maxp) are None
    for single-model ensembles. Values are differential entropies in nats
    and may be negative.
    """

    ape_z: float | None
    fpe_z: float | None
    ape_avg: float | None
    fpe_avg: float | None
    mean_ape: float
    mean_fpe: float
    ape_all: float
    ape_maxp: float | None


def _step_moments(pts: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-timestep mean (t_f, 2) and ridge-regularized covariance (t_f, 2, 2)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    n = pts.shape[0]
    mean = pts.mean(axis=0)
    if n >= 2:
        centered = pts - mean
        cov = np.einsum("nti,ntj->tij", centered, centered) / (n - 1)
    else:
        cov = np.zeros((pts.shape[1], 2, 2))
    return mean, cov + eps * np.eye(2)


def _step_entropies(pts: np.ndarray, eps: float) -> np.ndarray:
    """Per-timestep bivariate Gaussian entropies of an (n, t_f, 2) point set."""
    _, cov = _step_moments(pts, eps)
    det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
    if np.any(det <= 0):
        raise SingularCovarianceError("non-positive covariance determinant")
    return ENTROPY_CONST + 0.5 * np.log(det)


def fit_step_gaussians(group: TrajGroup, eps: float = DEFAULT_EPS) -> list[GaussianStep]:
    """Fit one bivariate Gaussian per timestep over the group's positions.

    Covariance is the unbiased sample covariance (divisor n - 1) for n >= 2,
    zero for n = 1, and always regularized with eps * I so the result is SPD.
    """
    mean, cov = _step_moments(group.stacked(), eps)
    return [GaussianStep(mean=mean[i], cov=cov[i]) for i in range(group.horizon)]


def gaussian_step_entropy(step: GaussianStep) -> float:
    """Differential entropy of a bivariate Gaussian: (ln 2pi + 1) + ln|cov| / 2."""
    cov = step.cov
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    if det <= 0:
        raise SingularCovarianceError(
            f"covariance determinant {det!r} <= 0; was regularization skipped?"
        )
    return float(ENTROPY_CONST + 0.5 * np.log(det))


def ape(group: TrajGroup, eps: float = DEFAULT_EPS) -> float:
    """Average predictive entropy: mean per-step Gaussian entropy."""
    return float(_step_entropies(group.stacked(), eps).mean())


def fpe(group: TrajGroup, eps: float = DEFAULT_EPS) -> float:
    """Final predictive entropy: Gaussian entropy at the last timestep only."""
    return float(_step_entropies(group.stacked(), eps)[-1])


def trajectory_score_suite(
    ensemble: EnsembleOutput, true_maneuver: int, eps: float = DEFAULT_EPS
) -> TrajScores:
    """Score the five trajectory groupings of a multimodal ensemble output.

    Groups: (1) the K trajectories for the true maneuver; (2) the Z
    cross-model average trajectories, one per maneuver; (3) each member's own
    Z mode trajectories, averaged over members; (4) all K * Z pooled
    trajectories; (5) the K per-member maximum-probability trajectories.
    Cross-model groups (1, 2, 5) need K >= 2 and are None otherwise.
    """
    members = ensemble.members
    z = ensemble.z
    if not 0 <= true_maneuver < z:
        raise InvalidManeuverError(f"true_maneuver {true_maneuver} out of range for Z={z}")
    k = ensemble.k
    # (K, Z, t_f, 2) stack of every member's mode trajectories
    pts = np.stack([[t.points for t in m.mode_trajectories] for m in members])
    t_f = pts.shape[2]

    member_entropies = np.stack([_step_entropies(pts[ki], eps) for ki in range(k)])
    mean_ape = float(member_entropies.mean())
    mean_fpe = float(member_entropies[:, -1].mean())
    all_entropies = _step_entropies(pts.reshape(k * z, t_f, 2), eps)
    ape_all = float(all_entropies.mean())

    if k < 2:
        return TrajScores(
            ape_z=None,
            fpe_z=None,
            ape_avg=None,
            fpe_avg=None,
            mean_ape=mean_ape,
            mean_fpe=mean_fpe,
            ape_all=ape_all,
            ape_maxp=None,
        )

    true_entropies = _step_entropies(pts[:, true_maneuver], eps)
    avg_entropies = _step_entropies(pts.mean(axis=0), eps)
    maxp_idx = [int(np.argmax(m.mode_probs.p)) for m in members]
    maxp_entropies = _step_entropies(pts[np.arange(k), maxp_idx], eps)
    return TrajScores(
        ape_z=float(true_entropies.mean()),
        fpe_z=float(true_entropies[-1]),
        ape_avg=float(avg_entropies.mean()),
        fpe_avg=float(avg_entropies[-1]),
        mean_ape=mean_ape,
        mean_fpe=mean_fpe,
        ape_all=ape_all,
        ape_maxp=float(maxp_entropies.mean()),
    )


@dataclass(frozen=True)
class ClusteringResult:
    """Output of unified clustering over pooled ensemble trajectories."""

    centers: tuple[Trajectory, ...]  # sorted by cluster size, descending
    assignments: np.ndarray  # (n,) cluster index per input trajectory
    cost_history: tuple[float, ...]  # total assignment cost after each iteration
    n_iter: int


def _traj_distance(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Mean pointwise Euclidean distance of each trajectory to a center."""
    return np.linalg.norm(points - center[None], axis=2).mean(axis=1)


def unified_cluster(trajs, n_clusters: int, seed: int | None = None) -> ClusteringResult:
    """K-means over pooled trajectories under mean-pointwise-Euclidean distance.

    Initialization is deterministic farthest-point seeding (first center is
    the trajectory with the largest flat norm), so `seed` is accepted for
    interface stability but never consulted.
    """
    trajs = tuple(trajs)
    if len(trajs) < n_clusters:
        raise TooFewTrajectoriesError(f"{len(trajs)} trajectories for {n_clusters} clusters")
    group = TrajGroup(trajs)
    pts = group.stacked()  # (n, t_f, 2)
    n = pts.shape[0]

    flat_norms = np.linalg.norm(pts.reshape(n, -1), axis=1)
    center_idx = [int(np.argmax(flat_norms))]
    min_dist = _traj_distance(pts, pts[center_idx[0]])
    while len(center_idx) < n_clusters:
        nxt = int(np.argmax(min_dist))
        center_idx.append(nxt)
        min_dist = np.minimum(min_dist, _traj_distance(pts, pts[nxt]))
    centers = pts[center_idx].copy()

    assignments = np.full(n, -1, dtype=int)
    cost_history = []
    n_iter = 0
    for _ in range(100):
        dists = np.stack([_traj_distance(pts, c) for c in centers])  # (Z, n)
        new_assignments = np.argmin(dists, axis=0)
        cost = float(dists[new_assignments, np.arange(n)].sum())
        # mean updates do not minimize the unsquared objective, so an
        # iteration can regress slightly; stop before accepting one that does
        if cost_history and cost > cost_history[-1]:
            centers = prev_centers
            break
        prev_centers = centers.copy()
        n_iter += 1
        cost_history.append(cost)
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for c in range(n_clusters):
            mask = assignments == c
            if mask.any():  # empty clusters keep their previous center
                centers[c] = pts[mask].mean(axis=0)

    sizes = np.bincount(assignments, minlength=n_clusters)
    first_member = np.array(
        [int(np.argmax(assignments == c)) if sizes[c] else n for c in range(n_clusters)]
    )
    order = sorted(range(n_clusters), key=lambda c: (-sizes[c], first_member[c]))
    relabel = np.empty(n_clusters, dtype=int)
    for new, old in enumerate(order):
        relabel[old] = new
    return ClusteringResult(
        centers=tuple(Trajectory(centers[old]) for old in order),
        assignments=relabel[assignments],
        cost_history=tuple(cost_history),
        n_iter=n_iter,
    )
