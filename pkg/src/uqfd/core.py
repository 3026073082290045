"""Shared domain types and elementary trajectory utilities.

All types are immutable value objects: arrays are copied on construction and
marked read-only, so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MANEUVER_LABELS = ("straight", "left", "right", "stop")

PROB_SUM_TOL = 1e-9
COV_SYMMETRY_TOL = 1e-12


class UqfdError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteError(UqfdError):
    pass


class NegativeProbabilityError(UqfdError):
    pass


class SumNotOneError(UqfdError):
    pass


class ShapeMismatchError(UqfdError):
    pass


class EmptySetError(UqfdError):
    pass


class SingularCovarianceError(UqfdError):
    pass


class InvalidManeuverError(UqfdError):
    pass


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ManeuverSet:
    """Ordered set of discrete maneuver labels (the Z behavior modes)."""

    labels: tuple[str, ...] = DEFAULT_MANEUVER_LABELS

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValueError("need at least 2 maneuver labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("maneuver labels must be unique")
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def z(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class ProbVector:
    """A validated categorical probability vector.

    Values are checked, never renormalized: producers must emit proper
    softmax outputs.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ShapeMismatchError(f"expected 1-d vector of length >= 2, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise NonFiniteError("probability vector contains non-finite values")
        if np.any(p < 0.0):
            raise NegativeProbabilityError(f"negative probability in {p!r}")
        total = float(np.sum(p))
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise SumNotOneError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "p", _frozen_array(p))

    def __len__(self) -> int:
        return self.p.size


def validate_prob_vector(p) -> ProbVector:
    """Validate a raw vector of class probabilities."""
    return ProbVector(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class Trajectory:
    """A planar trajectory: t_f predicted or observed positions in meters."""

    points: np.ndarray  # (t_f, 2)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ShapeMismatchError(f"trajectory must be (t_f, 2) with t_f >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteError("trajectory contains non-finite coordinates")
        object.__setattr__(self, "points", _frozen_array(pts))

    @property
    def horizon(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Sample:
    """One prediction scene: observed history plus ground-truth future."""

    id: str
    history: np.ndarray  # (t_h, 4): x [m], y [m], heading [rad], speed [m/s]
    gt_future: Trajectory
    gt_maneuver: int
    split: str = "id"
    maneuvers: ManeuverSet = field(default_factory=ManeuverSet)

    def __post_init__(self):
        hist = np.asarray(self.history, dtype=float)
        if hist.ndim != 2 or hist.shape[1] != 4 or hist.shape[0] < 2:
            raise ShapeMismatchError(f"history must be (t_h, 4) with t_h >= 2, got {hist.shape}")
        if not np.all(np.isfinite(hist)):
            raise NonFiniteError("history contains non-finite values")
        if not 0 <= self.gt_maneuver < self.maneuvers.z:
            raise InvalidManeuverError(f"gt_maneuver {self.gt_maneuver} out of range")
        object.__setattr__(self, "history", _frozen_array(hist))


@dataclass(frozen=True)
class ModelOutput:
    """One model's maneuver probabilities plus one trajectory per maneuver."""

    sample_id: str
    mode_probs: ProbVector
    mode_trajectories: tuple[Trajectory, ...]

    def __post_init__(self):
        trajs = tuple(self.mode_trajectories)
        if len(trajs) != len(self.mode_probs):
            raise ShapeMismatchError(
                f"{len(trajs)} mode trajectories for {len(self.mode_probs)} maneuvers"
            )
        horizons = {t.horizon for t in trajs}
        if len(horizons) != 1:
            raise ShapeMismatchError(f"mode trajectories disagree on horizon: {sorted(horizons)}")
        object.__setattr__(self, "mode_trajectories", trajs)

    @property
    def horizon(self) -> int:
        return self.mode_trajectories[0].horizon


@dataclass(frozen=True)
class EnsembleOutput:
    """The K per-model outputs of a deep ensemble for one sample."""

    sample_id: str
    members: tuple[ModelOutput, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise EmptySetError("ensemble needs at least one member")
        for m in members:
            if m.sample_id != self.sample_id:
                raise ShapeMismatchError(
                    f"member sample_id {m.sample_id!r} != {self.sample_id!r}"
                )
        z = len(members[0].mode_probs)
        horizon = members[0].horizon
        for m in members[1:]:
            if len(m.mode_probs) != z or m.horizon != horizon:
                raise ShapeMismatchError("ensemble members disagree on Z or horizon")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def z(self) -> int:
        return len(self.members[0].mode_probs)


@dataclass(frozen=True)
class GaussianStep:
    """A bivariate Gaussian fitted to the predicted positions at one timestep."""

    mean: np.ndarray  # (2,), meters
    cov: np.ndarray  # (2, 2), m^2

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (2,) or cov.shape != (2, 2):
            raise ShapeMismatchError(f"bad Gaussian shapes: {mean.shape}, {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise NonFiniteError("non-finite Gaussian parameters")
        if abs(cov[0, 1] - cov[1, 0]) > COV_SYMMETRY_TOL:
            raise ShapeMismatchError(f"covariance not symmetric: {cov!r}")
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "cov", _frozen_array(cov))


def average_trajectory(trajs) -> Trajectory:
    """Pointwise arithmetic mean of a set of equal-horizon trajectories."""
    trajs = list(trajs)
    if not trajs:
        raise EmptySetError("cannot average an empty set of trajectories")
    horizon = trajs[0].horizon
    for t in trajs[1:]:
        if t.horizon != horizon:
            raise ShapeMismatchError("trajectories have different horizons")
    stacked = np.stack([t.points for t in trajs])
    return Trajectory(stacked.mean(axis=0))
