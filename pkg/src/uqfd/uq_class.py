"""Classification-stage uncertainty scores.

Ensemble scores (total/data entropy, mutual information, negative max
probability) operate on the K softmax vectors of a deep ensemble; the
evidential scores operate on a Dirichlet parameter vector. All entropies
are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NonFiniteError,
    ProbVector,
    ShapeMismatchError,
    validate_prob_vector,
)


@dataclass(frozen=True)
class ProbMatrix:
    """The K ensemble softmax vectors over a shared maneuver set, one per row."""

    rows: np.ndarray  # (K, Z)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 2:
            raise ShapeMismatchError(f"expected (K, Z) with K >= 1, Z >= 2, got {rows.shape}")
        for row in rows:
            validate_prob_vector(row)
        arr = rows.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @classmethod
    def from_vectors(cls, vectors) -> "ProbMatrix":
        return cls(np.stack([v.p if isinstance(v, ProbVector) else np.asarray(v) for v in vectors]))

    @property
    def k(self) -> int:
        return self.rows.shape[0]

    @property
    def z(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class EvidenceVector:
    """Nonnegative per-class evidence; alpha = evidence + 1."""

    e: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ShapeMismatchError(f"evidence must be a vector of length >= 2, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise NonFiniteError("non-finite evidence")
        if np.any(e < 0):
            raise ValueError(f"evidence must be nonnegative, got {e!r}")
        arr = e.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "e", arr)


@dataclass(frozen=True)
class ClassScores:
    """Named classification-stage uncertainty scores for one sample (nats)."""

    te: float
    de: float
    mi: float
    nmap: float
    u: float | None = None


def entropy(p: ProbVector) -> float:
    """Shannon entropy -sum p ln p with the 0 ln 0 := 0 convention."""
    if not isinstance(p, ProbVector):
        p = validate_prob_vector(p)
    return _entropy(p.p)


def _entropy(arr: np.ndarray) -> float:
    mask = arr > 0.0
    return float(-np.sum(arr[mask] * np.log(arr[mask])))


def mean_probs(matrix: ProbMatrix) -> ProbVector:
    """Columnwise mean of the ensemble softmax vectors."""
    mean = matrix.rows.mean(axis=0)
    return validate_prob_vector(mean)


def total_entropy(matrix: ProbMatrix) -> float:
    """Entropy of the ensemble-mean distribution (total uncertainty)."""
    return entropy(mean_probs(matrix))


def data_entropy(matrix: ProbMatrix) -> float:
    """Mean per-member entropy (motion/aleatoric component)."""
    return float(np.mean([_entropy(row) for row in matrix.rows]))


def mutual_information(matrix: ProbMatrix) -> float:
    """Total minus data entropy (model/epistemic component).

    May carry floating noise down to about -1e-12; deliberately not clamped.
    """
    return total_entropy(matrix) - data_entropy(matrix)


def nmap(matrix: ProbMatrix) -> float:
    """Negative maximum probability of the ensemble-mean distribution."""
    return float(-np.max(mean_probs(matrix).p))


def ensemble_scores(matrix: ProbMatrix) -> ClassScores:
    """All ensemble classification scores at once (te = de + mi by construction)."""
    te = total_entropy(matrix)
    de = data_entropy(matrix)
    return ClassScores(te=te, de=de, mi=te - de, nmap=nmap(matrix))


def digamma(x: float) -> float:
    """Digamma function for x > 0.

    Recurrence shifts the argument above 8, then an asymptotic series in
    1/x^2 is applied; absolute error is below 1e-12 on [1, inf).
    """
    if not np.isfinite(x) or x <= 0:
        raise NonFiniteError(f"digamma requires finite x > 0, got {x!r}")
    result = 0.0
    while x < 8.0:
        result -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Bernoulli-number series: ln x - 1/(2x) - sum B_2n / (2n x^2n)
    series = inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0)))
    )
    return result + np.log(x) - 0.5 / x - series


def edl_alpha(evidence: EvidenceVector) -> np.ndarray:
    """Dirichlet parameters from per-class evidence: alpha_z = e_z + 1."""
    if not isinstance(evidence, EvidenceVector):
        evidence = EvidenceVector(np.asarray(evidence, dtype=float))
    return evidence.e + 1.0


def _check_alpha(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if not np.all(np.isfinite(alpha)):
        raise NonFiniteError("non-finite alpha")
    if np.any(alpha < 1.0):
        raise ValueError(f"alpha must be >= 1 elementwise, got {alpha!r}")
    return alpha


def edl_u(alpha) -> float:
    """Dirichlet uncertainty mass: Z over the total concentration."""
    alpha = _check_alpha(alpha)
    return float(alpha.size / np.sum(alpha))


def edl_scores(alpha) -> ClassScores:
    """Classification uncertainty scores under a Dirichlet prior.

    te is the entropy of the mean categorical distribution alpha / S;
    de is the expected categorical entropy under the Dirichlet,
    sum_z (alpha_z / S) (psi(S + 1) - psi(alpha_z + 1)); mi = te - de.
    """
    alpha = _check_alpha(alpha)
    total = float(np.sum(alpha))
    p_bar = alpha / total
    te = _entropy(p_bar)
    psi_total = digamma(total + 1.0)
    de = float(sum(pz * (psi_total - digamma(az + 1.0)) for pz, az in zip(p_bar, alpha)))
    return ClassScores(
        te=te,
        de=de,
        mi=te - de,
        nmap=float(-np.max(p_bar)),
        u=float(alpha.size / total),
    )
