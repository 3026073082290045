"""Seeded synthetic scene generator and surrogate multimodal predictor.

Scenes follow constant-turn-rate / constant-deceleration kinematics over a
four-maneuver set (straight, left, right, stop). A configurable fraction of
scenes is drawn near the maneuver decision boundaries, and observation
noise corrupts the history only, so prediction errors reflect estimation
quality rather than label noise.

The surrogate predictor replaces a trained network: a softmax over
hand-built history features (mean speed, mean yaw rate, mean longitudinal
acceleration) for maneuver classification, and kinematic rollouts for the
per-maneuver trajectories. Ensemble members differ by multiplicative weight
jitter, by the history window they read features from, and by random
extrapolation sensitivities that only activate outside the feature ranges
seen in the default (in-distribution) regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    InvalidManeuverError,
    ModelOutput,
    Sample,
    ShapeMismatchError,
    Trajectory,
    UqfdError,
    validate_prob_vector,
)

MANEUVER_STRAIGHT, MANEUVER_LEFT, MANEUVER_RIGHT, MANEUVER_STOP = range(4)

STOP_SPEED_THRESHOLD = 0.5  # m/s: below this final speed a scene is "stop"
TURN_HEADING_THRESHOLD = math.radians(15.0)  # net heading change for a turn

OOD_SPEED_RANGE = (10.0, 20.0)
OOD_YAW_RATE = 0.6

# logit gains and extrapolation strength of the surrogate classifier,
# chosen so the noise-free regime is perfectly separable while boundary
# scenes stay soft (max probability well below 0.7)
BASE_TURN_GAIN = 12.0
BASE_STOP_GAIN = 6.0
EXTRAPOLATION_SIGMA = 3.0


class ConfigInvalidError(UqfdError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 1000
    seed: int = 0
    rate_hz: float = 2.0
    t_h: int = 6
    t_f: int = 6
    speed_range: tuple[float, float] = (2.0, 12.0)
    yaw_rate_turn: float = 0.35
    stop_decel: float = 2.0
    obs_noise_sigma: float = 0.15
    ambiguity: float = 0.3
    ood: bool = False

    def __post_init__(self):
        if self.n_samples < 0 or self.rate_hz <= 0 or self.t_h < 2 or self.t_f < 2:
            raise ConfigInvalidError(f"invalid simulator config: {self}")
        if not (0.0 <= self.ambiguity <= 1.0):
            raise ConfigInvalidError(f"ambiguity must be in [0, 1], got {self.ambiguity}")
        lo, hi = self.speed_range
        if not (0 < lo <= hi) or self.yaw_rate_turn <= 0 or self.stop_decel <= 0:
            raise ConfigInvalidError(f"invalid kinematic ranges: {self}")
        if self.obs_noise_sigma < 0:
            raise ConfigInvalidError("obs_noise_sigma must be nonnegative")

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    def effective(self) -> "SimConfig":
        """The regime actually sampled: the ood flag shifts speed and yaw."""
        if not self.ood:
            return self
        return replace(self, speed_range=OOD_SPEED_RANGE, yaw_rate_turn=OOD_YAW_RATE, ood=True)


_MASK = (1 << 64) - 1


def mix64(seed: int, index: int) -> int:
    """Derive an independent 64-bit sub-seed (splitmix64 finalizer)."""
    x = (seed ^ (0x9E3779B97F4A7C15 * (index + 1))) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def _kinematic_states(x0, y0, heading0, speed0, yaw_rate, decel, times):
    """Closed-form positions/headings/speeds at the given times.

    Either yaw_rate or decel must be zero. Deceleration clamps speed at zero
    for t >= 0 (exact stop-and-hold); for t < 0 the speed simply grows
    backwards, which is the intended pre-deceleration history.
    """
    times = np.asarray(times, dtype=float)
    if yaw_rate != 0.0 and decel != 0.0:
        raise InvalidManeuverError("combined turn and deceleration is not modeled")
    if yaw_rate != 0.0:
        headings = heading0 + yaw_rate * times
        radius = speed0 / yaw_rate
        xs = x0 + radius * (np.sin(headings) - np.sin(heading0))
        ys = y0 + radius * (np.cos(heading0) - np.cos(headings))
        speeds = np.full_like(times, speed0)
    else:
        t_stop = speed0 / decel if decel > 0 else np.inf
        t_eff = np.where(times > t_stop, t_stop, times)
        dist = speed0 * t_eff - 0.5 * decel * t_eff**2
        xs = x0 + dist * math.cos(heading0)
        ys = y0 + dist * math.sin(heading0)
        headings = np.full_like(times, heading0)
        speeds = np.maximum(speed0 - decel * times, 0.0) if decel > 0 else np.full_like(times, speed0)
        speeds = np.where(times < 0, speed0 - decel * times, speeds)
    return np.stack([xs, ys], axis=1), headings, speeds


@dataclass(frozen=True)
class KinematicParams:
    """Rollout parameters, jittered per surrogate model."""

    yaw_rate: float  # rad/s magnitude for turn modes
    decel: float  # m/s^2 for the stop mode


def rollout(maneuver: int, start_state, steps: int, rate_hz: float, params: KinematicParams) -> Trajectory:
    """Kinematic rollout of one maneuver from (x, y, heading, speed)."""
    x0, y0, heading0, speed0 = (float(v) for v in start_state)
    if speed0 < 0:
        raise InvalidManeuverError(f"speed must be nonnegative, got {speed0}")
    dt = 1.0 / rate_hz
    times = np.arange(1, steps + 1) * dt
    if maneuver == MANEUVER_STRAIGHT:
        yaw, dec = 0.0, 0.0
    elif maneuver == MANEUVER_LEFT:
        yaw, dec = params.yaw_rate, 0.0
    elif maneuver == MANEUVER_RIGHT:
        yaw, dec = -params.yaw_rate, 0.0
    elif maneuver == MANEUVER_STOP:
        yaw, dec = 0.0, params.decel
    else:
        raise InvalidManeuverError(f"unknown maneuver index {maneuver}")
    positions, _, _ = _kinematic_states(x0, y0, heading0, speed0, yaw, dec, times)
    return Trajectory(positions)


def _wrap_angle(a):
    return (np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi


def label_maneuver(future: Trajectory, history_end_state, rate_hz: float = 2.0) -> int:
    """Ground-truth maneuver of a noiseless future trajectory.

    Stop if the final-segment speed falls below 0.5 m/s, otherwise left or
    right if the net heading change (last-segment direction minus the
    heading at t = 0) exceeds +/-15 degrees, else straight.
    """
    pts = future.points
    if pts.shape[0] < 2:
        raise ShapeMismatchError("labeling needs a future of at least 2 steps")
    last_seg = pts[-1] - pts[-2]
    final_speed = float(np.linalg.norm(last_seg)) * rate_hz
    if final_speed < STOP_SPEED_THRESHOLD:
        return MANEUVER_STOP
    heading0 = float(history_end_state[2])
    delta = float(_wrap_angle(math.atan2(last_seg[1], last_seg[0]) - heading0))
    if delta > TURN_HEADING_THRESHOLD:
        return MANEUVER_LEFT
    if delta < -TURN_HEADING_THRESHOLD:
        return MANEUVER_RIGHT
    return MANEUVER_STRAIGHT


def _boundary_yaw_rate(cfg: SimConfig) -> float:
    # yaw rate at which the net-heading-change label flips: the last-segment
    # direction corresponds to time (t_f - 0.5) * dt
    return TURN_HEADING_THRESHOLD / ((cfg.t_f - 0.5) * cfg.dt)


def _derived_channels(positions: np.ndarray, rate_hz: float) -> np.ndarray:
    """History rows (x, y, heading, speed) with heading/speed re-estimated
    from the (possibly noisy) positions, as a tracking frontend would."""
    segs = np.diff(positions, axis=0)
    speeds = np.linalg.norm(segs, axis=1) * rate_hz
    headings = np.arctan2(segs[:, 1], segs[:, 0])
    # first row has no preceding segment; copy the first estimate
    headings = np.concatenate([[headings[0]], headings])
    speeds = np.concatenate([[speeds[0]], speeds])
    return np.column_stack([positions, headings, speeds])


def generate_dataset(cfg: SimConfig) -> list[Sample]:
    """Deterministically generate n_samples scenes from the config seed."""
    eff = cfg.effective()
    dt = eff.dt
    hist_times = (np.arange(eff.t_h) - eff.t_h + 1) * dt
    fut_times = np.arange(1, eff.t_f + 1) * dt
    horizon = (eff.t_f - 0.5) * dt
    split = "ood" if eff.ood else "id"
    samples = []
    for i in range(eff.n_samples):
        rng = np.random.default_rng(mix64(eff.seed, i))
        x0, y0 = rng.uniform(-50.0, 50.0, size=2)
        heading0 = rng.uniform(-math.pi, math.pi)
        speed0 = rng.uniform(*eff.speed_range)
        yaw, dec = 0.0, 0.0
        if rng.random() < eff.ambiguity:
            if rng.random() < 0.5:  # near the straight/turn boundary
                w_star = _boundary_yaw_rate(eff)
                yaw = float(rng.normal(w_star, 0.4 * w_star)) * float(rng.choice([-1.0, 1.0]))
            else:  # near the straight/stop boundary
                v_final = float(rng.normal(STOP_SPEED_THRESHOLD, 0.3))
                dec = max((speed0 - v_final) / horizon, 0.05)
        else:
            maneuver = int(rng.integers(4))
            if maneuver == MANEUVER_LEFT:
                yaw = eff.yaw_rate_turn
            elif maneuver == MANEUVER_RIGHT:
                yaw = -eff.yaw_rate_turn
            elif maneuver == MANEUVER_STOP:
                t_stop = float(rng.uniform(0.5, 0.9)) * eff.t_f * dt
                dec = speed0 / t_stop
        hist_pos, _, _ = _kinematic_states(x0, y0, heading0, speed0, yaw, dec, hist_times)
        fut_pos, _, _ = _kinematic_states(x0, y0, heading0, speed0, yaw, dec, fut_times)
        future = Trajectory(fut_pos)
        gt = label_maneuver(future, (x0, y0, heading0, speed0), eff.rate_hz)
        noisy_pos = hist_pos + rng.normal(0.0, eff.obs_noise_sigma, size=hist_pos.shape)
        history = _derived_channels(noisy_pos, eff.rate_hz)
        samples.append(
            Sample(
                id=f"s{i:06d}",
                history=history,
                gt_future=future,
                gt_maneuver=gt,
                split=split,
            )
        )
    return samples


@dataclass(frozen=True)
class SurrogateModel:
    """One ensemble member: classifier weights plus rollout parameters."""

    turn_gain_left: float
    turn_gain_right: float
    stop_gain: float
    yaw_threshold: float  # rad/s
    stop_speed_threshold: float  # m/s
    horizon_time: float  # seconds ahead targeted by the final-speed estimate
    feature_window: int  # history segments used for features
    state_window: int  # segments averaged into the rollout start state
    kinematics: KinematicParams
    rate_hz: float
    gamma: np.ndarray  # (4,) per-class extrapolation sensitivities
    yaw_range_hi: float  # in-distribution feature ranges; beyond them the
    speed_range_hi: float  # gamma terms activate
    accel_range_hi: float

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (4,) or not np.all(np.isfinite(g)):
            raise ConfigInvalidError(f"bad extrapolation coefficients {g!r}")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)


def make_ensemble(
    k: int, seed: int, cfg: SimConfig | None = None, jitter_sigma: float = 0.05
) -> list[SurrogateModel]:
    """Build K surrogate models with deterministic per-model jitter.

    cfg describes the (in-distribution) training regime; it fixes the
    decision thresholds and the feature ranges beyond which the models
    disagree. jitter_sigma = 0 yields identical, exactly-thresholded models.
    """
    if k < 1:
        raise ConfigInvalidError(f"need K >= 1, got {k}")
    cfg = cfg or SimConfig()
    dt = cfg.dt
    models = []
    for idx in range(k):
        rng = np.random.default_rng(mix64(seed ^ 0xA5A5A5A5A5A5A5A5, idx))

        def jit():
            return float(rng.normal(1.0, jitter_sigma)) if jitter_sigma > 0 else 1.0

        gamma = rng.normal(0.0, EXTRAPOLATION_SIGMA, size=4)
        if jitter_sigma == 0:
            gamma = np.zeros(4)
        models.append(
            SurrogateModel(
                turn_gain_left=BASE_TURN_GAIN * jit(),
                turn_gain_right=BASE_TURN_GAIN * jit(),
                stop_gain=BASE_STOP_GAIN * jit(),
                yaw_threshold=_boundary_yaw_rate(cfg) * jit(),
                stop_speed_threshold=STOP_SPEED_THRESHOLD * jit(),
                horizon_time=(cfg.t_f - 0.5) * dt,
                feature_window=5 if jitter_sigma == 0 else int(rng.integers(3, 6)),
                state_window=1 if jitter_sigma == 0 else int(rng.integers(1, 4)),
                kinematics=KinematicParams(
                    yaw_rate=cfg.yaw_rate_turn * jit(), decel=cfg.stop_decel * jit()
                ),
                rate_hz=cfg.rate_hz,
                gamma=gamma,
                yaw_range_hi=1.28 * cfg.yaw_rate_turn,
                speed_range_hi=cfg.speed_range[1] + 1.0,
                accel_range_hi=cfg.speed_range[1] / 1.5 + 1.0,
            )
        )
    return models


def predict(model: SurrogateModel, sample: Sample) -> ModelOutput:
    """One surrogate model's maneuver probabilities and mode trajectories."""
    dt = 1.0 / model.rate_hz
    positions = sample.history[:, :2]
    headings = sample.history[:, 2]
    speeds_channel = sample.history[:, 3]
    seg_speeds = np.linalg.norm(np.diff(positions, axis=0), axis=1) * model.rate_hz

    w = min(model.feature_window, seg_speeds.size)
    v_mean = float(seg_speeds[-w:].mean())
    yaw_diffs = _wrap_angle(np.diff(headings))
    yaw_rate = float(yaw_diffs[-(w - 1):].mean()) / dt
    accels = np.diff(speeds_channel) / dt
    a_mean = float(accels[-(w - 1):].mean())
    v_end = float(seg_speeds[-1])

    # speed predicted at the labeling horizon, compensating the half-window
    # lag of the mean-speed feature
    v_final_pred = v_mean + a_mean * (model.horizon_time + 0.5 * w * dt)
    logits = np.array(
        [
            0.0,
            model.turn_gain_left * (yaw_rate - model.yaw_threshold),
            model.turn_gain_right * (-yaw_rate - model.yaw_threshold),
            model.stop_gain * (model.stop_speed_threshold - v_final_pred),
        ]
    )
    out_of_range = (
        max(0.0, abs(yaw_rate) - model.yaw_range_hi) / 0.15
        + max(0.0, v_end - model.speed_range_hi) / 5.0
        + max(0.0, abs(a_mean) - model.accel_range_hi) / 2.0
    )
    logits = logits + model.gamma * out_of_range
    exp = np.exp(logits - logits.max())
    probs = exp / exp.sum()

    sw = model.state_window
    recent = headings[-sw:]
    heading0 = float(np.arctan2(np.sin(recent).sum(), np.cos(recent).sum()))
    speed0 = float(seg_speeds[-sw:].mean())
    start = (positions[-1, 0], positions[-1, 1], heading0, speed0)
    t_f = sample.gt_future.horizon
    mode_trajectories = tuple(
        rollout(z, start, t_f, model.rate_hz, model.kinematics) for z in range(4)
    )
    return ModelOutput(
        sample_id=sample.id,
        mode_probs=validate_prob_vector(probs),
        mode_trajectories=mode_trajectories,
    )
