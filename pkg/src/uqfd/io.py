"""Newline-delimited data contracts and run configuration parsing.

Every file starts with the schema header line `#uqfd-v1` followed by one
JSON object per line. Floats are serialized via Python's shortest
round-trip repr, so write-then-read reproduces values bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

from .core import (
    EnsembleOutput,
    ModelOutput,
    Sample,
    Trajectory,
    UqfdError,
    validate_prob_vector,
)
from .records import ScoreRecord
from .sim import SimConfig
from .uq_traj import DEFAULT_EPS

HEADER = "#uqfd-v1"


class ParseError(UqfdError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


class SchemaViolationError(UqfdError):
    pass


def _write_lines(path, objects):
    path = Path(path)
    with path.open("w") as fh:
        fh.write(HEADER + "\n")
        for obj in objects:
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def _read_lines(path):
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("#"):
        if lines[0] != HEADER:
            raise SchemaViolationError(f"{path}: unsupported schema header {lines[0]!r}")
        start = 2
        lines = lines[1:]
    else:
        start = 1
    for offset, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            yield start + offset, json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, start + offset, f"invalid JSON: {exc}") from exc


def write_samples(path, samples) -> None:
    _write_lines(
        path,
        (
            {
                "id": s.id,
                "split": s.split,
                "history": s.history.tolist(),
                "gt_future": s.gt_future.points.tolist(),
                "gt_maneuver": s.gt_maneuver,
            }
            for s in samples
        ),
    )


def read_samples(path) -> list[Sample]:
    samples = []
    for line_no, obj in _read_lines(path):
        try:
            samples.append(
                Sample(
                    id=obj["id"],
                    history=obj["history"],
                    gt_future=Trajectory(obj["gt_future"]),
                    gt_maneuver=int(obj["gt_maneuver"]),
                    split=obj.get("split", "id"),
                )
            )
        except (KeyError, TypeError, ValueError, UqfdError) as exc:
            raise ParseError(path, line_no, f"bad sample record: {exc}") from exc
    return samples


def write_predictions(path, outputs) -> None:
    _write_lines(
        path,
        (
            {
                "sample_id": e.sample_id,
                "members": [
                    {
                        "mode_probs": m.mode_probs.p.tolist(),
                        "mode_trajectories": [t.points.tolist() for t in m.mode_trajectories],
                    }
                    for m in e.members
                ],
            }
            for e in outputs
        ),
    )


def read_predictions(path) -> list[EnsembleOutput]:
    outputs = []
    shape = None  # (K, Z, t_f) must agree across lines
    for line_no, obj in _read_lines(path):
        try:
            members = tuple(
                ModelOutput(
                    sample_id=obj["sample_id"],
                    mode_probs=validate_prob_vector(m["mode_probs"]),
                    mode_trajectories=tuple(Trajectory(t) for t in m["mode_trajectories"]),
                )
                for m in obj["members"]
            )
            ensemble = EnsembleOutput(sample_id=obj["sample_id"], members=members)
        except (KeyError, TypeError, ValueError, UqfdError) as exc:
            raise ParseError(path, line_no, f"bad prediction record: {exc}") from exc
        this_shape = (ensemble.k, ensemble.z, ensemble.members[0].horizon)
        if shape is None:
            shape = this_shape
        elif this_shape != shape:
            raise SchemaViolationError(
                f"{path}:{line_no}: (K, Z, t_f) {this_shape} differs from {shape}"
            )
        outputs.append(ensemble)
    return outputs


def write_scores(path, records) -> None:
    _write_lines(path, (r.as_dict() for r in records))


def read_scores(path) -> list[ScoreRecord]:
    records = []
    for line_no, obj in _read_lines(path):
        try:
            records.append(ScoreRecord.from_dict(obj))
        except (KeyError, TypeError) as exc:
            raise ParseError(path, line_no, f"bad score record: {exc}") from exc
    return records


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Simulator config plus pipeline-level knobs."""

    sim: SimConfig
    k: int = 5
    eps: float = DEFAULT_EPS


_SIM_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}


def _coerce(name: str, raw):
    if isinstance(raw, str):
        text = raw.strip()
        if text.lower() in ("true", "false"):
            return text.lower() == "true"
        if name == "speed_range":
            parts = [float(p) for p in text.replace("(", "").replace(")", "").split(",")]
            return tuple(parts)
        try:
            return int(text)
        except ValueError:
            return float(text)
    if name == "speed_range":
        return tuple(float(v) for v in raw)
    return raw


def load_run_config(path) -> RunConfig:
    """Read a run config from JSON or flat key=value text.

    The UQFD_SEED environment variable, when set, overrides the seed.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(path, line_no, f"expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            raw[key.strip()] = value
    sim_kwargs = {}
    k = 5
    eps = DEFAULT_EPS
    for key, value in raw.items():
        if key in _SIM_FIELDS:
            sim_kwargs[key] = _coerce(key, value)
        elif key == "k":
            k = int(_coerce(key, value))
        elif key == "eps":
            eps = float(_coerce(key, value))
        else:
            raise SchemaViolationError(f"{path}: unknown config key {key!r}")
    env_seed = os.environ.get("UQFD_SEED")
    if env_seed is not None:
        sim_kwargs["seed"] = int(env_seed)
    return RunConfig(sim=SimConfig(**sim_kwargs), k=k, eps=eps)
