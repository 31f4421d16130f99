"""Person-tracking decision logic, driven by scripted detection streams.

Covers exactly the numeric behavior a live tracker needs: pick the most
similar detection above the drop threshold, refresh the reference when a
score clears the update threshold, command proportional velocities with an
operating-zone deadband and obstacle stop, and ramp all commands through
an acceleration-limited smoother. Both thresholds are inclusive (>=).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Detection:
    """Candidate person: bounding box in panorama pixels + similarity."""

    bbox: tuple[float, float, float, float]
    similarity: float

    def __post_init__(self) -> None:
        if self.bbox[2] <= 0 or self.bbox[3] <= 0:
            raise ValueError(f"bbox needs positive width/height, got {self.bbox}")
        if not (0.0 <= self.similarity <= 1.0):
            raise ValueError(f"similarity must lie in [0, 1], got {self.similarity}")


@dataclass(frozen=True)
class TrackerConfig:
    drop_threshold: float = 0.80
    update_threshold: float = 0.95
    operating_zone_m: float = 0.5
    obstacle_stop_m: float = 0.5
    v_max_mps: float = 0.15
    w_max_rps: float = 0.5
    linear_gain: float = 0.3
    angular_gain: float = 1.0
    a_max_mps2: float = 0.5
    dt_s: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 < self.drop_threshold <= self.update_threshold <= 1.0):
            raise ValueError("need 0 < drop_threshold <= update_threshold <= 1")
        for name in ("operating_zone_m", "obstacle_stop_m", "v_max_mps", "w_max_rps", "a_max_mps2", "dt_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TrackerState:
    mode: str = "waiting"  # tracking | waiting | stopped
    last_command: tuple[float, float] = (0.0, 0.0)
    reference_age: int = 0


@dataclass(frozen=True)
class SimFrame:
    """One scripted input frame standing in for panorama + depth sensing."""

    detections: tuple[Detection, ...] = ()
    target_distance_m: float | None = None
    target_bearing_rad: float | None = None
    obstacle_distance_m: float = math.inf


def select_target(detections, drop_threshold: float) -> Detection | None:
    """Most similar detection, accepted only at or above the drop threshold.

    Ties go to the earliest detection in the list; below-threshold frames
    yield no target rather than a badly ranked fallback.
    """
    best = None
    for det in detections:
        if best is None or det.similarity > best.similarity:
            best = det
    if best is not None and best.similarity >= drop_threshold:
        return best
    return None


def update_reference(state: TrackerState, selected: Detection, update_threshold: float) -> TrackerState:
    """Reference refresh: age resets only when the score clears the
    (inclusive) update threshold."""
    if selected.similarity >= update_threshold:
        return replace(state, reference_age=0)
    return replace(state, reference_age=state.reference_age + 1)


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def command(state: TrackerState, frame: SimFrame, config: TrackerConfig) -> tuple[float, float]:
    """Target (linear, angular) velocities before smoothing.

    No accepted target: full stop. Otherwise linear velocity is
    proportional to the distance beyond the operating zone, capped at
    v_max, zeroed inside the zone or when an obstacle is at or inside the
    stop distance (the angular command is unaffected by obstacles);
    angular velocity centers the target, capped at w_max.
    """
    selected = select_target(frame.detections, config.drop_threshold)
    if selected is None:
        return (0.0, 0.0)
    d = frame.target_distance_m
    if d is None or d <= config.operating_zone_m:
        linear = 0.0
    else:
        linear = _clamp(config.linear_gain * (d - config.operating_zone_m), 0.0, config.v_max_mps)
    if frame.obstacle_distance_m <= config.obstacle_stop_m:
        linear = 0.0
    bearing = frame.target_bearing_rad
    angular = 0.0 if bearing is None else _clamp(config.angular_gain * bearing, -config.w_max_rps, config.w_max_rps)
    return (linear, angular)


def smooth(
    prev: tuple[float, float], target: tuple[float, float], a_max: float, dt: float
) -> tuple[float, float]:
    """Move each component toward its target by at most a_max * dt."""
    if a_max <= 0 or dt <= 0:
        raise ValueError("a_max and dt must be positive")
    limit = a_max * dt
    return tuple(p + _clamp(t - p, -limit, limit) for p, t in zip(prev, target))


def run_script(frames, config: TrackerConfig) -> list[tuple[TrackerState, tuple[float, float]]]:
    """Fold the full per-frame pipeline over a scripted frame sequence.

    Per frame: select target -> update reference -> compute command ->
    smooth toward it. Returns (state, smoothed command) per frame; the
    state's mode is tracking / waiting (no target) / stopped (obstacle
    gate active).
    """
    state = TrackerState()
    out: list[tuple[TrackerState, tuple[float, float]]] = []
    for frame in frames:
        selected = select_target(frame.detections, config.drop_threshold)
        if selected is not None:
            state = update_reference(state, selected, config.update_threshold)
            mode = "stopped" if frame.obstacle_distance_m <= config.obstacle_stop_m else "tracking"
        else:
            state = replace(state, reference_age=state.reference_age + 1)
            mode = "waiting"
        target = command(state, frame, config)
        smoothed = smooth(state.last_command, target, config.a_max_mps2, config.dt_s)
        state = replace(state, mode=mode, last_command=smoothed)
        out.append((state, smoothed))
    return out


def load_scenario(path) -> list[SimFrame]:
    """Scenario CSV: one frame per line.

    Columns: similarities (semicolon-separated floats, may be empty),
    target_distance_m, target_bearing_rad, obstacle_distance_m. Empty
    distance/bearing mean unknown; empty obstacle means none in range.
    Bounding boxes are synthesized since only scores drive the logic.
    """
    frames = []
    with open(path, newline="") as fh:
        rdr = csv.reader(fh)
        rows = [r for r in rdr if r and not r[0].startswith("#")]
    if rows and rows[0][:1] == ["similarities"]:
        rows = rows[1:]
    for row in rows:
        if len(row) != 4:
            raise ValueError(f"scenario row needs 4 fields, got {row!r}")
        sims = [float(s) for s in row[0].split(";") if s.strip()]
        dets = tuple(Detection((10.0 * i, 0.0, 10.0, 20.0), s) for i, s in enumerate(sims))
        dist = float(row[1]) if row[1].strip() else None
        bearing = float(row[2]) if row[2].strip() else None
        obstacle = float(row[3]) if row[3].strip() else math.inf
        frames.append(SimFrame(dets, dist, bearing, obstacle))
    return frames


TRACE_HEADER = [
    "frame", "mode", "reference_age", "selected_similarity",
    "target_linear", "target_angular", "linear", "angular",
]


def write_trace_csv(frames, results, config: TrackerConfig, path) -> None:
    """Per-frame trace of a run_script execution."""
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(TRACE_HEADER)
        for i, (frame, (state, smoothed)) in enumerate(zip(frames, results)):
            selected = select_target(frame.detections, config.drop_threshold)
            target = command(state, frame, config)
            wr.writerow(
                [
                    i, state.mode, state.reference_age,
                    repr(selected.similarity) if selected else "",
                    repr(float(target[0])), repr(float(target[1])),
                    repr(float(smoothed[0])), repr(float(smoothed[1])),
                ]
            )
