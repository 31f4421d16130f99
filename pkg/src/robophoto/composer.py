"""Template selection and the end-to-end capture pipeline.

Candidates are person views at several headings and zoom levels, filtered
so every keypoint sits strictly inside the frame, scored by a pluggable
evaluator (a composition heuristic by default), and the winner becomes the
goal template for the view-adjustment episode. Also provides the
pose-triggered shutter test used for pre-defined pose templates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import a2c, world
from .env import EnvConfig, PhotoEnv, TraceRow
from .world import KEYPOINT_NAMES, RobotPose, Scene

DEFAULT_HFOV_LEVELS_RAD = tuple(math.radians(d) for d in (78.0, 60.0, 45.0))

_NECK = KEYPOINT_NAMES.index("neck")


class NoCandidatesError(ValueError):
    """Candidate list is empty; nothing to select."""


@dataclass
class CandidateTemplate:
    keypoints: np.ndarray  # (K, 2) pixel coordinates, all strictly in frame
    yaw_rad: float
    distance_level: int
    image: np.ndarray | None = None
    score: float | None = None


@dataclass(frozen=True)
class ScorerSpec:
    """Named scorer with its parameters; higher scores are better."""

    name: str = "heuristic"
    w_thirds: float = 0.4
    w_size: float = 0.4
    w_headroom: float = 0.2
    target_height_ratio: float = 0.6
    target_headroom_frac: float = 0.08


def generate_candidates(
    scene: Scene,
    cell: tuple[int, int],
    yaws_rad: list[float] | None = None,
    hfov_levels_rad: tuple[float, ...] = DEFAULT_HFOV_LEVELS_RAD,
    with_images: bool = False,
) -> list[CandidateTemplate]:
    """Candidate templates from one grid cell.

    One candidate per (yaw, zoom level); distance levels are realized as
    narrower crop FOVs of the same viewpoint. Candidates whose person
    keypoints are not all strictly inside the frame are discarded, so every
    returned template is guaranteed to contain the whole person.
    """
    ix, iy = cell
    if not (0 <= ix < scene.grid_nx and 0 <= iy < scene.grid_ny):
        raise ValueError(f"cell {cell} outside grid")
    if yaws_rad is None:
        yaws_rad = [k * scene.yaw_step_rad for k in range(scene.n_yaw)]
    if len(yaws_rad) == 0:
        raise ValueError("need at least one yaw")
    position = (ix * scene.spacing_m, iy * scene.spacing_m)
    pts3d = world.skeleton_keypoints_3d(scene.person)
    cam = scene.camera
    pano = world.render_synthetic_equirect(scene, ix, iy) if with_images else None
    out: list[CandidateTemplate] = []
    for yaw in yaws_rad:
        for level, hfov in enumerate(hfov_levels_rad):
            pixels, depth = world.project_points(scene, position, yaw, pts3d, hfov_rad=hfov)
            inside = (
                np.all(depth > 0.0)
                and np.all((pixels[:, 0] > 0.0) & (pixels[:, 0] < cam.width_px))
                and np.all((pixels[:, 1] > 0.0) & (pixels[:, 1] < cam.height_px))
            )
            if not inside:
                continue
            image = None
            if pano is not None:
                from dataclasses import replace

                from .panorama import dewarp_crop

                image = dewarp_crop(pano, replace(cam, hfov_rad=hfov, yaw_rad=yaw))
            out.append(CandidateTemplate(pixels, yaw, level, image))
    return out


def heuristic_score(
    candidate: CandidateTemplate,
    width_px: int,
    height_px: int,
    spec: ScorerSpec = ScorerSpec(),
) -> float:
    """Composition score in [0, 1] for an in-frame candidate.

    Three weighted terms: the neck near a vertical third-line (distance
    normalized by the half gap between the lines), person pixel height near
    the target ratio (triangular kernel), and head-to-top margin near the
    target fraction (triangular kernel).
    """
    kp = np.asarray(candidate.keypoints, dtype=np.float64)
    neck_x = kp[_NECK, 0]
    d_third = min(abs(neck_x - width_px / 3.0), abs(neck_x - 2.0 * width_px / 3.0))
    thirds = max(0.0, 1.0 - d_third / (width_px / 6.0))

    ys = kp[:, 1]
    ratio = (ys.max() - ys.min()) / height_px
    size = max(0.0, 1.0 - abs(ratio - spec.target_height_ratio) / spec.target_height_ratio)

    margin = ys.min() / height_px
    headroom = max(0.0, 1.0 - abs(margin - spec.target_headroom_frac) / spec.target_headroom_frac)

    return spec.w_thirds * thirds + spec.w_size * size + spec.w_headroom * headroom


def get_scorer(spec: ScorerSpec, width_px: int, height_px: int):
    """Resolve a ScorerSpec into a callable(candidate) -> float."""
    if spec.name == "heuristic":
        return lambda cand: heuristic_score(cand, width_px, height_px, spec)
    raise ValueError(f"unknown scorer {spec.name!r}")


def select_template(candidates: list[CandidateTemplate], scorer) -> CandidateTemplate:
    """Score every candidate and return the argmax (ties: lowest index)."""
    if not candidates:
        raise NoCandidatesError("no candidate templates to choose from")
    best = None
    best_score = -math.inf
    for cand in candidates:
        cand.score = float(scorer(cand))
        if cand.score > best_score:
            best = cand
            best_score = cand.score
    return best


def pose_trigger(current: np.ndarray, trigger: np.ndarray, threshold: float = 0.9) -> bool:
    """Shutter condition: normalized pose similarity at or above threshold.

    Both keypoint sets are translated to zero centroid and scaled to unit
    RMS radius, making the test invariant to uniform scaling and
    translation; similarity is exp(-L2 distance) of the normalized vectors.
    """
    a = np.asarray(current, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(trigger, dtype=np.float64).reshape(-1, 2)
    if a.shape != b.shape:
        raise ValueError(f"keypoint sets differ in shape: {a.shape} vs {b.shape}")

    def norm(kp: np.ndarray) -> np.ndarray:
        c = kp.mean(axis=0)
        centered = kp - c
        r = math.sqrt(float(np.mean(np.sum(centered**2, axis=1))))
        if r < 1e-12:
            raise ValueError("degenerate keypoint set: zero RMS radius")
        return centered / r

    similarity = math.exp(-float(np.linalg.norm(norm(a).ravel() - norm(b).ravel())))
    return similarity >= threshold


@dataclass
class MatchResult:
    final_keypoints: np.ndarray
    trace: list[TraceRow]
    success: bool
    action_count: int
    terminated_by: str
    start: RobotPose | None = None
    final_pose: RobotPose | None = None


def match_and_capture(
    controller,
    scene: Scene,
    template: np.ndarray,
    env_config: EnvConfig,
    seed: int | None = None,
    start: RobotPose | None = None,
) -> MatchResult:
    """Run one full view-adjustment episode driven by a controller.

    controller is PolicyParams or a callable(env) -> action index; template
    may come from generate_candidates or any pre-defined keypoint vector of
    the right length — the source is irrelevant downstream.
    """
    if isinstance(controller, a2c.PolicyParams):
        from .control import policy_controller

        controller = policy_controller(controller)
    env = PhotoEnv(scene, env_config, seed=seed)
    env.reset(template, start=start)
    start_pose = env.pose
    terminated_by = "match" if env.done else "none"
    while not env.done:
        res = env.step(controller(env))
        terminated_by = res.info["terminated_by"]
    final_kp = env.last_observation.keypoints.reshape(-1, 2)
    return MatchResult(
        final_kp, env.trace, terminated_by == "match", env.steps, terminated_by, start_pose, env.pose
    )


def save_template(path, keypoints: np.ndarray, width_px: int, height_px: int) -> None:
    """Text template: header "K width height", then K lines of "name x y"."""
    kp = np.asarray(keypoints, dtype=np.float64).reshape(-1, 2)
    if kp.shape[0] != len(KEYPOINT_NAMES):
        raise ValueError(f"expected {len(KEYPOINT_NAMES)} keypoints, got {kp.shape[0]}")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{kp.shape[0]} {width_px} {height_px}\n")
        for name, (x, y) in zip(KEYPOINT_NAMES, kp):
            fh.write(f"{name} {x!r} {y!r}\n")


def load_template(path) -> tuple[np.ndarray, int, int]:
    """Inverse of save_template; returns (keypoints (K, 2), width, height)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty template file {path}")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"malformed template header {lines[0]!r}")
    k, w, h = (int(v) for v in head)
    if len(lines) != k + 1:
        raise ValueError(f"template header promises {k} keypoints, file has {len(lines) - 1}")
    kp = np.empty((k, 2), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"malformed keypoint line {line!r}")
        kp[i] = (float(parts[1]), float(parts[2]))
    return kp, w, h


CANDIDATES_HEADER = ["index", "yaw_rad", "distance_level", "score", "selected"]


def write_candidates_csv(candidates: list[CandidateTemplate], selected: CandidateTemplate, path) -> None:
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(CANDIDATES_HEADER)
        for i, cand in enumerate(candidates):
            wr.writerow(
                [i, repr(float(cand.yaw_rad)), cand.distance_level,
                 repr(float(cand.score)) if cand.score is not None else "",
                 int(cand is selected)]
            )
