"""Synthetic scene: viewpoint grid, stick-figure person, keypoint projection.

Replaces camera hardware and a pose-detection network with analytic
geometry: a parametric 14-joint person is projected through a pinhole
camera placed at discrete grid poses, yielding the keypoint vectors that
drive rewards, templates, and observations everywhere else.

Grid coordinates: cell (ix, iy) sits at world (ix * spacing, iy * spacing)
with grid x along world +x and grid y along world +z; yaw angle
yaw_index * (2 pi / n_yaw), clockwise from above (see panorama module for
the full convention block).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .panorama import EquirectImage, PerspectiveCamera, ray_to_equirect

KEYPOINT_NAMES = (
    "head",
    "neck",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
    "l_hip",
    "r_hip",
    "l_knee",
    "r_knee",
    "l_ankle",
    "r_ankle",
)
NUM_KEYPOINTS = len(KEYPOINT_NAMES)

SKELETON_EDGES = (
    ("head", "neck"),
    ("neck", "l_shoulder"),
    ("neck", "r_shoulder"),
    ("l_shoulder", "l_elbow"),
    ("l_elbow", "l_wrist"),
    ("r_shoulder", "r_elbow"),
    ("r_elbow", "r_wrist"),
    ("neck", "l_hip"),
    ("neck", "r_hip"),
    ("l_hip", "l_knee"),
    ("l_knee", "l_ankle"),
    ("r_hip", "r_knee"),
    ("r_knee", "r_ankle"),
)

# Segment proportions as fractions of body height. Leg fractions sum to the
# hip height so a neutral pose puts the ankles exactly on the ground.
_NECK_Y = 0.85
_SHOULDER_DROP = 0.03
_SHOULDER_HALF = 0.11
_UPPER_ARM = 0.15
_FOREARM = 0.15
_HIP_Y = 0.52
_HIP_HALF = 0.09
_UPPER_LEG = 0.26
_LOWER_LEG = 0.26

PERSON_COLOR = (255, 220, 60)
STRIPE_COLOR = (200, 60, 40)


class DegenerateGeometryError(ValueError):
    """Person and camera are too close for a meaningful projection."""


@dataclass(frozen=True)
class PersonModel:
    """Stick-figure person: ground-plane root, facing angle, joint angles.

    pose_params holds 8 angles in radians:
    (l_shoulder, l_elbow, r_shoulder, r_elbow, l_hip, l_knee, r_hip, r_knee).
    Zero everywhere is an upright T-pose. Shoulder/elbow angles rotate the
    arms in the coronal plane (0 = straight out, +pi/2 = hanging down);
    hip/knee angles rotate the legs in the sagittal plane (0 = straight
    down, positive kicks forward).
    """

    root_x_m: float = 0.4
    root_z_m: float = 2.0
    facing_rad: float = math.pi
    height_m: float = 1.7
    pose_params: tuple[float, ...] = (0.0,) * 8

    def __post_init__(self) -> None:
        if self.height_m <= 0:
            raise ValueError("person height must be positive")
        if len(self.pose_params) != 8:
            raise ValueError(f"pose_params needs 8 angles, got {len(self.pose_params)}")


@dataclass(frozen=True)
class Scene:
    """Immutable world description; every observation derives from it."""

    grid_nx: int = 5
    grid_ny: int = 5
    spacing_m: float = 0.2
    n_yaw: int = 24
    person: PersonModel = field(default_factory=PersonModel)
    camera: PerspectiveCamera = field(
        default_factory=lambda: PerspectiveCamera(hfov_rad=math.radians(78.0), width_px=640, height_px=480)
    )
    camera_height_m: float = 0.6
    pano_width_px: int = 1440

    def __post_init__(self) -> None:
        if self.grid_nx < 1 or self.grid_ny < 1:
            raise ValueError("grid must have at least one cell per axis")
        if self.spacing_m <= 0:
            raise ValueError("grid spacing must be positive")
        if self.n_yaw < 1 or 360 % self.n_yaw != 0:
            raise ValueError(f"n_yaw must divide 360 evenly, got {self.n_yaw}")
        if self.pano_width_px < 8 or self.pano_width_px % 2 != 0:
            raise ValueError("pano_width_px must be an even integer >= 8")

    @property
    def n_states(self) -> int:
        return self.grid_nx * self.grid_ny * self.n_yaw

    @property
    def yaw_step_rad(self) -> float:
        return 2.0 * math.pi / self.n_yaw


@dataclass(frozen=True)
class RobotPose:
    """Discrete robot configuration: grid cell plus yaw index."""

    ix: int
    iy: int
    yaw_index: int


def validate_pose(scene: Scene, pose: RobotPose) -> None:
    if not (0 <= pose.ix < scene.grid_nx and 0 <= pose.iy < scene.grid_ny):
        raise ValueError(f"grid cell ({pose.ix}, {pose.iy}) outside {scene.grid_nx}x{scene.grid_ny} grid")
    if not (0 <= pose.yaw_index < scene.n_yaw):
        raise ValueError(f"yaw_index {pose.yaw_index} outside [0, {scene.n_yaw})")


def robot_world_pose(scene: Scene, pose: RobotPose) -> tuple[tuple[float, float], float]:
    """World position (x, z) in meters and yaw angle in radians."""
    validate_pose(scene, pose)
    pos = (pose.ix * scene.spacing_m, pose.iy * scene.spacing_m)
    return pos, pose.yaw_index * scene.yaw_step_rad


def pose_to_index(scene: Scene, pose: RobotPose) -> int:
    """Flat state index: (ix * grid_ny + iy) * n_yaw + yaw_index."""
    validate_pose(scene, pose)
    return (pose.ix * scene.grid_ny + pose.iy) * scene.n_yaw + pose.yaw_index


def index_to_pose(scene: Scene, index: int) -> RobotPose:
    """Inverse of pose_to_index; round-trips exactly."""
    if not (0 <= index < scene.n_states):
        raise ValueError(f"state index {index} outside [0, {scene.n_states})")
    yaw = index % scene.n_yaw
    rest = index // scene.n_yaw
    return RobotPose(rest // scene.grid_ny, rest % scene.grid_ny, yaw)


def skeleton_keypoints_3d(person: PersonModel) -> np.ndarray:
    """World-space joint positions, shape (14, 3) as (x, y-up, z).

    Deterministic forward kinematics from the root and pose_params; joints
    follow KEYPOINT_NAMES order.
    """
    h = person.height_m
    ls, le, rs, re, lh, lk, rh, rk = person.pose_params

    # Local frame: lateral = person's right, forward = facing direction.
    joints_local: dict[str, tuple[float, float, float]] = {}

    def put(name: str, lateral: float, up: float, forward: float) -> None:
        joints_local[name] = (lateral, up, forward)

    put("head", 0.0, h, 0.0)
    put("neck", 0.0, _NECK_Y * h, 0.0)

    for side, sign, a_s, a_e in (("l", -1.0, ls, le), ("r", +1.0, rs, re)):
        sh_lat = sign * _SHOULDER_HALF * h
        sh_up = (_NECK_Y - _SHOULDER_DROP) * h
        put(f"{side}_shoulder", sh_lat, sh_up, 0.0)
        el_lat = sh_lat + sign * _UPPER_ARM * h * math.cos(a_s)
        el_up = sh_up - _UPPER_ARM * h * math.sin(a_s)
        put(f"{side}_elbow", el_lat, el_up, 0.0)
        wr_lat = el_lat + sign * _FOREARM * h * math.cos(a_s + a_e)
        wr_up = el_up - _FOREARM * h * math.sin(a_s + a_e)
        put(f"{side}_wrist", wr_lat, wr_up, 0.0)

    for side, sign, a_h, a_k in (("l", -1.0, lh, lk), ("r", +1.0, rh, rk)):
        hip_lat = sign * _HIP_HALF * h
        put(f"{side}_hip", hip_lat, _HIP_Y * h, 0.0)
        kn_up = _HIP_Y * h - _UPPER_LEG * h * math.cos(a_h)
        kn_fwd = _UPPER_LEG * h * math.sin(a_h)
        put(f"{side}_knee", hip_lat, kn_up, kn_fwd)
        an_up = kn_up - _LOWER_LEG * h * math.cos(a_h + a_k)
        an_fwd = kn_fwd + _LOWER_LEG * h * math.sin(a_h + a_k)
        put(f"{side}_ankle", hip_lat, an_up, an_fwd)

    psi = person.facing_rad
    fwd = (math.sin(psi), math.cos(psi))  # (x, z)
    right = (math.cos(psi), -math.sin(psi))
    out = np.empty((NUM_KEYPOINTS, 3), dtype=np.float64)
    for i, name in enumerate(KEYPOINT_NAMES):
        lat, up, f = joints_local[name]
        out[i, 0] = person.root_x_m + lat * right[0] + f * fwd[0]
        out[i, 1] = up
        out[i, 2] = person.root_z_m + lat * right[1] + f * fwd[1]
    return out


def _frame_boundary_point(dx: float, dy: float, width: float, height: float) -> tuple[float, float]:
    """Boundary point hit by a ray from the frame center along (dx, dy).

    (dx, dy) is in camera-plane coordinates (x right, y up); the exact
    backward direction (0, 0) maps to the left edge midpoint.
    """
    if dx == 0.0 and dy == 0.0:
        return 0.0, height / 2.0
    tx = (width / 2.0) / abs(dx) if dx != 0.0 else math.inf
    ty = (height / 2.0) / abs(dy) if dy != 0.0 else math.inf
    t = min(tx, ty)
    u = width / 2.0 + t * dx
    v = height / 2.0 - t * dy
    return min(max(u, 0.0), width), min(max(v, 0.0), height)


def project_points(
    scene: Scene,
    position_m: tuple[float, float],
    yaw_rad: float,
    points_3d: np.ndarray,
    hfov_rad: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Project world points through the scene camera at an arbitrary pose.

    Returns (pixels, depths): pixels is (N, 2) clipped to the frame, with
    behind-camera points (depth <= 0) placed on the frame boundary in the
    direction of their camera-plane offset; depths is the signed forward
    distance, usable to reject out-of-view points.
    """
    cam = scene.camera
    w, hgt = float(cam.width_px), float(cam.height_px)
    f = (
        cam.focal_px
        if hfov_rad is None
        else (cam.width_px / 2.0) / math.tan(hfov_rad / 2.0)
    )
    cx, cz = position_m
    cam_pos = np.array([cx, scene.camera_height_m, cz])
    rel = np.asarray(points_3d, dtype=np.float64) - cam_pos
    c, s = math.cos(yaw_rad), math.sin(yaw_rad)
    xc = rel[:, 0] * c - rel[:, 2] * s
    yc = rel[:, 1]
    zc = rel[:, 0] * s + rel[:, 2] * c
    pixels = np.empty((rel.shape[0], 2), dtype=np.float64)
    for i in range(rel.shape[0]):
        if zc[i] > 1e-9:
            u = w / 2.0 + f * xc[i] / zc[i]
            v = hgt / 2.0 - f * yc[i] / zc[i]
            pixels[i] = (min(max(u, 0.0), w), min(max(v, 0.0), hgt))
        else:
            pixels[i] = _frame_boundary_point(xc[i], yc[i], w, hgt)
    return pixels, zc


def project_keypoints(scene: Scene, pose: RobotPose) -> np.ndarray:
    """Person keypoints in the camera frame at a robot pose, shape (14, 2).

    Pure function of (scene, pose); coordinates are clipped to
    [0, width] x [0, height] so the observation length never varies.
    """
    (px, pz), yaw = robot_world_pose(scene, pose)
    person = scene.person
    if math.hypot(person.root_x_m - px, person.root_z_m - pz) < 0.01:
        raise DegenerateGeometryError(
            f"person at ({person.root_x_m}, {person.root_z_m}) coincides with camera cell ({pose.ix}, {pose.iy})"
        )
    pts = skeleton_keypoints_3d(person)
    pixels, _ = project_points(scene, (px, pz), yaw, pts)
    return pixels


@lru_cache(maxsize=8)
def keypoint_table(scene: Scene) -> np.ndarray:
    """Flattened keypoints for every state, shape (n_states, 28).

    Row order follows the state index bijection
    (ix * grid_ny + iy) * n_yaw + yaw_index.
    """
    rows = []
    for ix in range(scene.grid_nx):
        for iy in range(scene.grid_ny):
            for k in range(scene.n_yaw):
                rows.append(project_keypoints(scene, RobotPose(ix, iy, k)).ravel())
    table = np.array(rows, dtype=np.float64)
    table.setflags(write=False)
    return table


def render_synthetic_equirect(scene: Scene, ix: int, iy: int) -> EquirectImage:
    """Deterministic panorama seen from a grid cell.

    Background is a vertical brightness gradient with marker stripes every
    30 degrees of longitude; the person is drawn as limb line segments.
    Used by the composer pipeline tests rather than any learning path.
    """
    if not (0 <= ix < scene.grid_nx and 0 <= iy < scene.grid_ny):
        raise ValueError(f"grid cell ({ix}, {iy}) outside grid")
    w = scene.pano_width_px
    h = w // 2
    rows = np.linspace(40.0, 215.0, h)
    pixels = np.empty((h, w, 3), dtype=np.uint8)
    pixels[:] = np.rint(rows)[:, None, None].astype(np.uint8)
    for k in range(12):
        x0 = int(round(k * w / 12.0))
        pixels[:, x0 % w] = STRIPE_COLOR
        pixels[:, (x0 + 1) % w] = STRIPE_COLOR

    cam_pos = np.array([ix * scene.spacing_m, scene.camera_height_m, iy * scene.spacing_m])
    pts = skeleton_keypoints_3d(scene.person)
    index = {name: i for i, name in enumerate(KEYPOINT_NAMES)}
    for a, b in SKELETON_EDGES:
        pa, pb = pts[index[a]], pts[index[b]]
        for t in np.linspace(0.0, 1.0, 64):
            p = pa + t * (pb - pa)
            d = p - cam_pos
            n = np.linalg.norm(d)
            if n < 1e-9:
                continue
            x_px, y_px = ray_to_equirect(d / n, w, h)
            xi = int(x_px) % w
            yi = min(int(y_px), h - 1)
            pixels[yi, xi] = PERSON_COLOR
            pixels[yi, (xi + 1) % w] = PERSON_COLOR
    return EquirectImage(pixels)
