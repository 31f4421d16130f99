"""Discrete view-adjustment environment.

State is a RobotPose on the scene grid; actions are signed rotations and
translations at one or more velocity levels; the transition rounds the
continuous translation target to the nearest grid cell; reward is
exp(-alpha * L2 distance) between the current and goal keypoint vectors.
Episodes end when the distance drops below the match threshold or after
max_steps actions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import world
from .world import RobotPose, Scene

ROTATE = "rotate"
TRANSLATE = "translate"

# Distance of any genuine non-tie translation target from a half-integer is
# > 0.017 for yaw grids dividing 360; anything closer is float error on an
# exact tie and must round half away from zero.
_TIE_EPS = 1e-9


@dataclass(frozen=True)
class ActionSpec:
    """One discrete command: rotate or translate, signed, with a level."""

    kind: str
    sign: int
    level: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (ROTATE, TRANSLATE):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")

    @property
    def label(self) -> str:
        return f"{self.kind}{'+' if self.sign > 0 else '-'}{self.level}"


@dataclass(frozen=True)
class EnvConfig:
    """Environment knobs; terminate_on_match=False turns the match region
    into plain reward (episodes end only at the step cap), which is how the
    trainer runs its rollouts so that parking on the goal stays optimal."""

    alpha: float = 2.5e-3
    match_epsilon_px: float = 40.0
    max_steps: int = 30
    memory_len: int = 0
    velocity_levels: int = 1
    start: str = "uniform"
    start_pose: RobotPose | None = None
    terminate_on_match: bool = True

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.match_epsilon_px <= 0:
            raise ValueError("alpha and match_epsilon_px must be positive")
        if self.max_steps < 1 or self.velocity_levels < 1 or self.memory_len < 0:
            raise ValueError("max_steps >= 1, velocity_levels >= 1, memory_len >= 0 required")
        if self.start not in ("uniform", "fixed"):
            raise ValueError(f"start must be 'uniform' or 'fixed', got {self.start!r}")
        if self.start == "fixed" and self.start_pose is None:
            raise ValueError("fixed start distribution needs start_pose")


def action_space(config: EnvConfig) -> list[ActionSpec]:
    """Canonical action ordering: rotate+, rotate-, translate+, translate-,
    repeated with ascending level. Stable across calls; defines the one-hot
    encoding used in observations and serialized policies."""
    actions = []
    for level in range(1, config.velocity_levels + 1):
        for kind, sign in ((ROTATE, 1), (ROTATE, -1), (TRANSLATE, 1), (TRANSLATE, -1)):
            actions.append(ActionSpec(kind, sign, level))
    return actions


def _round_half_away(t: float) -> int:
    """Round to nearest integer, halves away from zero.

    Ties are detected within _TIE_EPS so that float error in sin/cos of the
    grid yaw angles cannot flip an exact .5 case.
    """
    fl = math.floor(t)
    frac = t - fl
    if abs(frac - 0.5) <= _TIE_EPS:
        return fl + 1 if t > 0 else fl
    return fl + 1 if frac > 0.5 else fl


@lru_cache(maxsize=64)
def _heading(n_yaw: int, yaw_index: int) -> tuple[float, float]:
    theta = yaw_index * (2.0 * math.pi / n_yaw)
    return math.sin(theta), math.cos(theta)


def transition(pose: RobotPose, action: ActionSpec, scene: Scene) -> RobotPose:
    """Apply one action; pure and deterministic.

    Rotation shifts the yaw index modulo n_yaw. Translation moves the grid
    coordinate by delta = sign * level along the heading, rounds each axis
    to the nearest cell (half away from zero), and clamps to the grid.
    """
    world.validate_pose(scene, pose)
    if action.kind == ROTATE:
        return RobotPose(pose.ix, pose.iy, (pose.yaw_index + action.sign * action.level) % scene.n_yaw)
    s, c = _heading(scene.n_yaw, pose.yaw_index)
    delta = float(action.sign * action.level)
    nx = _round_half_away(pose.ix + delta * s)
    ny = _round_half_away(pose.iy + delta * c)
    nx = min(max(nx, 0), scene.grid_nx - 1)
    ny = min(max(ny, 0), scene.grid_ny - 1)
    return RobotPose(nx, ny, pose.yaw_index)


@lru_cache(maxsize=8)
def transition_table(scene: Scene, velocity_levels: int) -> np.ndarray:
    """next-state index for every (state index, action index) pair."""
    actions = action_space(EnvConfig(velocity_levels=velocity_levels))
    table = np.empty((scene.n_states, len(actions)), dtype=np.int64)
    for s in range(scene.n_states):
        pose = world.index_to_pose(scene, s)
        for a, act in enumerate(actions):
            table[s, a] = world.pose_to_index(scene, transition(pose, act, scene))
    table.setflags(write=False)
    return table


def reward(v: np.ndarray, v_goal: np.ndarray, alpha: float) -> float:
    """exp(-alpha * ||v - v_goal||_2) over the flattened keypoint vectors."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a = np.asarray(v, dtype=np.float64).ravel()
    b = np.asarray(v_goal, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"keypoint vectors differ in length: {a.shape} vs {b.shape}")
    return float(np.exp(-alpha * np.linalg.norm(a - b)))


@dataclass
class Observation:
    """Flattened keypoints plus one-hot encodings of recent actions.

    memory has shape (memory_len, n_actions), oldest row first, zero rows
    before the episode has produced that many actions.
    """

    keypoints: np.ndarray
    memory: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        if self.memory.size == 0:
            return self.keypoints.copy()
        return np.concatenate([self.keypoints, self.memory.ravel()])


@dataclass
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


@dataclass
class TraceRow:
    step: int
    ix: int
    iy: int
    yaw_index: int
    action: str
    reward: float
    distance_px: float
    done: bool


class PhotoEnv:
    """Episodic environment over one Scene and one goal template.

    Mutable episode state makes an instance single-threaded; independent
    instances may share the (immutable) Scene.
    """

    def __init__(self, scene: Scene, config: EnvConfig, seed: int | None = None):
        self.scene = scene
        self.config = config
        self.actions = action_space(config)
        self.rng = np.random.default_rng(seed)
        self._kp_table = world.keypoint_table(scene)
        self._trans = transition_table(scene, config.velocity_levels)
        self.template: np.ndarray | None = None
        self._dist: np.ndarray | None = None
        self._rew: np.ndarray | None = None
        self.pose: RobotPose | None = None
        self.steps = 0
        self.done = True
        self._memory: np.ndarray | None = None
        self.last_observation: Observation | None = None
        self.trace: list[TraceRow] = []

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def observation_dim(self) -> int:
        return self._kp_table.shape[1] + self.config.memory_len * self.n_actions

    def _state_index(self, pose: RobotPose) -> int:
        return world.pose_to_index(self.scene, pose)

    def _index_pose(self, idx: int) -> RobotPose:
        return world.index_to_pose(self.scene, idx)

    def distance_px(self, pose: RobotPose | None = None) -> float:
        if self._dist is None:
            raise RuntimeError("environment has no template; call reset() first")
        return float(self._dist[self._state_index(pose or self.pose)])

    def reward_at(self, pose: RobotPose) -> float:
        if self._rew is None:
            raise RuntimeError("environment has no template; call reset() first")
        return float(self._rew[self._state_index(pose)])

    def sample_start(self) -> RobotPose:
        if self.config.start == "fixed":
            return self.config.start_pose
        idx = int(self.rng.integers(self.scene.n_states))
        return self._index_pose(idx)

    def reset(self, template: np.ndarray | None = None, start: RobotPose | None = None) -> Observation:
        """Begin an episode: store the goal template, clear memory and trace.

        template may be omitted after the first reset to keep the current
        goal; start overrides the configured start distribution. An episode
        born inside the match region is done immediately (zero actions).
        """
        if template is not None:
            flat = np.asarray(template, dtype=np.float64).ravel()
            if flat.shape[0] != self._kp_table.shape[1]:
                raise ValueError(
                    f"template length {flat.shape[0]} != expected {self._kp_table.shape[1]}"
                )
            self.template = flat
            self._dist = np.linalg.norm(self._kp_table - flat, axis=1)
            self._rew = np.exp(-self.config.alpha * self._dist)
        if self.template is None:
            raise ValueError("first reset() needs a goal template")
        self.pose = start if start is not None else self.sample_start()
        world.validate_pose(self.scene, self.pose)
        self.steps = 0
        self.done = self.config.terminate_on_match and bool(
            self._dist[self._state_index(self.pose)] <= self.config.match_epsilon_px
        )
        self._memory = np.zeros((self.config.memory_len, self.n_actions), dtype=np.float64)
        self.trace = []
        obs = Observation(self._kp_table[self._state_index(self.pose)].copy(), self._memory.copy())
        self.last_observation = obs
        return obs

    def step(self, action: ActionSpec | int) -> StepResult:
        """Apply an action; reward and termination use the post-action state."""
        if self.done or self.pose is None:
            raise RuntimeError("step() called on a finished or unreset episode")
        if isinstance(action, (int, np.integer)):
            action_idx = int(action)
            action = self.actions[action_idx]
        else:
            action_idx = self.actions.index(action)
        next_idx = int(self._trans[self._state_index(self.pose), action_idx])
        self.pose = self._index_pose(next_idx)
        self.steps += 1
        dist = float(self._dist[next_idx])
        r = float(self._rew[next_idx])
        if self.config.memory_len > 0:
            self._memory = np.roll(self._memory, -1, axis=0)
            self._memory[-1] = 0.0
            self._memory[-1, action_idx] = 1.0
        matched = self.config.terminate_on_match and dist <= self.config.match_epsilon_px
        capped = self.steps >= self.config.max_steps
        self.done = matched or capped
        terminated_by = "match" if matched else ("step-cap" if capped else "none")
        obs = Observation(self._kp_table[next_idx].copy(), self._memory.copy())
        self.last_observation = obs
        self.trace.append(
            TraceRow(self.steps, self.pose.ix, self.pose.iy, self.pose.yaw_index, action.label, r, dist, self.done)
        )
        info = {"distance_px": dist, "pose": self.pose, "steps": self.steps, "terminated_by": terminated_by}
        return StepResult(obs, r, self.done, info)


TRACE_HEADER = ["step", "ix", "iy", "yaw_index", "action", "reward", "distance_px", "done"]


def write_trace_csv(rows: list[TraceRow], path) -> None:
    """Episode trace as CSV; float fields use repr so output is byte-stable."""
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(TRACE_HEADER)
        for r in rows:
            wr.writerow(
                [r.step, r.ix, r.iy, r.yaw_index, r.action, repr(float(r.reward)), repr(float(r.distance_px)), int(r.done)]
            )
