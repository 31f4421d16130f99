"""Brute-force ground truth over the discrete state space.

600 states is small enough to answer every question exhaustively: the best
achievable view for a template, shortest action paths between states
(breadth-first search over the deterministic transition graph), and a
one-step-greedy baseline for comparison against learned policies.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import env as env_mod
from . import world
from .env import ActionSpec, EnvConfig, action_space, transition_table
from .world import RobotPose, Scene, index_to_pose, pose_to_index

__all__ = [
    "OracleResult",
    "best_state",
    "pose_to_index",
    "index_to_pose",
    "match_region_goal",
    "best_state_goal",
    "shortest_path",
    "path_lengths_to_goal",
    "greedy_baseline",
    "write_reward_table_csv",
    "NoPathError",
]


class NoPathError(RuntimeError):
    """No action sequence reaches any goal state."""


@dataclass
class OracleResult:
    best_pose: RobotPose
    best_reward: float
    table: np.ndarray  # reward per state, ordered by state index


def reward_table(scene: Scene, template: np.ndarray, alpha: float) -> np.ndarray:
    flat = np.asarray(template, dtype=np.float64).ravel()
    kp = world.keypoint_table(scene)
    if flat.shape[0] != kp.shape[1]:
        raise ValueError(f"template length {flat.shape[0]} != expected {kp.shape[1]}")
    return np.exp(-alpha * np.linalg.norm(kp - flat, axis=1))


def best_state(scene: Scene, template: np.ndarray, alpha: float) -> OracleResult:
    """Exhaustive argmax of the reward over all states; ties break toward
    the lowest state index."""
    table = reward_table(scene, template, alpha)
    idx = int(np.argmax(table))
    return OracleResult(index_to_pose(scene, idx), float(table[idx]), table)


def match_region_goal(scene: Scene, template: np.ndarray, epsilon_px: float) -> Callable[[RobotPose], bool]:
    """Goal predicate: keypoint distance within the match threshold."""
    flat = np.asarray(template, dtype=np.float64).ravel()
    kp = world.keypoint_table(scene)
    dist = np.linalg.norm(kp - flat, axis=1)
    return lambda pose: bool(dist[pose_to_index(scene, pose)] <= epsilon_px)


def best_state_goal(
    scene: Scene, template: np.ndarray, alpha: float, tol: float = 1e-9
) -> Callable[[RobotPose], bool]:
    """Goal predicate: reward within tol of the exhaustive best."""
    table = reward_table(scene, template, alpha)
    cutoff = float(table.max()) - tol
    return lambda pose: bool(table[pose_to_index(scene, pose)] >= cutoff)


def shortest_path(
    scene: Scene,
    start: RobotPose,
    goal: Callable[[RobotPose], bool],
    velocity_levels: int = 1,
) -> list[ActionSpec]:
    """Minimum-length action sequence from start to any goal state.

    Breadth-first search expanding actions in canonical order, so equal-
    length paths resolve deterministically. Raises NoPathError if the goal
    predicate matches no reachable state.
    """
    actions = action_space(EnvConfig(velocity_levels=velocity_levels))
    trans = transition_table(scene, velocity_levels)
    s0 = pose_to_index(scene, start)
    if goal(start):
        return []
    parent: dict[int, tuple[int, int]] = {s0: (-1, -1)}
    queue = deque([s0])
    while queue:
        s = queue.popleft()
        for a in range(len(actions)):
            nxt = int(trans[s, a])
            if nxt in parent:
                continue
            parent[nxt] = (s, a)
            if goal(index_to_pose(scene, nxt)):
                path = []
                cur = nxt
                while cur != s0:
                    prev, act = parent[cur]
                    path.append(actions[act])
                    cur = prev
                path.reverse()
                return path
            queue.append(nxt)
    raise NoPathError("goal predicate matches no state reachable from the start")


def path_lengths_to_goal(
    scene: Scene, goal: Callable[[RobotPose], bool], velocity_levels: int = 1
) -> np.ndarray:
    """BFS distance (action count) from every state to the goal region.

    Runs one backward breadth-first sweep over the reversed transition
    graph; unreachable states get -1.
    """
    trans = transition_table(scene, velocity_levels)
    n = scene.n_states
    preds: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        for nxt in trans[s]:
            preds[int(nxt)].append(s)
    dist = np.full(n, -1, dtype=np.int64)
    queue = deque()
    for s in range(n):
        if goal(index_to_pose(scene, s)):
            dist[s] = 0
            queue.append(s)
    while queue:
        s = queue.popleft()
        for p in preds[s]:
            if dist[p] < 0:
                dist[p] = dist[s] + 1
                queue.append(p)
    return dist


@dataclass
class GreedyResult:
    rows: list[env_mod.TraceRow]
    outcome: str  # match | step-cap | cycle
    final_pose: RobotPose


def greedy_baseline(
    scene: Scene, template: np.ndarray, start: RobotPose, config: EnvConfig
) -> GreedyResult:
    """One-step lookahead: always take the action with the best next-state
    reward (ties in canonical order). Stops on match, the step cap, or when
    the chosen move revisits a state (greedy oscillation)."""
    actions = action_space(config)
    trans = transition_table(scene, config.velocity_levels)
    flat = np.asarray(template, dtype=np.float64).ravel()
    kp = world.keypoint_table(scene)
    dist = np.linalg.norm(kp - flat, axis=1)
    rew = np.exp(-config.alpha * dist)

    s = pose_to_index(scene, start)
    rows: list[env_mod.TraceRow] = []
    if dist[s] <= config.match_epsilon_px:
        return GreedyResult(rows, "match", start)
    visited = {s}
    outcome = "step-cap"
    for step in range(1, config.max_steps + 1):
        candidates = trans[s]
        a = int(np.argmax(rew[candidates]))
        nxt = int(candidates[a])
        if nxt in visited:
            outcome = "cycle"
            break
        s = nxt
        visited.add(s)
        pose = index_to_pose(scene, s)
        matched = bool(dist[s] <= config.match_epsilon_px)
        done = matched or step >= config.max_steps
        rows.append(
            env_mod.TraceRow(
                step, pose.ix, pose.iy, pose.yaw_index, actions[a].label,
                float(rew[s]), float(dist[s]), done,
            )
        )
        if matched:
            outcome = "match"
            break
    return GreedyResult(rows, outcome, index_to_pose(scene, s))


REWARD_TABLE_HEADER = ["ix", "iy", "yaw_index", "reward"]


def write_reward_table_csv(scene: Scene, table: np.ndarray, path) -> None:
    """Per-state rewards, ordered by state index, for heatmap plotting."""
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(REWARD_TABLE_HEADER)
        for idx in range(scene.n_states):
            pose = index_to_pose(scene, idx)
            wr.writerow([pose.ix, pose.iy, pose.yaw_index, repr(float(table[idx]))])
