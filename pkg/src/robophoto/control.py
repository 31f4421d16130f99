"""Episode controllers: learned policy, BFS planner, greedy, random.

A controller is a callable taking the environment and returning an action
index; the learned policy reads the observation while the planner and
greedy baselines read the privileged pose, which is exactly what makes
them useful as ground truth.
"""

from __future__ import annotations

import numpy as np

from . import a2c, oracle, world
from .env import EnvConfig, PhotoEnv, action_space
from .world import Scene


def policy_controller(params: a2c.PolicyParams, mode: str = "greedy", rng: np.random.Generator | None = None):
    """Act from the live observation with a trained policy."""
    if mode not in ("greedy", "sampled"):
        raise ValueError(f"mode must be 'greedy' or 'sampled', got {mode!r}")

    def controller(env: PhotoEnv) -> int:
        logits, _ = a2c.forward(params, env.last_observation.vector)
        if mode == "greedy":
            return a2c.greedy_action(logits)
        return a2c.sample_action(logits, rng if rng is not None else env.rng)

    return controller


def random_controller(rng: np.random.Generator | None = None):
    """Uniform-random action choice; the comparison floor."""

    def controller(env: PhotoEnv) -> int:
        g = rng if rng is not None else env.rng
        return int(g.integers(env.n_actions))

    return controller


def oracle_controller(scene: Scene, template: np.ndarray, config: EnvConfig):
    """Replay a BFS shortest path to the template's match region.

    Plans once per episode from the current pose; if no state matches the
    template within the threshold, falls back to the best reachable state,
    so the controller always has a target even for unreachable templates.
    """
    match_goal = oracle.match_region_goal(scene, template, config.match_epsilon_px)
    best_goal = oracle.best_state_goal(scene, template, config.alpha)
    if any(match_goal(world.index_to_pose(scene, s)) for s in range(scene.n_states)):
        goal = match_goal
    else:
        goal = best_goal
    index_of = {a: i for i, a in enumerate(action_space(config))}
    plan: list[int] = []
    last_steps = -1

    def controller(env: PhotoEnv) -> int:
        nonlocal plan, last_steps
        if env.steps == 0 or env.steps <= last_steps or not plan:
            path = oracle.shortest_path(scene, env.pose, goal, config.velocity_levels)
            plan = [index_of[a] for a in path]
        last_steps = env.steps
        if not plan:
            return 0  # already at the goal; any action, episode bookkeeping ends it
        return plan.pop(0)

    return controller


def greedy_controller(scene: Scene, template: np.ndarray, config: EnvConfig):
    """One-step lookahead on the true reward table (no cycle stopping; the
    step cap ends oscillating episodes)."""
    from .env import transition_table

    flat = np.asarray(template, dtype=np.float64).ravel()
    kp = world.keypoint_table(scene)
    rew = np.exp(-config.alpha * np.linalg.norm(kp - flat, axis=1))
    trans = transition_table(scene, config.velocity_levels)

    def controller(env: PhotoEnv) -> int:
        s = world.pose_to_index(scene, env.pose)
        return int(np.argmax(rew[trans[s]]))

    return controller
