"""Plain-text run configuration: key = value under section headers.

One RunConfig bundles every module's settings with defaults; loading
overlays a file onto the defaults, and every command writes back the exact
resolved configuration it ran with, so any run can be replayed from its
output directory alone.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .composer import DEFAULT_HFOV_LEVELS_RAD, ScorerSpec
from .env import EnvConfig
from .a2c import TrainConfig
from .panorama import PerspectiveCamera
from .tracker import TrackerConfig
from .world import PersonModel, RobotPose, Scene


@dataclass
class RunConfig:
    scene: Scene = field(default_factory=Scene)
    env: EnvConfig = field(default_factory=EnvConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    scorer: ScorerSpec = field(default_factory=ScorerSpec)
    template_pose: RobotPose = field(default_factory=lambda: RobotPose(2, 0, 0))
    compose_cell: tuple[int, int] = (2, 2)
    compose_hfov_levels_rad: tuple[float, ...] = DEFAULT_HFOV_LEVELS_RAD


def _bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "on", "1"):
        return True
    if text.lower() in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def load_config(path) -> RunConfig:
    """Overlay a config file onto the defaults; unknown keys are an error."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    base = RunConfig()

    def section(name: str) -> dict[str, str]:
        return dict(cp[name]) if cp.has_section(name) else {}

    known = {"scene", "env", "train", "tracker", "scorer", "template", "compose"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")

    s = section("scene")
    scene = Scene(
        grid_nx=int(s.pop("grid_nx", base.scene.grid_nx)),
        grid_ny=int(s.pop("grid_ny", base.scene.grid_ny)),
        spacing_m=float(s.pop("spacing_m", base.scene.spacing_m)),
        n_yaw=int(s.pop("n_yaw", base.scene.n_yaw)),
        person=PersonModel(
            root_x_m=float(s.pop("person_x_m", base.scene.person.root_x_m)),
            root_z_m=float(s.pop("person_z_m", base.scene.person.root_z_m)),
            facing_rad=math.radians(float(s.pop("person_facing_deg", math.degrees(base.scene.person.facing_rad)))),
            height_m=float(s.pop("person_height_m", base.scene.person.height_m)),
            pose_params=_floats(s.pop("person_pose_params", "")) or base.scene.person.pose_params,
        ),
        camera=PerspectiveCamera(
            hfov_rad=math.radians(float(s.pop("camera_hfov_deg", math.degrees(base.scene.camera.hfov_rad)))),
            width_px=int(s.pop("camera_width_px", base.scene.camera.width_px)),
            height_px=int(s.pop("camera_height_px", base.scene.camera.height_px)),
        ),
        camera_height_m=float(s.pop("camera_height_m", base.scene.camera_height_m)),
        pano_width_px=int(s.pop("pano_width_px", base.scene.pano_width_px)),
    )
    if s:
        raise ValueError(f"unknown [scene] keys: {sorted(s)}")

    e = section("env")
    start = e.pop("start", base.env.start)
    start_pose = None
    if "start_ix" in e or start == "fixed":
        start_pose = RobotPose(int(e.pop("start_ix", 0)), int(e.pop("start_iy", 0)), int(e.pop("start_yaw_index", 0)))
    envc = EnvConfig(
        alpha=float(e.pop("alpha", base.env.alpha)),
        match_epsilon_px=float(e.pop("match_epsilon_px", base.env.match_epsilon_px)),
        max_steps=int(e.pop("max_steps", base.env.max_steps)),
        memory_len=int(e.pop("memory_len", base.env.memory_len)),
        velocity_levels=int(e.pop("velocity_levels", base.env.velocity_levels)),
        start=start,
        start_pose=start_pose,
        terminate_on_match=_bool(e.pop("terminate_on_match", str(base.env.terminate_on_match))),
    )
    if e:
        raise ValueError(f"unknown [env] keys: {sorted(e)}")

    t = section("train")
    train = TrainConfig(
        gamma=float(t.pop("gamma", base.train.gamma)),
        learning_rate=float(t.pop("learning_rate", base.train.learning_rate)),
        n_steps=int(t.pop("n_steps", base.train.n_steps)),
        n_envs=int(t.pop("n_envs", base.train.n_envs)),
        entropy_coef=float(t.pop("entropy_coef", base.train.entropy_coef)),
        value_coef=float(t.pop("value_coef", base.train.value_coef)),
        grad_clip_norm=float(t.pop("grad_clip_norm", base.train.grad_clip_norm)),
        total_updates=int(t.pop("total_updates", base.train.total_updates)),
        seed=int(t.pop("seed", base.train.seed)),
        optimizer=t.pop("optimizer", base.train.optimizer),
        hidden_sizes=_ints(t.pop("hidden_sizes", "")) or base.train.hidden_sizes,
        curve_window=int(t.pop("curve_window", base.train.curve_window)),
        terminal_match=_bool(t.pop("terminal_match", str(base.train.terminal_match))),
    )
    if t:
        raise ValueError(f"unknown [train] keys: {sorted(t)}")

    k = section("tracker")
    tracker = TrackerConfig(
        drop_threshold=float(k.pop("drop_threshold", base.tracker.drop_threshold)),
        update_threshold=float(k.pop("update_threshold", base.tracker.update_threshold)),
        operating_zone_m=float(k.pop("operating_zone_m", base.tracker.operating_zone_m)),
        obstacle_stop_m=float(k.pop("obstacle_stop_m", base.tracker.obstacle_stop_m)),
        v_max_mps=float(k.pop("v_max_mps", base.tracker.v_max_mps)),
        w_max_rps=float(k.pop("w_max_rps", base.tracker.w_max_rps)),
        linear_gain=float(k.pop("linear_gain", base.tracker.linear_gain)),
        angular_gain=float(k.pop("angular_gain", base.tracker.angular_gain)),
        a_max_mps2=float(k.pop("a_max_mps2", base.tracker.a_max_mps2)),
        dt_s=float(k.pop("dt_s", base.tracker.dt_s)),
    )
    if k:
        raise ValueError(f"unknown [tracker] keys: {sorted(k)}")

    sc = section("scorer")
    scorer = ScorerSpec(
        name=sc.pop("name", base.scorer.name),
        w_thirds=float(sc.pop("w_thirds", base.scorer.w_thirds)),
        w_size=float(sc.pop("w_size", base.scorer.w_size)),
        w_headroom=float(sc.pop("w_headroom", base.scorer.w_headroom)),
        target_height_ratio=float(sc.pop("target_height_ratio", base.scorer.target_height_ratio)),
        target_headroom_frac=float(sc.pop("target_headroom_frac", base.scorer.target_headroom_frac)),
    )
    if sc:
        raise ValueError(f"unknown [scorer] keys: {sorted(sc)}")

    tp = section("template")
    template_pose = RobotPose(
        int(tp.pop("pose_ix", base.template_pose.ix)),
        int(tp.pop("pose_iy", base.template_pose.iy)),
        int(tp.pop("pose_yaw_index", base.template_pose.yaw_index)),
    )
    if tp:
        raise ValueError(f"unknown [template] keys: {sorted(tp)}")

    co = section("compose")
    cell_txt = co.pop("cell", "")
    compose_cell = tuple(_ints(cell_txt)) if cell_txt else base.compose_cell
    levels_txt = co.pop("hfov_levels_deg", "")
    levels = tuple(math.radians(v) for v in _floats(levels_txt)) if levels_txt else base.compose_hfov_levels_rad
    if co:
        raise ValueError(f"unknown [compose] keys: {sorted(co)}")

    return RunConfig(scene, envc, train, tracker, scorer, template_pose, compose_cell, levels)


def save_config(path, cfg: RunConfig) -> None:
    """Write the fully resolved configuration; key order is fixed."""
    cp = configparser.ConfigParser()
    cp["scene"] = {
        "grid_nx": str(cfg.scene.grid_nx),
        "grid_ny": str(cfg.scene.grid_ny),
        "spacing_m": repr(cfg.scene.spacing_m),
        "n_yaw": str(cfg.scene.n_yaw),
        "person_x_m": repr(cfg.scene.person.root_x_m),
        "person_z_m": repr(cfg.scene.person.root_z_m),
        "person_facing_deg": repr(math.degrees(cfg.scene.person.facing_rad)),
        "person_height_m": repr(cfg.scene.person.height_m),
        "person_pose_params": ",".join(repr(v) for v in cfg.scene.person.pose_params),
        "camera_hfov_deg": repr(math.degrees(cfg.scene.camera.hfov_rad)),
        "camera_width_px": str(cfg.scene.camera.width_px),
        "camera_height_px": str(cfg.scene.camera.height_px),
        "camera_height_m": repr(cfg.scene.camera_height_m),
        "pano_width_px": str(cfg.scene.pano_width_px),
    }
    env_sec = {
        "alpha": repr(cfg.env.alpha),
        "match_epsilon_px": repr(cfg.env.match_epsilon_px),
        "max_steps": str(cfg.env.max_steps),
        "memory_len": str(cfg.env.memory_len),
        "velocity_levels": str(cfg.env.velocity_levels),
        "start": cfg.env.start,
        "terminate_on_match": str(cfg.env.terminate_on_match),
    }
    if cfg.env.start_pose is not None:
        env_sec["start_ix"] = str(cfg.env.start_pose.ix)
        env_sec["start_iy"] = str(cfg.env.start_pose.iy)
        env_sec["start_yaw_index"] = str(cfg.env.start_pose.yaw_index)
    cp["env"] = env_sec
    cp["train"] = {
        "gamma": repr(cfg.train.gamma),
        "learning_rate": repr(cfg.train.learning_rate),
        "n_steps": str(cfg.train.n_steps),
        "n_envs": str(cfg.train.n_envs),
        "entropy_coef": repr(cfg.train.entropy_coef),
        "value_coef": repr(cfg.train.value_coef),
        "grad_clip_norm": repr(cfg.train.grad_clip_norm),
        "total_updates": str(cfg.train.total_updates),
        "seed": str(cfg.train.seed),
        "optimizer": cfg.train.optimizer,
        "hidden_sizes": ",".join(str(v) for v in cfg.train.hidden_sizes),
        "curve_window": str(cfg.train.curve_window),
        "terminal_match": str(cfg.train.terminal_match),
    }
    cp["tracker"] = {
        "drop_threshold": repr(cfg.tracker.drop_threshold),
        "update_threshold": repr(cfg.tracker.update_threshold),
        "operating_zone_m": repr(cfg.tracker.operating_zone_m),
        "obstacle_stop_m": repr(cfg.tracker.obstacle_stop_m),
        "v_max_mps": repr(cfg.tracker.v_max_mps),
        "w_max_rps": repr(cfg.tracker.w_max_rps),
        "linear_gain": repr(cfg.tracker.linear_gain),
        "angular_gain": repr(cfg.tracker.angular_gain),
        "a_max_mps2": repr(cfg.tracker.a_max_mps2),
        "dt_s": repr(cfg.tracker.dt_s),
    }
    cp["scorer"] = {
        "name": cfg.scorer.name,
        "w_thirds": repr(cfg.scorer.w_thirds),
        "w_size": repr(cfg.scorer.w_size),
        "w_headroom": repr(cfg.scorer.w_headroom),
        "target_height_ratio": repr(cfg.scorer.target_height_ratio),
        "target_headroom_frac": repr(cfg.scorer.target_headroom_frac),
    }
    cp["template"] = {
        "pose_ix": str(cfg.template_pose.ix),
        "pose_iy": str(cfg.template_pose.iy),
        "pose_yaw_index": str(cfg.template_pose.yaw_index),
    }
    cp["compose"] = {
        "cell": ",".join(str(v) for v in cfg.compose_cell),
        "hfov_levels_deg": ",".join(repr(math.degrees(v)) for v in cfg.compose_hfov_levels_rad),
    }
    with open(path, "w", newline="\n") as fh:
        cp.write(fh)
