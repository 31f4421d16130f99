"""Command-line entry point: train | eval | match | oracle | track | compose | grad-check.

Every command resolves one RunConfig (defaults, then --config file, then
--seed override), writes the resolved config next to its outputs, and is
byte-reproducible from (config, seed). Exit codes: 0 success, 1 runtime
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import a2c, composer, control, oracle, tracker, world
from .config import RunConfig, load_config, save_config
from .env import PhotoEnv, write_trace_csv
from .world import RobotPose

EVAL_HEADER = ["controller", "mode", "episodes", "success_rate", "mean_actions", "sd_actions", "mean_return"]


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.train = replace(cfg.train, seed=args.seed)
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _template_vector(args, cfg) -> np.ndarray:
    """Goal template: a file if given, else the configured template pose."""
    if getattr(args, "template", None):
        kp, w, h = composer.load_template(args.template)
        cam = cfg.scene.camera
        if (w, h) != (cam.width_px, cam.height_px):
            raise ValueError(
                f"template frame {w}x{h} does not match scene camera {cam.width_px}x{cam.height_px}"
            )
        return kp.ravel()
    return world.project_keypoints(cfg.scene, cfg.template_pose).ravel()


def _controller(name: str, cfg, template: np.ndarray, params_path: str | None):
    if name == "policy":
        if not params_path:
            raise ValueError("--params is required for the policy controller")
        params, doc = a2c.load_params(params_path)
        saved = doc.get("env_config", {})
        envc = replace(
            cfg.env,
            alpha=saved.get("alpha", cfg.env.alpha),
            match_epsilon_px=saved.get("match_epsilon_px", cfg.env.match_epsilon_px),
            max_steps=saved.get("max_steps", cfg.env.max_steps),
            memory_len=saved.get("memory_len", cfg.env.memory_len),
            velocity_levels=saved.get("velocity_levels", cfg.env.velocity_levels),
        )
        return control.policy_controller(params), envc
    if name == "oracle":
        return control.oracle_controller(cfg.scene, template, cfg.env), cfg.env
    if name == "greedy":
        return control.greedy_controller(cfg.scene, template, cfg.env), cfg.env
    if name == "random":
        return control.random_controller(), cfg.env
    raise ValueError(f"unknown controller {name!r}")


def _write_eval_csv(path, row: dict, controller: str, mode: str) -> None:
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(EVAL_HEADER)
        wr.writerow(
            [controller, mode, row["episodes"], repr(row["success_rate"]),
             repr(row["mean_actions"]), repr(row["sd_actions"]), repr(row["mean_return"])]
        )


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    template = _template_vector(args, cfg)
    if args.ablation:
        report = a2c.run_ablation(args.ablation, cfg.scene, template, cfg.env, cfg.train, n_seeds=args.seeds)
        for arm, runs in report["runs"].items():
            for result in runs:
                name = f"curve_{args.ablation}_{arm}_seed{result.train_config.seed}.csv"
                a2c.write_curve_csv(result.curve, out / name)
        slim = {k: v for k, v in report.items() if k != "runs"}
        with open(out / "ablation_report.json", "w", newline="\n") as fh:
            json.dump(slim, fh, indent=1)
            fh.write("\n")
        base, var = report["arms"]
        print(f"ablation {args.ablation}: baseline {base['mean_final_return']:.4f} "
              f"vs variant {var['mean_final_return']:.4f}")
        if not report["direction_holds"]:
            print("WARNING: expected direction did NOT hold for this ablation")
        return 0
    result = a2c.train(cfg.scene, template, cfg.env, cfg.train)
    a2c.write_curve_csv(result.curve, out / "curve.csv")
    a2c.save_params(out / "params.json", result.params, cfg.env, cfg.train)
    print(f"trained {cfg.train.total_updates} updates, {result.episodes_completed} episodes, "
          f"final mean return {result.final_mean_return:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    if args.episodes < 1:
        raise ValueError(f"need at least one evaluation episode, got {args.episodes}")
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    template = _template_vector(args, cfg)
    controller, envc = _controller(args.controller, cfg, template, args.params)
    if args.controller == "policy" and args.mode == "sampled":
        params, _ = a2c.load_params(args.params)
        controller = control.policy_controller(params, mode="sampled")
    env = PhotoEnv(cfg.scene, envc, seed=cfg.train.seed)
    env.reset(template)
    stats = a2c.evaluate(controller, env, args.episodes, mode=args.mode)
    _write_eval_csv(out / "eval_stats.csv", stats, args.controller, args.mode)
    print(f"controller={args.controller} episodes={args.episodes} "
          f"success_rate={stats['success_rate']:.3f} "
          f"mean_actions={stats['mean_actions']:.2f} sd_actions={stats['sd_actions']:.2f} "
          f"mean_return={stats['mean_return']:.3f}")
    return 0


def cmd_match(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    template = _template_vector(args, cfg)
    controller, envc = _controller(args.controller, cfg, template, args.params)
    result = composer.match_and_capture(controller, cfg.scene, template, envc, seed=cfg.train.seed)
    write_trace_csv(result.trace, out / "trace.csv")
    composer.save_template(out / "final_keypoints.txt", result.final_keypoints,
                           cfg.scene.camera.width_px, cfg.scene.camera.height_px)
    print(f"match: success={result.success} actions={result.action_count} "
          f"terminated_by={result.terminated_by}")
    return 0


def cmd_oracle(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    template = _template_vector(args, cfg)
    result = oracle.best_state(cfg.scene, template, cfg.env.alpha)
    oracle.write_reward_table_csv(cfg.scene, result.table, out / "reward_table.csv")
    goal = oracle.match_region_goal(cfg.scene, template, cfg.env.match_epsilon_px)
    if not any(goal(world.index_to_pose(cfg.scene, s)) for s in range(cfg.scene.n_states)):
        goal = oracle.best_state_goal(cfg.scene, template, cfg.env.alpha)
    lengths = oracle.path_lengths_to_goal(cfg.scene, goal, cfg.env.velocity_levels)
    with open(out / "path_hist.csv", "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(["length", "count"])
        values, counts = np.unique(lengths, return_counts=True)
        for v, c in zip(values, counts):
            wr.writerow([int(v), int(c)])
    bp = result.best_pose
    print(f"best pose: ix={bp.ix} iy={bp.iy} yaw_index={bp.yaw_index} reward={result.best_reward!r}")
    print(f"reward table: {cfg.scene.n_states} states -> {out / 'reward_table.csv'}")
    return 0


def cmd_track(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    frames = tracker.load_scenario(args.scenario)
    results = tracker.run_script(frames, cfg.tracker)
    tracker.write_trace_csv(frames, results, cfg.tracker, out / "trace.csv")
    modes = [state.mode for state, _ in results]
    print(f"tracked {len(frames)} frames: "
          f"{modes.count('tracking')} tracking / {modes.count('waiting')} waiting / "
          f"{modes.count('stopped')} stopped")
    return 0


def _render_ascii(cfg, result: composer.MatchResult) -> str:
    visited = {(row.ix, row.iy) for row in result.trace}
    start = (result.start.ix, result.start.iy)
    final = (result.final_pose.ix, result.final_pose.iy)
    lines = []
    for iy in range(cfg.scene.grid_ny - 1, -1, -1):
        cells = []
        for ix in range(cfg.scene.grid_nx):
            cell = (ix, iy)
            if cell == start:
                cells.append("S")
            elif cell == final:
                cells.append("G")
            elif cell in visited:
                cells.append("*")
            else:
                cells.append(".")
        lines.append(" ".join(cells))
    lines.append("S=start G=final *=visited (north up)")
    return "\n".join(lines)


def cmd_compose(args) -> int:
    cfg = _resolve_config(args)
    out = _outdir(args)
    save_config(out / "resolved_config.ini", cfg)
    cam = cfg.scene.camera
    candidates = composer.generate_candidates(
        cfg.scene, cfg.compose_cell, hfov_levels_rad=cfg.compose_hfov_levels_rad
    )
    scorer = composer.get_scorer(cfg.scorer, cam.width_px, cam.height_px)
    selected = composer.select_template(candidates, scorer)
    composer.write_candidates_csv(candidates, selected, out / "candidates.csv")
    composer.save_template(out / "template.txt", selected.keypoints, cam.width_px, cam.height_px)
    template = selected.keypoints.ravel()
    controller, envc = _controller(args.controller, cfg, template, args.params)
    result = composer.match_and_capture(controller, cfg.scene, template, envc, seed=cfg.train.seed)
    write_trace_csv(result.trace, out / "trace.csv")
    composer.save_template(out / "final_keypoints.txt", result.final_keypoints, cam.width_px, cam.height_px)
    print(f"candidates: {len(candidates)} scored, selected yaw={selected.yaw_rad:.3f} "
          f"level={selected.distance_level} score={selected.score:.4f}")
    print(f"episode: success={result.success} actions={result.action_count} "
          f"terminated_by={result.terminated_by}")
    if args.ascii:
        print(_render_ascii(cfg, result))
    return 0


def cmd_grad_check(args) -> int:
    cfg = _resolve_config(args)
    rng = np.random.default_rng(cfg.train.seed)
    params = a2c.init_params(rng, obs_dim=10, n_actions=4, hidden_sizes=(8, 8))
    obs = rng.normal(size=(6, 10))
    err = a2c.grad_check(params, obs, loss=args.loss)
    print(f"grad check ({args.loss}): max relative error {err:.3e}")
    return 0 if err <= 1e-4 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robophoto", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file (key = value with [section] headers)")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("train", help="train a policy; optionally run an ablation pair")
    common(p)
    p.add_argument("--ablation", choices=sorted(a2c.ABLATIONS), help="run both arms of an ablation")
    p.add_argument("--seeds", type=int, default=5, help="seeds per ablation arm (default 5)")
    p.add_argument("--template", help="template file (default: configured template pose)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="episode statistics for a controller")
    common(p)
    p.add_argument("--params", help="trained policy file (policy controller)")
    p.add_argument("--controller", default="policy", choices=["policy", "oracle", "greedy", "random"])
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--mode", default="greedy", choices=["greedy", "sampled"])
    p.add_argument("--template", help="template file (default: configured template pose)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("match", help="run one template-matching episode")
    common(p)
    p.add_argument("--params", help="trained policy file (policy controller)")
    p.add_argument("--controller", default="oracle", choices=["policy", "oracle", "greedy", "random"])
    p.add_argument("--template", help="template file (default: configured template pose)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("oracle", help="exhaustive reward table, best pose, path histogram")
    common(p)
    p.add_argument("--template", help="template file (default: configured template pose)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("track", help="replay a scripted tracker scenario")
    common(p)
    p.add_argument("--scenario", required=True, help="scenario CSV file")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("compose", help="full pipeline: candidates, selection, episode")
    common(p)
    p.add_argument("--params", help="trained policy file (policy controller)")
    p.add_argument("--controller", default="oracle", choices=["policy", "oracle", "greedy", "random"])
    p.add_argument("--ascii", action="store_true", help="print an ASCII grid of the episode path")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("grad-check", help="verify analytic gradients against finite differences")
    common(p)
    p.add_argument("--loss", default="total", choices=["total", "policy", "value", "entropy"])
    p.set_defaults(func=cmd_grad_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
