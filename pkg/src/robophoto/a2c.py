"""Synchronous advantage actor-critic with hand-written backpropagation.

A small tanh MLP maps observations to action logits and a state value; the
update combines the advantage-weighted policy gradient, value regression,
and an entropy bonus. Rollouts come from n_envs environments stepped in
lockstep; everything is seeded, so runs are bit-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .env import EnvConfig, PhotoEnv
from .world import Scene

PARAMS_FORMAT = "robophoto-policy"
PARAMS_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Loss went non-finite; carries the offending report for diagnosis."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class ParamsFormatError(ValueError):
    """Serialized policy file is malformed or from an unknown version."""


@dataclass
class PolicyParams:
    """Weights of the shared-trunk policy/value network.

    weights[i] has shape (out, in); the trunk applies tanh(x @ W.T + b) per
    layer. obs_shift / obs_scale are fixed (non-trainable) input
    normalization constants stored with the weights.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    w_policy: np.ndarray
    b_policy: np.ndarray
    w_value: np.ndarray
    b_value: float
    obs_shift: np.ndarray
    obs_scale: np.ndarray

    @property
    def obs_dim(self) -> int:
        return self.obs_shift.shape[0]

    @property
    def n_actions(self) -> int:
        return self.b_policy.shape[0]

    def param_items(self) -> list[tuple[str, np.ndarray]]:
        items = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            items.append((f"W{i}", w))
            items.append((f"b{i}", b))
        items.append(("Wp", self.w_policy))
        items.append(("bp", self.b_policy))
        items.append(("Wv", self.w_value))
        return items

    def n_params(self) -> int:
        return sum(a.size for _, a in self.param_items()) + 1  # +1 for b_value

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.w_policy.copy(),
            self.b_policy.copy(),
            self.w_value.copy(),
            float(self.b_value),
            self.obs_shift.copy(),
            self.obs_scale.copy(),
        )


def obs_normalizer(env: PhotoEnv) -> tuple[np.ndarray, np.ndarray]:
    """Shift/scale mapping raw observations roughly into [-1, 1].

    Keypoint entries are centered and scaled by the half frame size; action
    memory entries pass through unchanged.
    """
    cam = env.scene.camera
    kp_dim = env._kp_table.shape[1]
    shift = np.zeros(env.observation_dim)
    scale = np.ones(env.observation_dim)
    half = np.tile([cam.width_px / 2.0, cam.height_px / 2.0], kp_dim // 2)
    shift[:kp_dim] = half
    scale[:kp_dim] = half
    return shift, scale


def init_params(
    rng: np.random.Generator,
    obs_dim: int,
    n_actions: int,
    hidden_sizes: Sequence[int] = (64, 64),
    obs_shift: np.ndarray | None = None,
    obs_scale: np.ndarray | None = None,
) -> PolicyParams:
    """Scaled-normal initialization; the policy head starts near-uniform."""
    weights, biases = [], []
    fan_in = obs_dim
    for h in hidden_sizes:
        weights.append(rng.normal(0.0, 1.0 / math.sqrt(fan_in), size=(h, fan_in)))
        biases.append(np.zeros(h))
        fan_in = h
    w_policy = rng.normal(0.0, 0.01 / math.sqrt(fan_in), size=(n_actions, fan_in))
    w_value = rng.normal(0.0, 1.0 / math.sqrt(fan_in), size=fan_in)
    return PolicyParams(
        weights,
        biases,
        w_policy,
        np.zeros(n_actions),
        w_value,
        0.0,
        obs_shift if obs_shift is not None else np.zeros(obs_dim),
        obs_scale if obs_scale is not None else np.ones(obs_dim),
    )


def _forward_batch(params: PolicyParams, obs: np.ndarray):
    """Returns (logits, values, activations); activations[0] is the
    normalized input, then one entry per hidden layer."""
    if obs.ndim != 2 or obs.shape[1] != params.obs_dim:
        raise ValueError(f"observation batch shape {obs.shape} != (*, {params.obs_dim})")
    x = (obs - params.obs_shift) / params.obs_scale
    acts = [x]
    for w, b in zip(params.weights, params.biases):
        x = np.tanh(x @ w.T + b)
        acts.append(x)
    logits = x @ params.w_policy.T + params.b_policy
    values = x @ params.w_value + params.b_value
    return logits, values, acts


def forward(params: PolicyParams, obs: np.ndarray) -> tuple[np.ndarray, float]:
    """Logits and value for one observation vector."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 1:
        raise ValueError("forward() expects a single flat observation")
    logits, values, _ = _forward_batch(params, obs[None, :])
    return logits[0], float(values[0])


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def sample_action(logits: np.ndarray, rng: np.random.Generator) -> int:
    """Draw from softmax(logits) using the caller's generator."""
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    probs = softmax(np.asarray(logits, dtype=np.float64))
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, probs.shape[0] - 1)


def greedy_action(logits: np.ndarray) -> int:
    """Argmax with ties resolved toward the lowest index."""
    return int(np.argmax(logits))


@dataclass
class RolloutBuffer:
    """Fixed-shape record of n_envs x n_steps synchronous transitions."""

    obs: np.ndarray  # (n_envs, n_steps, obs_dim)
    actions: np.ndarray  # (n_envs, n_steps) int
    rewards: np.ndarray  # (n_envs, n_steps)
    values: np.ndarray  # (n_envs, n_steps)
    dones: np.ndarray  # (n_envs, n_steps) bool
    bootstrap: np.ndarray  # (n_envs,) value of the state after the last step


def compute_returns(buffer: RolloutBuffer, gamma: float) -> np.ndarray:
    """n-step returns R_t = r_t + gamma * R_{t+1}, seeded with the bootstrap
    value and reset across episode boundaries."""
    n_envs, n_steps = buffer.rewards.shape
    returns = np.zeros((n_envs, n_steps))
    running = buffer.bootstrap.astype(np.float64).copy()
    for t in range(n_steps - 1, -1, -1):
        running = np.where(buffer.dones[:, t], 0.0, running)
        running = buffer.rewards[:, t] + gamma * running
        returns[:, t] = running
    return returns


@dataclass(frozen=True)
class TrainConfig:
    """Trainer hyperparameters.

    terminal_match controls whether rollout episodes end inside the match
    region. Off by default: with termination on, ending an episode forfeits
    all future reward, so a return-maximizing policy learns to loiter next
    to the goal instead of entering it. With termination off, episodes run
    to the step cap and the best behavior is to reach the goal view and
    park on it, which is exactly what the deployment-time threshold then
    rewards. Evaluation always uses real match termination.
    """

    gamma: float = 0.99
    learning_rate: float = 7e-4
    n_steps: int = 5
    n_envs: int = 8
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    grad_clip_norm: float = 0.5
    total_updates: int = 1500
    seed: int = 0
    optimizer: str = "rmsprop"
    rms_decay: float = 0.99
    rms_eps: float = 1e-5
    hidden_sizes: tuple[int, ...] = (64, 64)
    curve_window: int = 100
    terminal_match: bool = False
    lr_anneal: bool = False
    entropy_final: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")
        if self.learning_rate <= 0 or self.grad_clip_norm <= 0:
            raise ValueError("learning_rate and grad_clip_norm must be positive")
        if self.n_steps < 1 or self.n_envs < 1 or self.total_updates < 0:
            raise ValueError("n_steps >= 1, n_envs >= 1, total_updates >= 0 required")
        if self.entropy_coef < 0 or self.value_coef < 0:
            raise ValueError("entropy_coef and value_coef must be >= 0")
        if self.optimizer not in ("rmsprop", "sgd"):
            raise ValueError(f"optimizer must be 'rmsprop' or 'sgd', got {self.optimizer!r}")


def _loss_and_grads(
    params: PolicyParams,
    obs: np.ndarray,
    actions: np.ndarray,
    returns: np.ndarray,
    value_coef: float,
    entropy_coef: float,
    policy_coef: float = 1.0,
):
    """Total loss and analytic gradients on a flat batch.

    loss = policy_coef * (-mean(A * log pi(a)))
         + value_coef * mean((R - V)^2)
         - entropy_coef * mean(H(pi))
    with A = R - V treated as a constant in the policy term.
    """
    B = obs.shape[0]
    logits, values, acts = _forward_batch(params, obs)
    probs = softmax(logits)
    logp = log_softmax(logits)
    idx = np.arange(B)
    adv = returns - values
    ent_per = -np.sum(probs * logp, axis=1)
    policy_loss = -float(np.mean(adv * logp[idx, actions]))
    value_loss = float(np.mean(adv**2))
    entropy = float(np.mean(ent_per))
    loss = policy_coef * policy_loss + value_coef * value_loss - entropy_coef * entropy

    onehot = np.zeros_like(probs)
    onehot[idx, actions] = 1.0
    dlogits = policy_coef * (probs - onehot) * adv[:, None] / B
    dlogits += entropy_coef * probs * (logp + ent_per[:, None]) / B
    dvalues = 2.0 * value_coef * (values - returns) / B

    h_last = acts[-1]
    grads: dict[str, np.ndarray] = {
        "Wp": dlogits.T @ h_last,
        "bp": dlogits.sum(axis=0),
        "Wv": h_last.T @ dvalues,
        "bv": np.array(dvalues.sum()),
    }
    dh = dlogits @ params.w_policy + dvalues[:, None] * params.w_value[None, :]
    for i in range(len(params.weights) - 1, -1, -1):
        da = dh * (1.0 - acts[i + 1] ** 2)
        grads[f"W{i}"] = da.T @ acts[i]
        grads[f"b{i}"] = da.sum(axis=0)
        dh = da @ params.weights[i]

    report = {"policy_loss": policy_loss, "value_loss": value_loss, "entropy": entropy, "loss": loss}
    return loss, grads, report


def _global_norm(grads: dict[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))


def _apply_step(params: PolicyParams, grads: dict[str, np.ndarray], config: TrainConfig, opt_state: dict) -> None:
    for name, arr in params.param_items() + [("bv", None)]:
        g = grads[name]
        if config.optimizer == "rmsprop":
            ms = opt_state.setdefault(name, np.zeros_like(g))
            ms *= config.rms_decay
            ms += (1.0 - config.rms_decay) * g**2
            step = config.learning_rate * g / (np.sqrt(ms) + config.rms_eps)
        else:
            step = config.learning_rate * g
        if name == "bv":
            params.b_value = float(params.b_value - step)
        else:
            arr -= step


def a2c_update(
    params: PolicyParams,
    buffer: RolloutBuffer,
    config: TrainConfig,
    opt_state: dict | None = None,
) -> dict:
    """One synchronous update on a filled rollout buffer (in place).

    Returns {policy_loss, value_loss, entropy, grad_norm}; raises
    TrainingDivergedError if any loss term goes non-finite.
    """
    returns = compute_returns(buffer, config.gamma)
    n_envs, n_steps = buffer.rewards.shape
    flat_obs = buffer.obs.reshape(n_envs * n_steps, -1)
    flat_actions = buffer.actions.reshape(-1)
    flat_returns = returns.reshape(-1)
    loss, grads, report = _loss_and_grads(
        params, flat_obs, flat_actions, flat_returns, config.value_coef, config.entropy_coef
    )
    if not math.isfinite(loss):
        raise TrainingDivergedError(f"non-finite loss {loss}", report)
    norm = _global_norm(grads)
    report["grad_norm"] = norm
    if norm > config.grad_clip_norm:
        scale = config.grad_clip_norm / (norm + 1e-12)
        for g in grads.values():
            g *= scale
    _apply_step(params, grads, config, opt_state if opt_state is not None else {})
    return report


@dataclass
class CurvePoint:
    update: int
    mean_return: float
    mean_len: float
    success_rate: float


@dataclass
class TrainResult:
    params: PolicyParams
    curve: list[CurvePoint]
    final_mean_return: float
    episodes_completed: int
    env_config: EnvConfig
    train_config: TrainConfig


def train(
    scene: Scene,
    template: np.ndarray,
    env_config: EnvConfig,
    train_config: TrainConfig,
) -> TrainResult:
    """Full A2C run; bit-reproducible from train_config.seed."""
    ss = np.random.SeedSequence(train_config.seed)
    children = ss.spawn(train_config.n_envs + 1)
    init_rng = np.random.default_rng(children[-1])
    rollout_config = replace(env_config, terminate_on_match=train_config.terminal_match)
    envs = [
        PhotoEnv(scene, rollout_config, seed=np.random.default_rng(children[i]))
        for i in range(train_config.n_envs)
    ]
    shift, scale = obs_normalizer(envs[0])
    params = init_params(
        init_rng, envs[0].observation_dim, envs[0].n_actions, train_config.hidden_sizes, shift, scale
    )
    opt_state: dict = {}

    def fresh_obs(e: PhotoEnv, tmpl=None) -> np.ndarray:
        # Resample starts born inside the match region; such episodes carry
        # no decisions worth learning from.
        obs = e.reset(tmpl)
        for _ in range(e.scene.n_states):
            if not e.done:
                return obs.vector
            obs = e.reset()
        raise ValueError("template matches every sampled start; nothing to train")

    obs_mat = np.stack([fresh_obs(e, template) for e in envs])

    window = train_config.curve_window
    recent: deque[tuple[float, int, bool]] = deque(maxlen=window)
    ep_return = np.zeros(train_config.n_envs)
    curve: list[CurvePoint] = []
    episodes_completed = 0
    n_envs, n_steps = train_config.n_envs, train_config.n_steps
    buf = RolloutBuffer(
        obs=np.zeros((n_envs, n_steps, envs[0].observation_dim)),
        actions=np.zeros((n_envs, n_steps), dtype=np.int64),
        rewards=np.zeros((n_envs, n_steps)),
        values=np.zeros((n_envs, n_steps)),
        dones=np.zeros((n_envs, n_steps), dtype=bool),
        bootstrap=np.zeros(n_envs),
    )

    for update in range(train_config.total_updates):
        for t in range(n_steps):
            logits, values, _ = _forward_batch(params, obs_mat)
            buf.obs[:, t] = obs_mat
            buf.values[:, t] = values
            for i, e in enumerate(envs):
                a = sample_action(logits[i], e.rng)
                res = e.step(a)
                buf.actions[i, t] = a
                buf.rewards[i, t] = res.reward
                buf.dones[i, t] = res.done
                ep_return[i] += res.reward
                if res.done:
                    recent.append((ep_return[i], e.steps, res.info["terminated_by"] == "match"))
                    episodes_completed += 1
                    ep_return[i] = 0.0
                    obs_mat[i] = fresh_obs(e)
                else:
                    obs_mat[i] = res.observation.vector
        _, bootstrap, _ = _forward_batch(params, obs_mat)
        buf.bootstrap[:] = bootstrap
        frac = update / max(train_config.total_updates - 1, 1)
        step_config = train_config
        if train_config.lr_anneal:
            step_config = replace(step_config, lr_anneal=False,
                                  learning_rate=train_config.learning_rate * (1.0 - 0.9 * frac))
        if train_config.entropy_final is not None:
            coef = train_config.entropy_coef + (train_config.entropy_final - train_config.entropy_coef) * frac
            step_config = replace(step_config, entropy_final=None, entropy_coef=coef)
        a2c_update(params, buf, step_config, opt_state)
        if recent:
            mean_ret = float(np.mean([r for r, _, _ in recent]))
            mean_len = float(np.mean([l for _, l, _ in recent]))
            succ = float(np.mean([1.0 if m else 0.0 for _, _, m in recent]))
        else:
            mean_ret = mean_len = succ = float("nan")
        curve.append(CurvePoint(update, mean_ret, mean_len, succ))

    final = curve[-1].mean_return if curve else float("nan")
    return TrainResult(params, curve, final, episodes_completed, env_config, train_config)


Controller = Callable[[PhotoEnv], int]


def evaluate(
    policy: PolicyParams | Controller,
    env: PhotoEnv,
    episodes: int,
    mode: str = "greedy",
) -> dict:
    """Episode statistics for a policy or a controller callable.

    Starts follow the environment's configured distribution; failures count
    their full step totals. SD uses the population convention (ddof=0).
    """
    if episodes < 1:
        raise ValueError(f"need at least one episode, got {episodes}")
    if mode not in ("greedy", "sampled"):
        raise ValueError(f"mode must be 'greedy' or 'sampled', got {mode!r}")
    if isinstance(policy, PolicyParams):
        params = policy

        def controller(e: PhotoEnv) -> int:
            logits, _ = forward(params, e.last_observation.vector)
            return greedy_action(logits) if mode == "greedy" else sample_action(logits, e.rng)

    else:
        controller = policy

    counts, returns, successes = [], [], []
    for _ in range(episodes):
        env.reset()
        total = 0.0
        outcome = "match" if env.done else "none"
        while not env.done:
            res = env.step(controller(env))
            total += res.reward
            outcome = res.info["terminated_by"]
        counts.append(env.steps)
        returns.append(total)
        successes.append(outcome == "match")
    return {
        "success_rate": float(np.mean(successes)),
        "mean_actions": float(np.mean(counts)),
        "sd_actions": float(np.std(counts)),
        "mean_return": float(np.mean(returns)),
        "episodes": episodes,
    }


def grad_check(
    params: PolicyParams,
    obs_batch: np.ndarray,
    loss: str = "total",
    h: float = 1e-5,
    actions: np.ndarray | None = None,
    returns: np.ndarray | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error uses a unit floor in the denominator, so near-zero
    gradients compare at absolute tolerance. Intended for reduced networks
    (<= 500 parameters); checks every scalar parameter.
    """
    obs_batch = np.asarray(obs_batch, dtype=np.float64)
    if obs_batch.ndim != 2 or obs_batch.shape[0] == 0:
        raise ValueError("grad_check needs a nonempty (B, obs_dim) batch")
    coefs = {
        "total": (1.0, 0.5, 0.01),
        "policy": (1.0, 0.0, 0.0),
        "value": (0.0, 1.0, 0.0),
        "entropy": (0.0, 0.0, 1.0),
    }
    if loss not in coefs:
        raise ValueError(f"unknown loss selector {loss!r}")
    pc, vc, ec = coefs[loss]
    B = obs_batch.shape[0]
    if actions is None:
        actions = np.arange(B) % params.n_actions
    if returns is None:
        returns = np.linspace(0.0, 1.0, B)

    _, grads, _ = _loss_and_grads(params, obs_batch, actions, returns, vc, ec, policy_coef=pc)

    def loss_at(p: PolicyParams) -> float:
        val, _, _ = _loss_and_grads(p, obs_batch, actions, returns, vc, ec, policy_coef=pc)
        return val

    max_err = 0.0
    work = params.copy()
    arrays = dict(work.param_items())
    for name, analytic in grads.items():
        if name == "bv":
            base = work.b_value
            work.b_value = base + h
            up = loss_at(work)
            work.b_value = base - h
            down = loss_at(work)
            work.b_value = base
            num = (up - down) / (2.0 * h)
            a = float(analytic)
            max_err = max(max_err, abs(a - num) / max(abs(a), abs(num), 1.0))
            continue
        arr = arrays[name]
        flat = arr.reshape(-1)
        aflat = analytic.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_at(work)
            flat[i] = orig - h
            down = loss_at(work)
            flat[i] = orig
            num = (up - down) / (2.0 * h)
            a = float(aflat[i])
            max_err = max(max_err, abs(a - num) / max(abs(a), abs(num), 1.0))
    return max_err


def save_params(path, params: PolicyParams, env_config: EnvConfig, train_config: TrainConfig) -> None:
    """Versioned JSON container with the exact configs and seed embedded."""
    doc = {
        "format": PARAMS_FORMAT,
        "version": PARAMS_VERSION,
        "seed": train_config.seed,
        "env_config": {
            "alpha": env_config.alpha,
            "match_epsilon_px": env_config.match_epsilon_px,
            "max_steps": env_config.max_steps,
            "memory_len": env_config.memory_len,
            "velocity_levels": env_config.velocity_levels,
            "start": env_config.start,
        },
        "train_config": {
            "gamma": train_config.gamma,
            "learning_rate": train_config.learning_rate,
            "n_steps": train_config.n_steps,
            "n_envs": train_config.n_envs,
            "entropy_coef": train_config.entropy_coef,
            "value_coef": train_config.value_coef,
            "grad_clip_norm": train_config.grad_clip_norm,
            "total_updates": train_config.total_updates,
            "optimizer": train_config.optimizer,
            "hidden_sizes": list(train_config.hidden_sizes),
        },
        "obs_shift": params.obs_shift.tolist(),
        "obs_scale": params.obs_scale.tolist(),
        "hidden": [
            {"W": w.tolist(), "b": b.tolist()} for w, b in zip(params.weights, params.biases)
        ],
        "policy_head": {"W": params.w_policy.tolist(), "b": params.b_policy.tolist()},
        "value_head": {"W": params.w_value.tolist(), "b": params.b_value},
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_params(path) -> tuple[PolicyParams, dict]:
    """Load a policy file; returns (params, raw document)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParamsFormatError(f"not a policy file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != PARAMS_FORMAT:
        raise ParamsFormatError(f"unrecognized params format in {path}")
    if doc.get("version") != PARAMS_VERSION:
        raise ParamsFormatError(f"unsupported params version {doc.get('version')}")
    try:
        params = PolicyParams(
            [np.array(layer["W"], dtype=np.float64) for layer in doc["hidden"]],
            [np.array(layer["b"], dtype=np.float64) for layer in doc["hidden"]],
            np.array(doc["policy_head"]["W"], dtype=np.float64),
            np.array(doc["policy_head"]["b"], dtype=np.float64),
            np.array(doc["value_head"]["W"], dtype=np.float64),
            float(doc["value_head"]["b"]),
            np.array(doc["obs_shift"], dtype=np.float64),
            np.array(doc["obs_scale"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParamsFormatError(f"malformed params file: {exc}") from exc
    return params, doc


CURVE_HEADER = ["update", "mean_return", "mean_len", "success_rate"]


def write_curve_csv(curve: list[CurvePoint], path) -> None:
    with open(path, "w", newline="\n") as fh:
        wr = csv.writer(fh)
        wr.writerow(CURVE_HEADER)
        for p in curve:
            wr.writerow([p.update, repr(p.mean_return), repr(p.mean_len), repr(p.success_rate)])


ABLATIONS = {
    "memory": ("memory_len", 0, 5),
    "velocity": ("velocity_levels", 1, 3),
}


def run_ablation(
    kind: str,
    scene: Scene,
    template: np.ndarray,
    env_config: EnvConfig,
    train_config: TrainConfig,
    n_seeds: int = 5,
) -> dict:
    """Train both arms of a configuration ablation over several seeds.

    Returns a report with per-seed final mean returns for each arm and an
    explicit direction_holds flag (variant >= baseline on the mean); a
    failed direction is reported, never suppressed.
    """
    if kind not in ABLATIONS:
        raise ValueError(f"unknown ablation {kind!r}; choose from {sorted(ABLATIONS)}")
    field_name, base_val, variant_val = ABLATIONS[kind]
    arms = []
    results: dict[str, list[TrainResult]] = {}
    for arm_name, value in (("baseline", base_val), ("variant", variant_val)):
        cfg = replace(env_config, **{field_name: value})
        finals = []
        runs = []
        for s in range(n_seeds):
            tc = replace(train_config, seed=train_config.seed + s)
            result = train(scene, template, cfg, tc)
            finals.append(result.final_mean_return)
            runs.append(result)
        arms.append(
            {
                "name": arm_name,
                field_name: value,
                "final_returns": finals,
                "mean_final_return": float(np.mean(finals)),
            }
        )
        results[arm_name] = runs
    direction_holds = arms[1]["mean_final_return"] >= arms[0]["mean_final_return"]
    return {
        "ablation": kind,
        "field": field_name,
        "n_seeds": n_seeds,
        "arms": arms,
        "direction_holds": bool(direction_holds),
        "runs": results,
    }
