"""Desk-scale learned policy over the meta-action space.

A linear softmax policy over hand-built state-action features stands in for
the reference GNN encoder: the action-space mechanism, not the encoder, is
what this package studies. Training is a scaled-down clipped-surrogate
policy-gradient loop (PPO-style) with an entropy bonus and a running-mean
return baseline. Everything is reproducible bit for bit under a fixed seed
and single-threaded rollout order.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .env import (EnvConfig, EpisodeTrace, REASON_GOAL, discounted_return,
                  rollout)
from .grounding import GroundTask
from .meta_ops import ConflictSet, MetaAction, applicable_actions, \
    build_conflict_set
from .transition import State

CHECKPOINT_SCHEMA_VERSION = 1

N_CORE_FEATURES = 6


class DeadEndError(Exception):
    """No applicable action: the caller must terminate the episode."""


class NonFiniteGradientError(Exception):
    """A gradient step produced non-finite values; the update was aborted."""


@dataclass(frozen=True)
class FeatureConfig:
    """Featurizer shape: core features plus hashed predicate features."""

    degree: int
    d_hash: int = 64

    @property
    def dim(self) -> int:
        return N_CORE_FEATURES + self.d_hash


@dataclass
class PolicyParams:
    """Linear policy weights plus the running return baseline."""

    weights: np.ndarray
    baseline: float = 0.0
    return_count: int = 0
    version: int = 0

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.weights.copy(), self.baseline,
                            self.return_count, self.version)


@dataclass(frozen=True)
class TrainConfig:
    """Scaled-down analogue of the reference 900x100x20 PPO schedule."""

    iterations: int = 300
    episodes_per_iteration: int = 32
    gradient_steps: int = 10
    clip_epsilon: float = 0.2
    learning_rate: float = 0.1
    entropy_coef: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        for name in ("episodes_per_iteration", "gradient_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ValueError("clip_epsilon must be in (0, 1)")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be > 0")
        if self.entropy_coef < 0.0:
            raise ValueError("entropy_coef must be >= 0")

    def to_json(self) -> dict:
        return {"iterations": self.iterations,
                "episodes_per_iteration": self.episodes_per_iteration,
                "gradient_steps": self.gradient_steps,
                "clip_epsilon": self.clip_epsilon,
                "learning_rate": self.learning_rate,
                "entropy_coef": self.entropy_coef, "seed": self.seed}


def init_params(fc: FeatureConfig) -> PolicyParams:
    """Zero weights: the uniform policy over applicable actions."""
    return PolicyParams(weights=np.zeros(fc.dim, dtype=np.float64))


def _hash_bucket(text: str, width: int) -> int:
    return zlib.crc32(text.encode("utf-8")) % width


def featurize(task: GroundTask, state: State, action: MetaAction,
              fc: FeatureConfig) -> np.ndarray:
    """Deterministic state-action feature vector.

    Core block: bias, degree fraction, goal facts newly added, goal facts
    deleted, goal fraction satisfied in the successor, add effects in the
    goal. Hashed block: signed counts over (predicate, argument position)
    of the facts the action touches, +1 per add and -1 per delete.
    """
    v = np.zeros(fc.dim, dtype=np.float64)
    goal = task.goal
    next_state = (state - action.delete) | action.add
    v[0] = 1.0
    v[1] = action.degree / fc.degree
    v[2] = len((action.add & goal) - state)
    v[3] = len(action.delete & goal)
    v[4] = len(goal & next_state) / len(goal) if goal else 1.0
    v[5] = len(action.add & goal)
    for indices, sign in ((action.add, 1.0), (action.delete, -1.0)):
        for i in indices:
            fact = task.facts[i]
            v[N_CORE_FEATURES + _hash_bucket(fact.predicate, fc.d_hash)] += sign
            for pos in range(len(fact.args)):
                bucket = _hash_bucket(f"{fact.predicate}/{pos}", fc.d_hash)
                v[N_CORE_FEATURES + bucket] += sign
    return v


def featurize_all(task: GroundTask, state: State,
                  actions: Sequence[MetaAction],
                  fc: FeatureConfig) -> np.ndarray:
    """Stacked (n_actions, dim) feature matrix."""
    return np.stack([featurize(task, state, a, fc) for a in actions])


def action_distribution(params: PolicyParams, feats: np.ndarray) -> np.ndarray:
    """Softmax over per-action logits; only applicable actions get entries."""
    if len(feats) == 0:
        raise DeadEndError("no applicable actions")
    logits = feats @ params.weights
    logits = logits - logits.max()
    exp = np.exp(logits)
    return exp / exp.sum()


def sample_action(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index from ``dist``, advancing ``rng`` deterministically."""
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(dist), u, side="right"))
    return min(idx, len(dist) - 1)


def greedy_action(dist: np.ndarray) -> int:
    """Argmax index; ties break to the lowest index."""
    return int(np.argmax(dist))


# ---------------------------------------------------------------------------
# Clipped-surrogate update
# ---------------------------------------------------------------------------

@dataclass
class _DecisionStep:
    feats: np.ndarray  # (n_actions, dim)
    taken: int
    old_logp: float
    advantage: float


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    return z - np.log(np.exp(z).sum())


def surrogate_objective(weights: np.ndarray, steps: Sequence[_DecisionStep],
                        clip_epsilon: float,
                        entropy_coef: float) -> tuple[float, np.ndarray]:
    """Mean clipped surrogate plus entropy bonus, with its analytic gradient.

    Per decision: min(ratio * A, clip(ratio, 1-eps, 1+eps) * A) where
    ratio = pi_w(a) / pi_old(a). The gradient of the min is the unclipped
    branch's gradient when that branch is active and zero when the clip is
    strictly active; the entropy gradient is -sum_i p_i log p_i (f_i - fbar).
    """
    total = 0.0
    grad = np.zeros_like(weights)
    for s in steps:
        logp = _log_softmax(s.feats @ weights)
        p = np.exp(logp)
        fbar = p @ s.feats
        ratio = float(np.exp(logp[s.taken] - s.old_logp))
        unclipped = ratio * s.advantage
        clipped = float(np.clip(ratio, 1.0 - clip_epsilon,
                                1.0 + clip_epsilon)) * s.advantage
        total += min(unclipped, clipped)
        if unclipped <= clipped:
            grad += s.advantage * ratio * (s.feats[s.taken] - fbar)
        # Entropy: H = -sum p log p.
        q = p * logp
        total += entropy_coef * float(-q.sum())
        grad += entropy_coef * (-(q @ s.feats - q.sum() * fbar))
    n = max(len(steps), 1)
    return total / n, grad / n


def _decision_steps(batch: Sequence[EpisodeTrace], params: PolicyParams,
                    env_cfg: EnvConfig, fc: FeatureConfig,
                    conflict_sets: dict[int, ConflictSet]) -> list[_DecisionStep]:
    steps: list[_DecisionStep] = []
    for trace in batch:
        task = trace.task
        if task is None:
            raise ValueError("trace has no task attached")
        key = id(task)
        if key not in conflict_sets:
            conflict_sets[key] = build_conflict_set(task)
        n = conflict_sets[key]
        # Discounted reward-to-go per decision.
        togo = 0.0
        returns = [0.0] * len(trace.rewards)
        for t in range(len(trace.rewards) - 1, -1, -1):
            togo = trace.rewards[t] + env_cfg.gamma * togo
            returns[t] = togo
        for t, action in enumerate(trace.actions):
            available = applicable_actions(task, trace.states[t],
                                           env_cfg.degree, n)
            feats = featurize_all(task, trace.states[t], available, fc)
            taken = next(i for i, a in enumerate(available)
                         if a.atoms == action.atoms)
            logp = _log_softmax(feats @ params.weights)
            steps.append(_DecisionStep(
                feats=feats, taken=taken, old_logp=float(logp[taken]),
                advantage=returns[t] - params.baseline))
    return steps


def policy_update(params: PolicyParams, batch: Sequence[EpisodeTrace],
                  cfg: TrainConfig, env_cfg: EnvConfig,
                  fc: FeatureConfig | None = None) -> PolicyParams:
    """One training update from a batch of episodes.

    Runs up to ``cfg.gradient_steps`` ascent steps on the clipped surrogate,
    then folds the batch returns into the running-mean baseline. On any
    non-finite gradient the update aborts and ``params`` is untouched.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    if fc is None:
        fc = FeatureConfig(degree=env_cfg.degree)

    conflict_sets: dict[int, ConflictSet] = {}
    steps = _decision_steps(batch, params, env_cfg, fc, conflict_sets)

    weights = params.weights.copy()
    for _ in range(cfg.gradient_steps):
        if not steps:
            break
        _, grad = surrogate_objective(weights, steps, cfg.clip_epsilon,
                                      cfg.entropy_coef)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError("non-finite surrogate gradient")
        weights = weights + cfg.learning_rate * grad
        if not np.all(np.isfinite(weights)):
            raise NonFiniteGradientError("non-finite weights after update")

    baseline = params.baseline
    count = params.return_count
    for trace in batch:
        ep_return = discounted_return(trace.rewards, env_cfg.gamma)
        count += 1
        baseline += (ep_return - baseline) / count
    return PolicyParams(weights=weights, baseline=baseline,
                        return_count=count, version=params.version + 1)


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

def _episode_parallelism(trace: EpisodeTrace) -> float | None:
    if not trace.actions:
        return None
    parallel = sum(1 for a in trace.actions if a.degree >= 2)
    return parallel / len(trace.actions)


@dataclass
class TrainResult:
    params: PolicyParams
    curve: list[dict]


def train(tasks: Sequence[GroundTask], env_cfg: EnvConfig, cfg: TrainConfig,
          fc: FeatureConfig | None = None,
          params: PolicyParams | None = None) -> TrainResult:
    """Iterate rollout batches and updates over a task set.

    Each iteration samples one task uniformly, rolls out
    ``episodes_per_iteration`` episodes with the current stochastic policy,
    and applies one :func:`policy_update`. The curve records mean return,
    coverage, and mean parallelism rate per iteration.
    """
    if not tasks:
        raise ValueError("tasks must be non-empty")
    if fc is None:
        fc = FeatureConfig(degree=env_cfg.degree)
    if params is None:
        params = init_params(fc)

    rng = np.random.default_rng(cfg.seed)
    conflict_sets = [build_conflict_set(t) for t in tasks]
    curve: list[dict] = []

    for iteration in range(cfg.iterations):
        task_idx = int(rng.integers(len(tasks)))
        task, n = tasks[task_idx], conflict_sets[task_idx]

        def choose(state: State, available: list[MetaAction]) -> int:
            feats = featurize_all(task, state, available, fc)
            return sample_action(action_distribution(params, feats), rng)

        batch = [rollout(task, env_cfg, n, choose)
                 for _ in range(cfg.episodes_per_iteration)]
        try:
            params = policy_update(params, batch, cfg, env_cfg, fc)
        except NonFiniteGradientError as err:
            raise NonFiniteGradientError(
                f"iteration {iteration}: {err}") from err

        returns = [discounted_return(t.rewards, env_cfg.gamma) for t in batch]
        solved = [t for t in batch if t.reason == REASON_GOAL]
        rates = [r for t in solved
                 if (r := _episode_parallelism(t)) is not None]
        curve.append({
            "iteration": iteration,
            "task": task.problem_name,
            "mean_return": float(np.mean(returns)),
            "coverage": len(solved) / len(batch),
            "mean_parallelism": float(np.mean(rates)) if rates else None,
        })
    return TrainResult(params=params, curve=curve)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

@dataclass
class Checkpoint:
    params: PolicyParams
    feature: FeatureConfig
    seed: int

    def to_json(self) -> dict:
        return {
            "schema_version": CHECKPOINT_SCHEMA_VERSION,
            "weights": self.params.weights.tolist(),
            "baseline": self.params.baseline,
            "return_count": self.params.return_count,
            "version": self.params.version,
            "feature": {"degree": self.feature.degree,
                        "d_hash": self.feature.d_hash},
            "seed": self.seed,
        }

    @staticmethod
    def from_json(data: dict) -> "Checkpoint":
        params = PolicyParams(
            weights=np.asarray(data["weights"], dtype=np.float64),
            baseline=float(data["baseline"]),
            return_count=int(data["return_count"]),
            version=int(data["version"]))
        fc = FeatureConfig(degree=int(data["feature"]["degree"]),
                           d_hash=int(data["feature"]["d_hash"]))
        return Checkpoint(params=params, feature=fc, seed=int(data["seed"]))


def save_checkpoint(checkpoint: Checkpoint, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint.to_json(), fh, indent=2)
        fh.write("\n")


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, encoding="utf-8") as fh:
        return Checkpoint.from_json(json.load(fh))
