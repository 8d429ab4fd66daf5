"""Deterministic episodic MDP over a ground task.

Reward is sparse: ``goal_reward`` on reaching the goal, plus a flat
``meta_reward`` whenever the chosen action bundles two or more operators.
The two stack additively when a meta-action reaches the goal, so every step
reward is exactly one of {0, r, goal_reward, goal_reward + r}. Episodes end
on goal, on the step cap, or in a dead end (no applicable action).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .grounding import GroundTask
from .meta_ops import ConflictSet, MetaAction, applicable_actions, conflicts
from .transition import InapplicableError, State, is_goal

REASON_GOAL = "goal"
REASON_STEP_LIMIT = "step_limit"
REASON_DEAD_END = "dead_end"


@dataclass(frozen=True)
class EnvConfig:
    """Reward shaping and episode parameters."""

    gamma: float = 0.99
    goal_reward: float = 1.0
    meta_reward: float = 0.0
    max_steps: int = 100
    degree: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if self.meta_reward < 0.0:
            raise ValueError(f"meta_reward must be >= 0, got {self.meta_reward}")

    def to_json(self) -> dict[str, Any]:
        return {"gamma": self.gamma, "goal_reward": self.goal_reward,
                "meta_reward": self.meta_reward, "max_steps": self.max_steps,
                "degree": self.degree, "seed": self.seed}


@dataclass(frozen=True)
class StepOutcome:
    next_state: State
    reward: float
    done: bool
    info: dict[str, Any]


@dataclass
class EpisodeTrace:
    """Aligned state/action/reward sequences: |states| = |actions| + 1."""

    states: list[State]
    actions: list[MetaAction]
    rewards: list[float]
    terminal: bool
    reason: str
    task: Optional[GroundTask] = field(default=None, repr=False)

    def to_json(self) -> dict[str, Any]:
        return {
            "problem": self.task.problem_name if self.task else None,
            "states": [sorted(s) for s in self.states],
            "actions": [list(a.atoms) for a in self.actions],
            "rewards": self.rewards,
            "terminal": self.terminal,
            "reason": self.reason,
        }


def reset(task: GroundTask) -> State:
    """Initial state of a fresh episode; the step counter restarts at zero."""
    return task.init


def _has_applicable(task: GroundTask, state: State) -> bool:
    return any(op.pre <= state for op in task.operators)


def step(task: GroundTask, state: State, action: MetaAction, cfg: EnvConfig,
         steps_so_far: int) -> StepOutcome:
    """Apply one (meta-)action and score it.

    ``steps_so_far`` counts completed steps before this one. Strict: raises
    :class:`InapplicableError` unless every atom is applicable in ``state``
    and the atoms are pairwise conflict-free.
    """
    if action.degree > cfg.degree:
        raise InapplicableError(
            f"action degree {action.degree} exceeds configured degree {cfg.degree}")
    for i in action.atoms:
        if not task.operators[i].pre <= state:
            raise InapplicableError(f"{task.operators[i].name} inapplicable")
    for idx, a in enumerate(action.atoms):
        for b in action.atoms[idx + 1:]:
            if conflicts(task, a, b):
                raise InapplicableError(
                    f"conflicting atoms {task.operators[a].name} / "
                    f"{task.operators[b].name}")

    next_state = (state - action.delete) | action.add
    goal_reached = is_goal(task, next_state)
    reward = (cfg.goal_reward if goal_reached else 0.0)
    if action.degree >= 2:
        reward += cfg.meta_reward

    steps = steps_so_far + 1
    done = goal_reached or steps >= cfg.max_steps \
        or not _has_applicable(task, next_state)
    return StepOutcome(next_state=next_state, reward=reward, done=done,
                       info={"degree": action.degree,
                             "goal_reached": goal_reached,
                             "steps_so_far": steps})


def rollout(task: GroundTask, cfg: EnvConfig, conflict_set: ConflictSet,
            choose: Callable[[State, list[MetaAction]], int]) -> EpisodeTrace:
    """Run one episode, picking actions with ``choose(state, actions)``."""
    state = reset(task)
    states = [state]
    actions: list[MetaAction] = []
    rewards: list[float] = []
    if is_goal(task, state):
        return EpisodeTrace(states, actions, rewards, True, REASON_GOAL, task)

    steps = 0
    while True:
        available = applicable_actions(task, state, cfg.degree, conflict_set)
        if not available:
            return EpisodeTrace(states, actions, rewards, True,
                                REASON_DEAD_END, task)
        action = available[choose(state, available)]
        outcome = step(task, state, action, cfg, steps)
        state = outcome.next_state
        steps = outcome.info["steps_so_far"]
        states.append(state)
        actions.append(action)
        rewards.append(outcome.reward)
        if outcome.info["goal_reached"]:
            return EpisodeTrace(states, actions, rewards, True, REASON_GOAL, task)
        if steps >= cfg.max_steps:
            return EpisodeTrace(states, actions, rewards, True,
                                REASON_STEP_LIMIT, task)
        if outcome.done:
            return EpisodeTrace(states, actions, rewards, True,
                                REASON_DEAD_END, task)


def discounted_return(rewards: list[float], gamma: float) -> float:
    """Sum of gamma^k * rewards[k] (Horner evaluation)."""
    acc = 0.0
    for r in reversed(rewards):
        acc = r + gamma * acc
    return acc


def conservative_meta_reward(cfg: EnvConfig) -> float:
    """Meta reward guaranteed not to mask the goal within one episode."""
    return cfg.goal_reward / cfg.max_steps


@dataclass(frozen=True)
class RewardAudit:
    """Shaping-vs-goal reward accounting for one episode."""

    meta_total: float
    goal_total: float
    masking: bool


def shaped_reward_audit(trace: EpisodeTrace, cfg: EnvConfig) -> RewardAudit:
    """Total meta shaping collected, goal reward collected, and a masking
    flag set when the shaping total exceeds the goal reward."""
    meta_total = 0.0
    for action in trace.actions:
        if action.degree >= 2:
            meta_total += cfg.meta_reward
    goal_total = cfg.goal_reward if (trace.terminal
                                     and trace.reason == REASON_GOAL
                                     and trace.actions) else 0.0
    return RewardAudit(meta_total=meta_total, goal_total=goal_total,
                       masking=meta_total > cfg.goal_reward)
