"""Plan execution, validation, metrics, and a breadth-first oracle planner.

Plans are timestep-indexed sets of operator ids: each step is a conflict-free
bundle applied simultaneously via the union formula. "Length" in reports is
the number of timesteps; the count of atomic operators is reported alongside
to avoid ambiguity with sequential baselines.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .env import EnvConfig, REASON_DEAD_END, REASON_GOAL, REASON_STEP_LIMIT
from .grounding import GroundTask
from .meta_ops import ConflictSet, MetaAction, applicable_actions, \
    build_conflict_set, conflicts
from .policy import FeatureConfig, PolicyParams, action_distribution, \
    featurize_all, greedy_action, sample_action
from .transition import State, is_goal

REPORT_SCHEMA_VERSION = 1

DEFAULT_BFS_STATE_CAP = 1_000_000

CAUSE_INAPPLICABLE = "inapplicable"
CAUSE_CONFLICT = "conflict"
CAUSE_DEGREE = "degree_exceeded"
CAUSE_GOAL = "goal_unsatisfied"


class PlanParseError(Exception):
    """A plan file line does not match the plan text format."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class EmptyPlanError(Exception):
    """Metric undefined for a plan with no timesteps."""


class SearchMemoryError(Exception):
    """BFS exceeded its visited-state cap."""

    def __init__(self, visited: int, cap: int):
        super().__init__(f"search visited {visited} states (cap {cap})")
        self.visited = visited
        self.cap = cap


@dataclass(frozen=True)
class Plan:
    """Ordered timesteps, each a sorted tuple of operator ids."""

    steps: tuple[tuple[int, ...], ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        for i, step in enumerate(self.steps):
            if not step:
                raise ValueError(f"step {i} is empty")

    @property
    def timesteps(self) -> int:
        return len(self.steps)

    @property
    def total_atoms(self) -> int:
        return sum(len(step) for step in self.steps)


def plan_from_actions(actions: Sequence[MetaAction],
                      provenance: str = "") -> Plan:
    return Plan(tuple(a.atoms for a in actions), provenance)


# ---------------------------------------------------------------------------
# Plan text format: "<t>: (<op> <args...>) (<op> <args...>)"
# ---------------------------------------------------------------------------

_STEP_RE = re.compile(r"^(\d+):\s*(.*)$")
_OP_RE = re.compile(r"\(([^()]*)\)")


def plan_to_text(task: GroundTask, plan: Plan) -> str:
    lines = []
    for t, step in enumerate(plan.steps):
        ops = " ".join(task.operators[i].name for i in step)
        lines.append(f"{t}: {ops}")
    return "\n".join(lines) + ("\n" if lines else "")


def plan_from_text(task: GroundTask, text: str,
                   provenance: str = "file") -> Plan:
    steps: list[tuple[int, ...]] = []
    lineno = 0
    expected_t = 0
    for raw in text.splitlines():
        lineno += 1
        line = raw.split(";")[0].strip()
        if not line:
            continue
        match = _STEP_RE.match(line)
        if not match:
            raise PlanParseError(f"malformed step line {line!r}", lineno)
        t = int(match.group(1))
        if t != expected_t:
            raise PlanParseError(f"expected timestep {expected_t}, found {t}",
                                 lineno)
        expected_t += 1
        body = match.group(2).strip()
        names = _OP_RE.findall(body)
        leftover = _OP_RE.sub("", body).strip()
        if leftover or not names:
            raise PlanParseError(f"malformed operator list {body!r}", lineno)
        ids = []
        for name in names:
            canonical = "(" + " ".join(name.split()) + ")"
            op_id = task.operator_index.get(canonical)
            if op_id is None:
                raise PlanParseError(f"unknown operator {canonical}", lineno)
            ids.append(op_id)
        if len(set(ids)) != len(ids):
            raise PlanParseError("duplicate operator within a step", lineno)
        steps.append(tuple(sorted(ids)))
    return Plan(tuple(steps), provenance)


# ---------------------------------------------------------------------------
# Validation and metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    step: Optional[int] = None
    cause: Optional[str] = None
    detail: str = ""


def validate_plan(task: GroundTask, plan: Plan, degree: int) -> ValidationResult:
    """Check a parallel plan step by step against the task semantics.

    A step passes when its degree is within bounds, its atoms are pairwise
    conflict-free, and every atom is applicable in the running state; the
    plan passes when the final state satisfies the goal.
    """
    state: State = task.init
    for t, step in enumerate(plan.steps):
        if len(step) > degree:
            return ValidationResult(False, t, CAUSE_DEGREE,
                                    f"degree {len(step)} > {degree}")
        for i, a in enumerate(step):
            for b in step[i + 1:]:
                if conflicts(task, a, b):
                    return ValidationResult(
                        False, t, CAUSE_CONFLICT,
                        f"{task.operators[a].name} conflicts with "
                        f"{task.operators[b].name}")
        for a in step:
            if not task.operators[a].pre <= state:
                return ValidationResult(False, t, CAUSE_INAPPLICABLE,
                                        f"{task.operators[a].name}")
        delete: frozenset[int] = frozenset()
        add: frozenset[int] = frozenset()
        for a in step:
            delete |= task.operators[a].delete
            add |= task.operators[a].add
        state = (state - delete) | add
    if not is_goal(task, state):
        missing = sorted(task.goal - state)
        return ValidationResult(False, len(plan.steps), CAUSE_GOAL,
                                ", ".join(task.fact_str(i) for i in missing))
    return ValidationResult(True)


def parallelism_rate(plan: Plan) -> float:
    """Fraction of timesteps carrying two or more operators."""
    if not plan.steps:
        raise EmptyPlanError("parallelism rate undefined for an empty plan")
    parallel = sum(1 for step in plan.steps if len(step) >= 2)
    return parallel / len(plan.steps)


@dataclass(frozen=True)
class ProblemOutcome:
    problem: str
    solved: bool
    timesteps: Optional[int] = None
    total_atoms: Optional[int] = None
    parallelism: Optional[float] = None
    reason: str = ""

    def to_json(self) -> dict[str, Any]:
        return {"problem": self.problem, "solved": self.solved,
                "timesteps": self.timesteps, "total_atoms": self.total_atoms,
                "parallelism": self.parallelism, "reason": self.reason}


@dataclass(frozen=True)
class EvalReport:
    outcomes: tuple[ProblemOutcome, ...]
    solved: int
    total: int
    avg_timesteps: Optional[float]
    avg_total_atoms: Optional[float]
    mean_parallelism: Optional[float]
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def coverage(self) -> Optional[float]:
        return self.solved / self.total if self.total else None

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "solved": self.solved,
            "total": self.total,
            "coverage": self.coverage,
            "avg_timesteps": self.avg_timesteps,
            "avg_total_atoms": self.avg_total_atoms,
            "mean_parallelism": self.mean_parallelism,
            "config": self.config,
            "outcomes": [o.to_json() for o in self.outcomes],
        }


def aggregate(outcomes: Sequence[ProblemOutcome],
              config: dict[str, Any] | None = None) -> EvalReport:
    """Coverage plus averages computed over solved problems only."""
    solved = [o for o in outcomes if o.solved]
    lengths = [o.timesteps for o in solved if o.timesteps is not None]
    atoms = [o.total_atoms for o in solved if o.total_atoms is not None]
    rates = [o.parallelism for o in solved if o.parallelism is not None]
    return EvalReport(
        outcomes=tuple(outcomes),
        solved=len(solved),
        total=len(outcomes),
        avg_timesteps=float(np.mean(lengths)) if lengths else None,
        avg_total_atoms=float(np.mean(atoms)) if atoms else None,
        mean_parallelism=float(np.mean(rates)) if rates else None,
        config=dict(config or {}),
    )


# ---------------------------------------------------------------------------
# Policy execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolicyRun:
    solved: bool
    plan: Optional[Plan]
    reason: str


def run_policy(params: PolicyParams, task: GroundTask, mode: str,
               env_cfg: EnvConfig, fc: FeatureConfig | None = None,
               conflict_set: ConflictSet | None = None,
               seed: int | None = None) -> PolicyRun:
    """Execute the policy from the initial state until goal, dead end, or cap.

    ``mode`` is ``"greedy"`` (argmax, the evaluation default) or
    ``"sample"`` (seeded stochastic draw). Failure is a value, not an error.
    """
    if mode not in ("greedy", "sample"):
        raise ValueError(f"mode must be 'greedy' or 'sample', got {mode!r}")
    if fc is None:
        fc = FeatureConfig(degree=env_cfg.degree)
    if conflict_set is None:
        conflict_set = build_conflict_set(task)
    rng = np.random.default_rng(env_cfg.seed if seed is None else seed)

    state = task.init
    chosen: list[MetaAction] = []
    for _ in range(env_cfg.max_steps):
        if is_goal(task, state):
            return PolicyRun(True, plan_from_actions(chosen, "policy"),
                             REASON_GOAL)
        available = applicable_actions(task, state, env_cfg.degree,
                                       conflict_set)
        if not available:
            return PolicyRun(False, None, REASON_DEAD_END)
        dist = action_distribution(
            params, featurize_all(task, state, available, fc))
        idx = greedy_action(dist) if mode == "greedy" \
            else sample_action(dist, rng)
        action = available[idx]
        state = (state - action.delete) | action.add
        chosen.append(action)
    if is_goal(task, state):
        return PolicyRun(True, plan_from_actions(chosen, "policy"), REASON_GOAL)
    return PolicyRun(False, None, REASON_STEP_LIMIT)


def evaluate_policy(params: PolicyParams, tasks: Sequence[GroundTask],
                    mode: str, env_cfg: EnvConfig,
                    fc: FeatureConfig | None = None,
                    seed: int | None = None,
                    config: dict[str, Any] | None = None) -> EvalReport:
    """Run the policy over a task list and aggregate per-problem outcomes."""
    outcomes = []
    for task in tasks:
        run = run_policy(params, task, mode, env_cfg, fc, seed=seed)
        if run.solved and run.plan is not None:
            rate = parallelism_rate(run.plan) if run.plan.steps else None
            outcomes.append(ProblemOutcome(
                problem=task.problem_name, solved=True,
                timesteps=run.plan.timesteps,
                total_atoms=run.plan.total_atoms,
                parallelism=rate, reason=run.reason))
        else:
            outcomes.append(ProblemOutcome(problem=task.problem_name,
                                           solved=False, reason=run.reason))
    return aggregate(outcomes, config)


# ---------------------------------------------------------------------------
# Breadth-first oracle
# ---------------------------------------------------------------------------

def bfs_solve(task: GroundTask, degree: int, depth_limit: int,
              conflict_set: ConflictSet | None = None,
              state_cap: int = DEFAULT_BFS_STATE_CAP) -> Optional[Plan]:
    """Shallowest plan in the degree-L action space, or None within the limit.

    Breadth-first over frozenset states with deterministic tie-breaking by
    action order; intended as an independent oracle on tiny instances.
    """
    if depth_limit < 0:
        raise ValueError("depth_limit must be >= 0")
    if conflict_set is None:
        conflict_set = build_conflict_set(task)
    init = task.init
    if is_goal(task, init):
        return Plan((), "bfs")

    parent: dict[State, tuple[State, tuple[int, ...]]] = {}
    depth: dict[State, int] = {init: 0}
    queue: deque[State] = deque([init])
    while queue:
        state = queue.popleft()
        if depth[state] >= depth_limit:
            continue
        for action in applicable_actions(task, state, degree, conflict_set):
            nxt = (state - action.delete) | action.add
            if nxt in depth:
                continue
            depth[nxt] = depth[state] + 1
            parent[nxt] = (state, action.atoms)
            if is_goal(task, nxt):
                steps: list[tuple[int, ...]] = []
                cur = nxt
                while cur != init:
                    prev, atoms = parent[cur]
                    steps.append(atoms)
                    cur = prev
                return Plan(tuple(reversed(steps)), "bfs")
            if len(depth) > state_cap:
                raise SearchMemoryError(len(depth), state_cap)
            queue.append(nxt)
    return None
