"""Plan validation, metrics, the plan text format, and the BFS oracle."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metaplan import (EmptyPlanError, EnvConfig, FeatureConfig, Plan,
                      PlanParseError, ProblemOutcome, SearchMemoryError,
                      TrainConfig, aggregate, bfs_solve, init_params,
                      parallelism_rate, plan_from_text, plan_to_text,
                      run_policy, train, validate_plan)
from metaplan.evalkit import (CAUSE_CONFLICT, CAUSE_DEGREE,
                              CAUSE_INAPPLICABLE, CAUSE_GOAL)
from tests.conftest import (build_task, depots_task, logistics_task,
                            multiblocks_task)


@pytest.fixture(scope="module")
def tower_task(two_tower_task):
    return two_tower_task


def test_parallelism_rate_simple():
    plan = Plan(tuple([(0, 1)] * 3 + [(2,)] * 7))
    assert parallelism_rate(plan) == pytest.approx(0.3)


def test_parallelism_rate_sequential():
    plan = Plan(((0,), (1,), (2,)))
    assert parallelism_rate(plan) == 0.0


def test_parallelism_rate_empty_plan():
    with pytest.raises(EmptyPlanError):
        parallelism_rate(Plan(()))


def test_plan_rejects_empty_step():
    with pytest.raises(ValueError):
        Plan(((0,), ()))


def test_aggregate_empty():
    report = aggregate([])
    assert report.total == 0 and report.solved == 0
    assert report.coverage is None
    assert report.avg_timesteps is None
    assert report.mean_parallelism is None


def test_aggregate_solved_only_averages():
    outcomes = [
        ProblemOutcome("p1", True, timesteps=10, total_atoms=12,
                       parallelism=0.2),
        ProblemOutcome("p2", False),
        ProblemOutcome("p3", True, timesteps=20, total_atoms=25,
                       parallelism=0.4),
        ProblemOutcome("p4", False),
    ]
    report = aggregate(outcomes)
    assert report.solved == 2 and report.total == 4
    assert report.coverage == 0.5
    assert report.avg_timesteps == 15.0
    assert report.mean_parallelism == pytest.approx(0.3)
    data = report.to_json()
    assert data["schema_version"] == 1
    assert len(data["outcomes"]) == 4


# ---------------------------------------------------------------------------
# Plan text format
# ---------------------------------------------------------------------------

def test_plan_text_round_trip(blocks3_task):
    task = blocks3_task
    plan = bfs_solve(task, 1, 20)
    text = plan_to_text(task, plan)
    parsed = plan_from_text(task, text)
    assert parsed.steps == plan.steps
    assert plan_to_text(task, parsed) == text


def test_plan_text_parallel_round_trip(tower_task):
    plan = bfs_solve(tower_task, 2, 6)
    assert any(len(step) >= 2 for step in plan.steps)
    text = plan_to_text(tower_task, plan)
    assert plan_from_text(tower_task, text).steps == plan.steps


@given(st.integers(0, 6))
@settings(max_examples=20, deadline=None)
def test_plan_text_random_subplans(length):
    task = multiblocks_task(blocks=3, arms=1, seed=5)
    full = bfs_solve(task, 1, 20)
    plan = Plan(full.steps[:length]) if length <= full.timesteps else full
    if not plan.steps:
        assert plan_to_text(task, plan) == ""
        return
    assert plan_from_text(task, plan_to_text(task, plan)).steps == plan.steps


def test_plan_text_malformed_line(blocks3_task):
    with pytest.raises(PlanParseError, match="malformed"):
        plan_from_text(blocks3_task, "not a step\n")


def test_plan_text_bad_timestep(blocks3_task):
    plan = bfs_solve(blocks3_task, 1, 20)
    text = plan_to_text(blocks3_task, plan)
    broken = text.replace("0:", "4:", 1)
    with pytest.raises(PlanParseError, match="timestep"):
        plan_from_text(blocks3_task, broken)


def test_plan_text_unknown_operator(blocks3_task):
    with pytest.raises(PlanParseError, match="unknown operator"):
        plan_from_text(blocks3_task, "0: (teleport b1 b2)\n")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_oracle_plan_validates(blocks3_task):
    plan = bfs_solve(blocks3_task, 1, 20)
    assert validate_plan(blocks3_task, plan, 1).ok


def test_conflicting_pair_rejected(tower_task):
    task = tower_task
    a = task.operator_index["(pick-up arm1 a)"]
    b = task.operator_index["(pick-up arm1 b)"]  # same arm: interference
    plan = Plan((tuple(sorted((a, b))),))
    result = validate_plan(task, plan, 2)
    assert not result.ok
    assert result.step == 0
    assert result.cause == CAUSE_CONFLICT


def test_dropped_final_step_rejected(blocks3_task):
    plan = bfs_solve(blocks3_task, 1, 20)
    truncated = Plan(plan.steps[:-1])
    result = validate_plan(blocks3_task, truncated, 1)
    assert not result.ok
    assert result.cause == CAUSE_GOAL
    assert result.step == truncated.timesteps


def test_degree_exceeded_rejected(tower_task):
    task = tower_task
    a = task.operator_index["(pick-up arm1 a)"]
    b = task.operator_index["(pick-up arm2 b)"]
    plan = Plan((tuple(sorted((a, b))),))
    result = validate_plan(task, plan, 1)
    assert not result.ok
    assert result.cause == CAUSE_DEGREE


def test_inapplicable_step_rejected(blocks3_task):
    plan = bfs_solve(blocks3_task, 1, 20)
    swapped = list(plan.steps)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    result = validate_plan(blocks3_task, Plan(tuple(swapped)), 1)
    assert not result.ok
    assert result.cause == CAUSE_INAPPLICABLE
    assert result.step == 0


def test_empty_plan_valid_iff_goal_at_init(blocks3_task):
    result = validate_plan(blocks3_task, Plan(()), 1)
    assert not result.ok
    assert result.cause == CAUSE_GOAL


# ---------------------------------------------------------------------------
# BFS oracle
# ---------------------------------------------------------------------------

def test_bfs_trivial_goal():
    task = multiblocks_task(blocks=1, arms=1, seed=0)
    plan = bfs_solve(task, 1, 5)
    assert plan is not None and plan.timesteps == 0


def test_bfs_two_block_stack(two_block_task):
    plan = bfs_solve(two_block_task, 1, 10)
    assert plan.timesteps == 2  # pick-up a; stack a b
    names = [two_block_task.operators[step[0]].name for step in plan.steps]
    assert names == ["(pick-up arm1 a)", "(stack arm1 a b)"]


def test_bfs_respects_depth_limit(two_block_task):
    assert bfs_solve(two_block_task, 1, 1) is None
    assert bfs_solve(two_block_task, 1, 2) is not None


def test_bfs_memory_cap(blocks3_task):
    with pytest.raises(SearchMemoryError):
        bfs_solve(blocks3_task, 1, 20, state_cap=3)


def test_bfs_deterministic(blocks3_task):
    a = bfs_solve(blocks3_task, 1, 20)
    b = bfs_solve(blocks3_task, 1, 20)
    assert a.steps == b.steps


def test_bfs_optimal_against_exhaustive_enumeration(two_block_task):
    """Try every operator sequence up to length 3: none shorter than the
    BFS plan reaches the goal."""
    from itertools import product
    from metaplan import apply, is_applicable, is_goal
    task = two_block_task
    bfs_len = bfs_solve(task, 1, 10).timesteps
    shortest = None
    for length in range(0, 4):
        for seq in product(range(len(task.operators)), repeat=length):
            state = task.init
            ok = True
            for op in seq:
                if not is_applicable(task, state, op):
                    ok = False
                    break
                state = apply(task, state, op)
            if ok and is_goal(task, state):
                shortest = length
                break
        if shortest is not None:
            break
    assert shortest == bfs_len == 2


def test_makespan_monotone_in_degree():
    tasks = [multiblocks_task(blocks=3, arms=2, seed=s) for s in range(4)]
    tasks += [logistics_task(seed=s) for s in range(2)]
    tasks += [depots_task(seed=s) for s in range(2)]
    for task in tasks:
        seq = bfs_solve(task, 1, 25)
        par = bfs_solve(task, 2, 25)
        assert seq is not None and par is not None
        assert par.timesteps <= seq.timesteps
        assert validate_plan(task, seq, 1).ok
        assert validate_plan(task, par, 2).ok


def test_parallel_strictly_shorter_on_two_towers(tower_task):
    seq = bfs_solve(tower_task, 1, 10)
    par = bfs_solve(tower_task, 2, 10)
    assert seq.timesteps == 4
    assert par.timesteps == 2
    assert parallelism_rate(par) == 1.0


# ---------------------------------------------------------------------------
# Policy execution
# ---------------------------------------------------------------------------

def test_run_policy_goal_at_init():
    task = multiblocks_task(blocks=1, arms=1, seed=0)
    params = init_params(FeatureConfig(degree=1))
    run = run_policy(params, task, "greedy", EnvConfig(degree=1))
    assert run.solved
    assert run.plan.timesteps == 0


def test_run_policy_dead_end_init():
    task = build_task("""\
(define (domain stuck)
  (:requirements :strips)
  (:predicates (go) (win))
  (:action advance
    :parameters ()
    :precondition (and (go))
    :effect (and (win)))
)
""", "(define (problem p) (:domain stuck) (:init) (:goal (and (win))))")
    params = init_params(FeatureConfig(degree=1))
    run = run_policy(params, task, "greedy", EnvConfig(degree=1))
    assert not run.solved
    assert run.reason == "dead_end"
    assert run.plan is None


def test_run_policy_modes_and_seeding(blocks3_task):
    params = init_params(FeatureConfig(degree=1))
    cfg = EnvConfig(degree=1, max_steps=30)
    a = run_policy(params, blocks3_task, "sample", cfg, seed=3)
    b = run_policy(params, blocks3_task, "sample", cfg, seed=3)
    assert (a.solved, a.reason) == (b.solved, b.reason)
    if a.solved:
        assert a.plan.steps == b.plan.steps
    with pytest.raises(ValueError):
        run_policy(params, blocks3_task, "argmax", cfg)


def test_trained_policy_plan_validates(blocks3_task):
    env_cfg = EnvConfig(degree=1, max_steps=40)
    cfg = TrainConfig(iterations=40, episodes_per_iteration=16,
                      learning_rate=0.2, seed=0)
    result = train([blocks3_task], env_cfg, cfg)
    run = run_policy(result.params, blocks3_task, "greedy", env_cfg)
    assert run.solved
    assert validate_plan(blocks3_task, run.plan, 1).ok
    oracle = bfs_solve(blocks3_task, 1, 20)
    assert run.plan.timesteps >= oracle.timesteps
