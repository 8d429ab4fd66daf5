"""STRIPS state semantics: applicability, successor computation, goal test.

States are immutable frozensets of fact indices, so all functions here are
pure and safe to call concurrently.
"""

from __future__ import annotations

from .grounding import GroundTask

State = frozenset[int]


class InapplicableError(Exception):
    """An operator or action was applied in a state it is not applicable in."""


def is_applicable(task: GroundTask, state: State, op_id: int) -> bool:
    """True iff the operator's preconditions are all present in ``state``."""
    return task.operators[op_id].pre <= state


def apply(task: GroundTask, state: State, op_id: int,
          strict: bool = True) -> State:
    """Successor state (state \\ delete) | add.

    Strict mode (the default) raises :class:`InapplicableError` when the
    operator's preconditions do not hold; the permissive mode exists for the
    validator's diagnostic path only.
    """
    op = task.operators[op_id]
    if strict and not op.pre <= state:
        missing = sorted(op.pre - state)
        raise InapplicableError(
            f"{op.name} inapplicable: missing "
            + ", ".join(task.fact_str(i) for i in missing))
    return (state - op.delete) | op.add


def is_goal(task: GroundTask, state: State) -> bool:
    """True iff every goal fact is present in ``state``."""
    return task.goal <= state
