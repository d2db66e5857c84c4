"""Backtracking nondeterministic evaluation: choice points, failure, exhaustive collection.

A computation is an ordinary zero-argument callable.  Inside a running
enumeration it may call :func:`choose` to fork on a sequence of alternatives,
:func:`fail` to abandon the current branch, or :func:`either` to defer between
two sub-computations.  :func:`all_values` drives the computation depth-first
over every combination of choices and collects one value per surviving branch.

The engine replays the computation from scratch once per branch, steering each
replay along a recorded decision path.  Computations therefore must be
replay-stable: the same choices in, the same alternatives out.  Side effects
that survive across branches break enumeration and are guarded against where
cheap (alternative-count mismatch on replay raises).

Enumerations nest: an inner all_values runs on its own engine frame and
completes before the outer branch continues.  Distinct enumerations are
independent; the engine stack is thread-local.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence


class EngineUsageError(Exception):
    """choose/fail/either called outside a running enumeration, or a replay diverged."""


class _BranchFailed(BaseException):
    # BaseException so user-level `except Exception` blocks cannot swallow a
    # backtrack in flight.
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    """Optional caps on an enumeration.  None means unlimited.

    Exceeding a cap ends the enumeration with ``truncated=True``; it is never
    an error and never silent.
    """

    max_results: int | None = None
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if self.max_results is not None and self.max_results < 1:
            raise ValueError("max_results must be positive or None")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive or None")


UNLIMITED = EnumerationBudget()


@dataclass
class EnumerationResult:
    """Values collected by all_values, in branch order, plus truncation state."""

    values: list
    truncated: bool
    steps: int

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class _ChoicePoint:
    n_alternatives: int
    index: int = 0


class _Engine:
    def __init__(self, budget: EnumerationBudget) -> None:
        self.budget = budget
        self.path: list[_ChoicePoint] = []
        self.depth = 0  # replay cursor into self.path
        self.steps = 0
        self.out_of_steps = False

    def choose(self, alternatives: Sequence) -> Any:
        self.steps += 1
        if self.budget.max_steps is not None and self.steps > self.budget.max_steps:
            self.out_of_steps = True
            raise _BranchFailed()
        if self.depth < len(self.path):
            point = self.path[self.depth]
            if point.n_alternatives != len(alternatives):
                raise EngineUsageError(
                    "computation is not replay-stable: choice point %d offered %d "
                    "alternatives, previously %d"
                    % (self.depth, len(alternatives), point.n_alternatives)
                )
        else:
            point = _ChoicePoint(n_alternatives=len(alternatives))
            self.path.append(point)
        self.depth += 1
        if point.index >= len(alternatives):
            raise _BranchFailed()
        return alternatives[point.index]

    def advance(self) -> bool:
        """Step the decision path to the next unexplored branch (LIFO).

        Returns False when the whole tree is exhausted.
        """
        while self.path:
            last = self.path[-1]
            if last.index + 1 < last.n_alternatives:
                last.index += 1
                return True
            self.path.pop()
        return False

    def has_unexplored(self) -> bool:
        return any(p.index + 1 < p.n_alternatives for p in self.path)


_local = threading.local()


def _stack() -> list[_Engine]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def _current() -> _Engine:
    stack = _stack()
    if not stack:
        raise EngineUsageError("no enumeration is running; wrap the call in all_values")
    return stack[-1]


def choose(alternatives: Iterable) -> Any:
    """Yield each alternative in order across backtracks.  Empty means fail."""
    return _current().choose(tuple(alternatives))


def fail() -> Any:
    """Abandon the current branch; resume at the most recent open choice point."""
    return _current().choose(())


def either(this: Callable[[], Any], that: Callable[[], Any]) -> Any:
    """Try ``this`` first, then ``that``, across backtracks.

    Both arguments are deferred computations (thunks); the untaken branch is
    never evaluated within a given branch of the enumeration.
    """
    return choose((this, that))()


def all_values(computation: Callable[[], Any], budget: EnumerationBudget | None = None) -> EnumerationResult:
    """Run ``computation`` once per branch, depth-first, collecting the values.

    Deterministic: the same computation enumerates the same sequence on every
    run.  Budget exhaustion stops early and flags ``truncated``.
    """
    budget = budget or UNLIMITED
    engine = _Engine(budget)
    stack = _stack()
    results: list = []
    truncated = False
    dead = object()  # sentinel: branch died
    while True:
        engine.depth = 0
        stack.append(engine)
        try:
            value = computation()
        except _BranchFailed:
            value = dead
        finally:
            stack.pop()
        if value is not dead:
            results.append(value)
        if engine.out_of_steps:
            truncated = True
            break
        if budget.max_results is not None and len(results) >= budget.max_results:
            truncated = engine.has_unexplored()
            break
        if not engine.advance():
            break
    return EnumerationResult(values=results, truncated=truncated, steps=engine.steps)
