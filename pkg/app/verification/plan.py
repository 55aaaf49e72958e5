"""Verification plan DSL: suites composed in sequences and parallel branches."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union


@dataclass
class VerificationPlan:
    """Root statement plus SuiteConfig fields shared by every suite run."""
    root: Statement
    config: Dict[str, Any] = dataclasses.field(default_factory=dict)


@dataclass
class SuiteStatement:
    suite: SuiteInvocation


@dataclass
class SuiteInvocation:
    """
    One suite run.

    Attributes:
        name: Registered suite name
        systems: System references; empty means the systems of the config
        result: Optional key under which the workflow stores the records
    """
    name: str
    systems: List[str] = dataclasses.field(default_factory=list)
    result: Optional[str] = None


@dataclass
class SequenceStatement:
    sequence: Sequence


@dataclass
class Sequence:
    elements: List[Statement]


@dataclass
class ParallelStatement:
    parallel: Parallel


@dataclass
class Parallel:
    branches: List[Statement]


Statement = Union[SuiteStatement, SequenceStatement, ParallelStatement]


def plan_invocations(stmt: Statement) -> List[SuiteInvocation]:
    """Suite invocations of a statement tree in document order."""
    if isinstance(stmt, SuiteStatement):
        return [stmt.suite]
    if isinstance(stmt, SequenceStatement):
        return [inv for elem in stmt.sequence.elements for inv in plan_invocations(elem)]
    if isinstance(stmt, ParallelStatement):
        return [inv for branch in stmt.parallel.branches for inv in plan_invocations(branch)]
    raise TypeError(f"Unknown statement type: {type(stmt).__name__}")


def plan_for_suites(names: List[str], config: Optional[Dict[str, Any]] = None) -> VerificationPlan:
    """A plan running the named suites as independent parallel branches."""
    branches: List[Statement] = [SuiteStatement(suite=SuiteInvocation(name=name, result=name)) for name in sorted(names)]
    return VerificationPlan(root=ParallelStatement(parallel=Parallel(branches=branches)), config=dict(config or {}))
