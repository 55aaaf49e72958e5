"""YAML loader for verification plans."""
import os
from pathlib import Path
from typing import Any, Dict, Union

import yaml

from app.models.suite_models import SUITE_NAMES
from app.numerics.errors import ConfigInvalid
from app.verification.plan import (
    Parallel,
    ParallelStatement,
    Sequence,
    SequenceStatement,
    SuiteInvocation,
    SuiteStatement,
    VerificationPlan,
)


def load_yaml_file(yaml_path: str) -> Dict[str, Any]:
    if not os.path.exists(yaml_path):
        raise FileNotFoundError(f"YAML file not found: {yaml_path}")

    with open(yaml_path, "r", encoding="utf-8") as f:
        try:
            contents = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"Cannot parse plan {yaml_path}: {exc}") from exc
    if not isinstance(contents, dict):
        raise ConfigInvalid(f"Plan {yaml_path} must hold a mapping")
    return contents


def parse_statement(stmt_dict: Dict[str, Any]) -> Union[SuiteStatement, SequenceStatement, ParallelStatement]:
    """
    Parse a statement dictionary into a Statement object.

    Raises:
        ConfigInvalid: Unknown statement type or suite name
    """
    if not isinstance(stmt_dict, dict):
        raise ConfigInvalid(f"Statement must be a mapping, got {stmt_dict!r}")
    if "suite" in stmt_dict:
        return parse_suite_statement(stmt_dict)
    elif "sequence" in stmt_dict:
        return parse_sequence_statement(stmt_dict)
    elif "parallel" in stmt_dict:
        return parse_parallel_statement(stmt_dict)
    else:
        raise ConfigInvalid(f"Unknown statement type: {stmt_dict}")


def parse_suite_statement(stmt_dict: Dict[str, Any]) -> SuiteStatement:
    suite_dict = stmt_dict["suite"]
    # Shorthand: "- suite: kernel"
    if isinstance(suite_dict, str):
        suite_dict = {"name": suite_dict}

    name = suite_dict.get("name")
    if name not in SUITE_NAMES:
        raise ConfigInvalid(f"Unknown suite '{name}', expected one of {SUITE_NAMES}")

    systems = suite_dict.get("systems", [])
    if systems is None:
        systems = []

    invocation = SuiteInvocation(
        name=name,
        systems=list(systems),
        result=suite_dict.get("result"),
    )
    return SuiteStatement(suite=invocation)


def parse_sequence_statement(stmt_dict: Dict[str, Any]) -> SequenceStatement:
    sequence_dict = stmt_dict["sequence"]
    elements = [parse_statement(elem) for elem in sequence_dict["elements"]]
    return SequenceStatement(sequence=Sequence(elements=elements))


def parse_parallel_statement(stmt_dict: Dict[str, Any]) -> ParallelStatement:
    parallel_dict = stmt_dict["parallel"]
    branches = [parse_statement(branch) for branch in parallel_dict["branches"]]
    return ParallelStatement(parallel=Parallel(branches=branches))


def load_plan(yaml_path: str) -> VerificationPlan:
    """
    Load a verification plan from a YAML file.

    The optional `config` mapping holds SuiteConfig fields; `root` holds the
    statement tree.
    """
    plan_dict = load_yaml_file(yaml_path)
    config = plan_dict.get("config", {}) or {}
    if "root" not in plan_dict:
        raise ConfigInvalid(f"Plan {yaml_path} has no root statement")
    return VerificationPlan(root=parse_statement(plan_dict["root"]), config=config)


def get_default_plan_path(plan_name: str = "default_plan") -> str:
    return str(Path(__file__).parent / f"{plan_name}.yaml")
