"""
Tests for verification plan loading.
"""
import pytest

from app.models.suite_models import SUITE_NAMES
from app.numerics.errors import ConfigInvalid
from app.verification.plan import (
    ParallelStatement,
    SequenceStatement,
    SuiteStatement,
    plan_for_suites,
    plan_invocations,
)
from app.verification.plan_loader import get_default_plan_path, load_plan, parse_statement


def write_plan(tmp_path, text):
    path = tmp_path / "plan.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_default_plan_covers_every_suite():
    plan = load_plan(get_default_plan_path())
    assert isinstance(plan.root, SequenceStatement)
    names = [invocation.name for invocation in plan_invocations(plan.root)]
    assert sorted(names) == sorted(SUITE_NAMES)
    assert names[-1] == "resolvent"
    assert plan.config["systems"] == ["scalar_heat"]


def test_nested_plan(tmp_path):
    path = write_plan(
        tmp_path,
        """
config:
  tolerance: 0.01
root:
  sequence:
    elements:
      - suite: special
      - parallel:
          branches:
            - suite:
                name: riccati
                systems: [scalar_heat, diagonal_pair]
                result: riccati
            - suite:
                name: moments
""",
    )
    plan = load_plan(path)
    assert plan.config == {"tolerance": 0.01}
    first, second = plan.root.sequence.elements
    assert isinstance(first, SuiteStatement)
    assert first.suite.name == "special"
    assert first.suite.systems == []
    assert isinstance(second, ParallelStatement)
    riccati = second.parallel.branches[0].suite
    assert riccati.systems == ["scalar_heat", "diagonal_pair"]
    assert riccati.result == "riccati"
    assert [inv.name for inv in plan_invocations(plan.root)] == ["special", "riccati", "moments"]


@pytest.mark.parametrize(
    "text",
    [
        "root:\n  suite: fourier\n",
        "root:\n  loop: {}\n",
        "config: {}\n",
        "- suite: special\n",
        "root: [unclosed\n",
    ],
)
def test_invalid_plans(tmp_path, text):
    with pytest.raises(ConfigInvalid):
        load_plan(write_plan(tmp_path, text))


def test_missing_plan_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_plan(str(tmp_path / "absent.yaml"))


def test_statement_must_be_mapping():
    with pytest.raises(ConfigInvalid):
        parse_statement(["suite", "special"])


def test_plan_for_suites():
    plan = plan_for_suites(["riccati", "bounds"], {"seed": 3})
    assert [inv.name for inv in plan_invocations(plan.root)] == ["bounds", "riccati"]
    assert plan.config == {"seed": 3}
