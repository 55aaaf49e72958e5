"""Verification workflow - interprets a verification plan on Temporal."""
from __future__ import annotations

import asyncio
from datetime import timedelta
from typing import Any, Dict, List

from temporalio import workflow
from temporalio.common import RetryPolicy

with workflow.unsafe.imports_passed_through():
    from app.models.report_models import VerificationRecord
    from app.models.suite_models import SUITE_NAMES
    from app.verification.plan import (
        ParallelStatement,
        SequenceStatement,
        Statement,
        SuiteStatement,
        VerificationPlan,
    )
    from app.verification.runner import assemble_report

SUITE_TIMEOUT = timedelta(minutes=30)
MAX_ATTEMPTS = 2


@workflow.defn(name="VerificationWorkflow")
class VerificationWorkflow:
    """
    Runs the suites of a verification plan as activities.

    Sequences run in order, parallel branches concurrently. Each suite
    invocation is one `run_suite` activity; the records of all invocations are
    assembled into a report in the same order as the local runner.
    """

    @workflow.run
    async def run(self, plan: VerificationPlan) -> Dict[str, Any]:
        self.config = dict(plan.config)
        self.selected = set(self.config.get("suites") or SUITE_NAMES)
        self.jobs: List[tuple] = []
        self.results: List[List[Dict[str, Any]]] = []
        self.variables: Dict[str, Any] = {}

        info = workflow.info()
        workflow.logger.info(
            f"Starting verification workflow - "
            f"Workflow ID: {info.workflow_id}, "
            f"Run ID: {info.run_id}"
        )

        await self.execute_statement(plan.root)

        report = assemble_report(
            self.jobs,
            [[VerificationRecord.model_validate(raw) for raw in batch] for batch in self.results],
        )
        workflow.logger.info(
            f"Verification workflow completed - "
            f"Workflow ID: {info.workflow_id}, "
            f"records: {len(report.records)}, exit code: {report.exit_code}"
        )
        return {
            "records": [record.to_json_dict() for record in report.records],
            "summaries": [summary.model_dump() for summary in report.summaries],
            "exit_code": report.exit_code,
            "results": self.variables,
        }

    async def execute_statement(self, stmt: Statement) -> None:
        if isinstance(stmt, SuiteStatement):
            await self.execute_suite(stmt)
        elif isinstance(stmt, SequenceStatement):
            await self.execute_sequence(stmt)
        elif isinstance(stmt, ParallelStatement):
            await self.execute_parallel(stmt)

    async def execute_suite(self, stmt: SuiteStatement) -> None:
        invocation = stmt.suite
        if invocation.name not in self.selected:
            workflow.logger.info(f"Skipping suite {invocation.name}: not selected")
            return

        # Reserve the slot before awaiting so report order follows the plan
        slot = len(self.jobs)
        self.jobs.append((invocation.name, None))
        self.results.append([])

        workflow.logger.info(f"Executing suite: {invocation.name}")
        records = await workflow.execute_activity(
            "run_suite",
            args=[invocation.name, list(invocation.systems), self.config],
            start_to_close_timeout=SUITE_TIMEOUT,
            retry_policy=RetryPolicy(maximum_attempts=MAX_ATTEMPTS),
        )
        self.results[slot] = records

        failed = sum(1 for raw in records if not raw.get("pass"))
        workflow.logger.info(f"Suite completed: {invocation.name} - {len(records)} records, {failed} failed")
        if invocation.result:
            self.variables[invocation.result] = {"records": len(records), "failed": failed}

    async def execute_sequence(self, stmt: SequenceStatement) -> None:
        workflow.logger.info(f"Executing sequence with {len(stmt.sequence.elements)} elements")
        for i, elem in enumerate(stmt.sequence.elements, 1):
            workflow.logger.info(f"Executing sequence element {i}/{len(stmt.sequence.elements)}")
            await self.execute_statement(elem)

    async def execute_parallel(self, stmt: ParallelStatement) -> None:
        workflow.logger.info(f"Executing {len(stmt.parallel.branches)} branches in parallel")
        await asyncio.gather(*(self.execute_statement(branch) for branch in stmt.parallel.branches))
        workflow.logger.info("All parallel branches completed")
