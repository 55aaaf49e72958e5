"""Local execution of verification plans on a thread pool."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from dotenv import load_dotenv

from app.models.report_models import SuiteSummary, VerificationRecord, VerificationReport
from app.models.suite_models import SuiteConfig
from app.numerics.errors import ConfigInvalid
from app.verification.plan import (
    SuiteInvocation,
    SuiteStatement,
    VerificationPlan,
    plan_for_suites,
    plan_invocations,
)
from app.verification.suites import SUITES, run_suite

load_dotenv()

logger = logging.getLogger(__name__)

Job = Tuple[str, Optional[str]]


def thread_cap(config: SuiteConfig) -> int:
    """Worker count: config.threads (or the CPU count), capped by OU_KIT_THREADS."""
    threads = config.threads or os.cpu_count() or 1
    raw = os.getenv("OU_KIT_THREADS")
    if raw:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ConfigInvalid(f"OU_KIT_THREADS must be an integer, got '{raw}'") from exc
        if cap < 1:
            raise ConfigInvalid(f"OU_KIT_THREADS must be at least 1, got {cap}")
        threads = min(threads, cap)
    return threads


def plan_jobs(plan: VerificationPlan, config: SuiteConfig) -> List[Job]:
    """
    (suite, system) pairs of a plan restricted to config.suites, without
    duplicates. System-independent suites get a single job with system None.
    """
    jobs: List[Job] = []
    for invocation in plan_invocations(plan.root):
        if invocation.name not in config.suites:
            continue
        if SUITES[invocation.name].per_system:
            candidates = [(invocation.name, ref) for ref in (invocation.systems or config.systems)]
        else:
            candidates = [(invocation.name, None)]
        jobs.extend(job for job in candidates if job not in jobs)
    return jobs


def run_invocation(name: str, systems: List[str], config: SuiteConfig) -> List[VerificationRecord]:
    """Records of one suite invocation, run sequentially over its systems."""
    plan = VerificationPlan(root=SuiteStatement(suite=SuiteInvocation(name=name, systems=list(systems))))
    return [record for job in plan_jobs(plan, config) for record in run_suite(job[0], job[1], config)]


def assemble_report(jobs: List[Job], results: List[List[VerificationRecord]]) -> VerificationReport:
    """Records ordered by suite name, then by job order; exit code 0 iff nothing failed."""
    order = sorted(range(len(jobs)), key=lambda k: (jobs[k][0], k))
    records: List[VerificationRecord] = []
    summaries: List[SuiteSummary] = []
    for k in order:
        records.extend(results[k])
    for name in sorted({job[0] for job in jobs}):
        selected = [r for k in order if jobs[k][0] == name for r in results[k]]
        passed = sum(1 for r in selected if r.passed)
        summaries.append(
            SuiteSummary(
                suite=name,
                total=len(selected),
                passed=passed,
                failed=len(selected) - passed,
                runtime_ms=sum(r.runtime_ms for r in selected),
            )
        )
    exit_code = 0 if all(r.passed for r in records) else 1
    return VerificationReport(records=records, summaries=summaries, exit_code=exit_code)


def run_plan(plan: VerificationPlan, config: Optional[SuiteConfig] = None) -> VerificationReport:
    """
    Run every suite of the plan locally.

    Suites are independent, so the local runner executes all jobs on one pool
    regardless of sequence/parallel nesting; report assembly is ordered.
    """
    config = config or SuiteConfig.build(plan.config)
    jobs = plan_jobs(plan, config)
    workers = thread_cap(config)
    logger.info(f"Running {len(jobs)} suite jobs on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda job: run_suite(job[0], job[1], config), jobs))
    report = assemble_report(jobs, results)
    failed = sum(s.failed for s in report.summaries)
    logger.info(f"Verification finished: {len(report.records)} records, {failed} failed")
    return report


def run_verification(config: SuiteConfig) -> VerificationReport:
    return run_plan(plan_for_suites(config.suites, config.model_dump()), config)
