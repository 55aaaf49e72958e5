"""
Verification controller: local verification runs and Temporal verification workflows.
"""
import asyncio
import logging
from datetime import datetime
from uuid import uuid4

from fastapi import APIRouter, HTTPException
from temporalio.client import WorkflowExecutionStatus

from app.models.api_models import (
    SuiteRunRequest,
    SuiteRunResponse,
    VerificationRunRequest,
    VerificationStartRequest,
    VerificationStartResponse,
    VerificationStatus,
)
from app.models.suite_models import SUITE_NAMES, SuiteConfig
from app.numerics.errors import OUKitError, describe_error
from app.temporal.client import get_task_queue, get_temporal_client
from app.temporal.verification_workflow import VerificationWorkflow
from app.verification.plan import VerificationPlan, plan_for_suites
from app.verification.plan_loader import get_default_plan_path, load_plan
from app.verification.runner import run_invocation, run_plan

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/verification")

STATUS_MAP = {
    WorkflowExecutionStatus.RUNNING: VerificationStatus.RUNNING,
    WorkflowExecutionStatus.COMPLETED: VerificationStatus.COMPLETED,
    WorkflowExecutionStatus.FAILED: VerificationStatus.FAILED,
    WorkflowExecutionStatus.CANCELED: VerificationStatus.CANCELLED,
    WorkflowExecutionStatus.TERMINATED: VerificationStatus.TERMINATED,
    WorkflowExecutionStatus.TIMED_OUT: VerificationStatus.FAILED,
}


def build_plan(config: dict, plan_name: str = None) -> VerificationPlan:
    """
    A bundled plan with `config` layered over its config block, or one
    parallel branch per selected suite when no plan is named.
    """
    if plan_name is None:
        suites = config.get("suites") or SUITE_NAMES
        return plan_for_suites(list(suites), config)
    plan = load_plan(get_default_plan_path(plan_name))
    plan.config = {**plan.config, **config}
    return plan


@router.post("/run")
async def run_verification_locally(request: VerificationRunRequest) -> dict:
    """
    Run a verification plan inside the API process and return the report.

    Returns:
        Dictionary with records, per-suite summaries and the exit code
    """
    try:
        plan = build_plan(request.config, request.plan)
        config = SuiteConfig.build(plan.config)
        report = await asyncio.to_thread(run_plan, plan, config)
    except FileNotFoundError as e:
        raise HTTPException(status_code=404, detail=f"Plan not found: {str(e)}")
    except OUKitError as e:
        raise HTTPException(status_code=422, detail=f"Invalid verification request: {describe_error(e)}")
    except Exception as e:
        logger.exception("Local verification run failed")
        raise HTTPException(status_code=500, detail=f"Verification run failed: {str(e)}")

    return {
        "records": [record.to_json_dict() for record in report.records],
        "summaries": [summary.model_dump() for summary in report.summaries],
        "exit_code": report.exit_code,
    }


@router.post("/suite", response_model=SuiteRunResponse)
async def run_single_suite(request: SuiteRunRequest) -> SuiteRunResponse:
    """
    Run one suite invocation. Called by the run_suite activity when the
    worker delegates suite execution to the API.
    """
    if request.name not in SUITE_NAMES:
        raise HTTPException(status_code=404, detail=f"Unknown suite '{request.name}'")
    try:
        config = SuiteConfig.build(request.config)
        records = await asyncio.to_thread(run_invocation, request.name, request.systems, config)
    except OUKitError as e:
        raise HTTPException(status_code=422, detail=f"Invalid suite request: {describe_error(e)}")
    except Exception as e:
        logger.exception(f"Suite {request.name} failed")
        raise HTTPException(status_code=500, detail=f"Suite {request.name} failed: {str(e)}")
    return SuiteRunResponse(name=request.name, records=[record.to_json_dict() for record in records])


@router.post("/start", response_model=VerificationStartResponse)
async def start_verification_workflow(request: VerificationStartRequest) -> VerificationStartResponse:
    """
    Start a VerificationWorkflow on Temporal for the bundled default plan.

    The workflow runs asynchronously; poll GET /verification/{workflow_id}.
    """
    try:
        plan = build_plan(request.config, "default_plan")
        SuiteConfig.build(plan.config)
    except OUKitError as e:
        raise HTTPException(status_code=422, detail=f"Invalid verification request: {describe_error(e)}")

    workflow_id = request.workflow_id or f"ou-verification-{uuid4()}"
    try:
        client = await get_temporal_client()
        handle = await client.start_workflow(
            VerificationWorkflow.run,
            plan,
            id=workflow_id,
            task_queue=request.task_queue or get_task_queue(),
        )
    except Exception as e:
        if "already" in str(e).lower():
            raise HTTPException(status_code=409, detail=f"Workflow {workflow_id} is already running")
        raise HTTPException(status_code=500, detail=f"Failed to start verification workflow: {str(e)}")

    logger.info(f"Started verification workflow {workflow_id}")
    return VerificationStartResponse(
        workflow_id=workflow_id,
        run_id=handle.result_run_id,
        status=VerificationStatus.RUNNING,
        started_at=datetime.now(),
    )


@router.get("/{workflow_id}", response_model=VerificationStartResponse)
async def get_verification_status(workflow_id: str) -> VerificationStartResponse:
    """
    Status of a verification workflow, with the report once it completed.
    """
    try:
        client = await get_temporal_client()
        handle = client.get_workflow_handle(workflow_id)
        description = await handle.describe()
    except Exception as e:
        if "not found" in str(e).lower():
            raise HTTPException(status_code=404, detail=f"Workflow {workflow_id} not found")
        raise HTTPException(status_code=500, detail=f"Failed to describe workflow: {str(e)}")

    status = STATUS_MAP.get(description.status, VerificationStatus.RUNNING)
    response = VerificationStartResponse(
        workflow_id=workflow_id,
        run_id=description.run_id,
        status=status,
        started_at=description.start_time,
    )
    if status == VerificationStatus.COMPLETED:
        response.result = await handle.result()
    elif status == VerificationStatus.FAILED:
        try:
            await handle.result()
        except Exception as e:
            response.error = str(e)
    return response


@router.post("/{workflow_id}/cancel")
async def cancel_verification_workflow(workflow_id: str) -> dict:
    try:
        client = await get_temporal_client()
        await client.get_workflow_handle(workflow_id).cancel()
    except Exception as e:
        if "not found" in str(e).lower():
            raise HTTPException(status_code=404, detail=f"Workflow {workflow_id} not found")
        raise HTTPException(status_code=500, detail=f"Failed to cancel workflow: {str(e)}")
    return {"workflow_id": workflow_id, "status": "cancel_requested"}
