"""Temporal activities for verification runs."""
import asyncio
import os
from typing import Any, Dict, List

import httpx
from temporalio import activity
from dotenv import load_dotenv

from app.models.suite_models import SuiteConfig
from app.verification.runner import run_invocation

# Load environment variables
load_dotenv()

# "local" runs suites inside the worker, "api" delegates them to the service
SUITE_EXECUTION = os.getenv("OU_KIT_SUITE_EXECUTION", "local")
API_BASE_URL = os.getenv("API_BASE_URL", "http://localhost:8000")
API_TIMEOUT = float(os.getenv("OU_KIT_API_TIMEOUT", "600"))


@activity.defn(name="run_suite")
async def run_suite_activity(
    name: str,
    systems: List[str],
    config: Dict[str, Any],
) -> List[Dict[str, Any]]:
    """
    Run one suite invocation and return its verification records.

    Args:
        name: Registered suite name
        systems: System references; empty means the systems of the config
        config: SuiteConfig fields

    Returns:
        Record dictionaries in report form ("pass" key)
    """
    info = activity.info()
    activity.logger.info(
        f"Activity Execution Details - "
        f"Activity ID: {info.activity_id}, "
        f"Activity Type: {info.activity_type}, "
        f"Workflow ID: {info.workflow_id}, "
        f"Attempt: {info.attempt}"
    )
    activity.logger.info(f"Running suite {name} on {systems or 'configured systems'} ({SUITE_EXECUTION})")

    if SUITE_EXECUTION == "api":
        return await _run_suite_remote(name, systems, config)

    suite_config = SuiteConfig.build(config)
    records = await asyncio.to_thread(run_invocation, name, systems, suite_config)
    failed = sum(1 for record in records if not record.passed)
    activity.logger.info(f"Suite {name} finished: {len(records)} records, {failed} failed")
    return [record.to_json_dict() for record in records]


async def _run_suite_remote(name: str, systems: List[str], config: Dict[str, Any]) -> List[Dict[str, Any]]:
    url = f"{API_BASE_URL}/api/v1/verification/suite"
    payload = {"name": name, "systems": systems, "config": config}

    async with httpx.AsyncClient() as client:
        try:
            response = await client.post(url, json=payload, timeout=API_TIMEOUT)
            response.raise_for_status()
            data = response.json()
            activity.logger.info(f"Suite {name} returned {len(data.get('records', []))} records")
            return data.get("records", [])

        except httpx.HTTPError as e:
            activity.logger.error(f"HTTP error occurred: {e}")
            raise
        except Exception as e:
            activity.logger.error(f"Error calling suite endpoint: {e}")
            raise
