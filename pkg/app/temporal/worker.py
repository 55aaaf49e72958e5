"""Temporal worker that executes verification workflows and suite activities."""
import asyncio
import logging
import os

from temporalio.worker import Worker
from dotenv import load_dotenv

from app.temporal.activities import SUITE_EXECUTION, run_suite_activity
from app.temporal.client import get_task_queue, get_temporal_client
from app.temporal.verification_workflow import VerificationWorkflow

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


async def run_worker():
    """
    Start the Temporal worker that listens for workflow and activity tasks.
    """
    task_queue = get_task_queue()

    logger.info(f"Connecting to Temporal server at {os.getenv('TEMPORAL_HOST', 'localhost:7233')}")
    client = await get_temporal_client()
    logger.info("Connected to Temporal server successfully")

    # Suites are CPU bound and run in threads; cap concurrent activities
    max_activities = int(os.getenv("OU_KIT_THREADS", str(os.cpu_count() or 1)))
    worker = Worker(
        client,
        task_queue=task_queue,
        workflows=[VerificationWorkflow],
        activities=[run_suite_activity],
        max_concurrent_activities=max_activities,
    )

    logger.info(f"Worker started and listening on task queue: {task_queue}")
    logger.info("Registered workflows: VerificationWorkflow")
    logger.info(f"Registered activities: run_suite (execution: {SUITE_EXECUTION})")

    await worker.run()


if __name__ == "__main__":
    logging.basicConfig(level=os.getenv("OU_KIT_LOG_LEVEL", "INFO").upper())
    asyncio.run(run_worker())
