#!/usr/bin/env python3
"""
Temporal Worker Startup Script

Starts the worker that runs VerificationWorkflow and the run_suite activity.
Make sure Temporal server is running at the configured host before starting the worker.

Usage:
    python run_worker.py
"""
import asyncio
import logging
import os

from app.temporal.worker import run_worker


def main():
    """
    Start the Temporal worker.
    """
    logging.basicConfig(level=os.getenv("OU_KIT_LOG_LEVEL", "INFO").upper())
    print("=" * 60)
    print("Starting OU verification worker")
    print("=" * 60)
    print()

    try:
        asyncio.run(run_worker())
    except KeyboardInterrupt:
        print("\n\nWorker stopped by user.")
    except Exception as e:
        print(f"\n\nError running worker: {e}")
        raise


if __name__ == "__main__":
    main()
