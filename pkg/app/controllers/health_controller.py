from datetime import datetime
from typing import Dict, Any
from fastapi import APIRouter
import platform

import numpy
import scipy

from app.models.suite_models import SUITE_NAMES, bundled_systems
from app.verification.plan_loader import get_default_plan_path, load_plan

router = APIRouter()

SERVICE_NAME = "ou-kernel-kit"
VERSION = "0.1.0"


@router.get("/health")
async def health_check() -> Dict[str, Any]:
    """
    Basic health check endpoint to verify the service is running.
    """
    return {
        "status": "healthy",
        "timestamp": datetime.now().isoformat(),
        "service": SERVICE_NAME,
    }


@router.get("/status")
async def system_status() -> Dict[str, Any]:
    """
    Runtime information, including the numerical stack and the bundled
    suites and systems.
    """
    return {
        "service": SERVICE_NAME,
        "status": "running",
        "version": VERSION,
        "timestamp": datetime.now().isoformat(),
        "system": {
            "platform": platform.system(),
            "python_version": platform.python_version(),
            "machine": platform.machine(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "suites": SUITE_NAMES,
        "systems": bundled_systems(),
    }


@router.get("/ready")
async def readiness_check() -> Dict[str, Any]:
    """
    Ready once the bundled verification plan parses and systems are present.
    """
    checks = {"systems": bool(bundled_systems())}
    try:
        load_plan(get_default_plan_path())
        checks["default_plan"] = True
    except Exception:
        checks["default_plan"] = False

    return {
        "ready": all(checks.values()),
        "checks": checks,
        "timestamp": datetime.now().isoformat(),
    }


@router.get("/live")
async def liveness_check() -> Dict[str, Any]:
    return {
        "alive": True,
        "timestamp": datetime.now().isoformat(),
    }
