from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.models.system_models import SystemDocument


class VerificationStatus(str, Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"
    TERMINATED = "terminated"


class KernelRequest(BaseModel):
    system: SystemDocument
    t: float = Field(..., gt=0.0, description="Time, strictly positive")
    x: List[float] = Field(..., description="Source point")
    xi: List[float] = Field(..., description="Target point")


class KernelResponse(BaseModel):
    system: str
    t: float
    matrix: List[List[List[float]]] = Field(..., description="H(x, xi, t) as rows of [re, im] pairs")


class BoundsRequest(BaseModel):
    system: SystemDocument
    t: List[float] = Field(default_factory=lambda: [0.1, 1.0, 10.0])
    eta: float = Field(default=0.0, ge=0.0, description="Growth rate of the weight")
    p: float = Field(default=1.0, ge=1.0)
    C_theta: float = Field(default=1.0, ge=1.0)
    vartheta: float = Field(default=0.5, gt=0.0, lt=1.0)


class BoundsResponse(BaseModel):
    columns: List[str]
    rows: List[List[float]]
    C7: float
    C8: float


class OmegaRequest(BaseModel):
    system: SystemDocument
    mode: str = Field(default="lp_weighted", description="lp_weighted or cb_unweighted")
    eta: float = Field(default=0.0, ge=0.0)
    p: float = Field(default=1.0, ge=1.0)
    C_theta: float = Field(default=1.0, ge=1.0)
    epsilon: float = Field(default=0.1, gt=0.0)


class OmegaResponse(BaseModel):
    omega: float
    M: float
    C_star: float


class VerificationStartRequest(BaseModel):
    config: Dict[str, Any] = Field(default_factory=dict, description="SuiteConfig fields")
    workflow_id: Optional[str] = Field(default=None, description="Defaults to a generated id")
    task_queue: Optional[str] = Field(default=None, description="Defaults to TEMPORAL_TASK_QUEUE")


class VerificationStartResponse(BaseModel):
    workflow_id: str
    run_id: Optional[str] = None
    status: VerificationStatus
    started_at: datetime
    result: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


class VerificationRunRequest(BaseModel):
    config: Dict[str, Any] = Field(default_factory=dict, description="SuiteConfig fields")
    plan: Optional[str] = Field(default=None, description="Bundled plan name; defaults to one branch per suite")


class SuiteRunRequest(BaseModel):
    name: str = Field(..., description="Registered suite name")
    systems: List[str] = Field(default_factory=list, description="Empty means the systems of the config")
    config: Dict[str, Any] = Field(default_factory=dict)


class SuiteRunResponse(BaseModel):
    name: str
    records: List[Dict[str, Any]]
