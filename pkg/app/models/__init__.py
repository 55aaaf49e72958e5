from .api_models import (
    BoundsRequest,
    BoundsResponse,
    KernelRequest,
    KernelResponse,
    OmegaRequest,
    OmegaResponse,
    SuiteRunRequest,
    SuiteRunResponse,
    VerificationRunRequest,
    VerificationStartRequest,
    VerificationStartResponse,
    VerificationStatus,
)
from .report_models import SuiteSummary, VerificationRecord, VerificationReport
from .suite_models import SuiteConfig, WeightSpec
from .system_models import SpectralResponse, SystemDocument

__all__ = [
    "BoundsRequest",
    "BoundsResponse",
    "KernelRequest",
    "KernelResponse",
    "OmegaRequest",
    "OmegaResponse",
    "SpectralResponse",
    "SuiteConfig",
    "SuiteRunRequest",
    "SuiteRunResponse",
    "SuiteSummary",
    "SystemDocument",
    "VerificationRecord",
    "VerificationReport",
    "VerificationRunRequest",
    "VerificationStartRequest",
    "VerificationStartResponse",
    "VerificationStatus",
    "WeightSpec",
]
