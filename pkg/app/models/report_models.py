from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class VerificationRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    property: str = Field(..., description="Name of the property checked")
    anchor: str = Field(default="", description="Statement the property is traced to")
    system: str = Field(default="", description="Name of the system under test")
    measured: Optional[float] = None
    bound: Optional[float] = None
    tolerance: float = 0.0
    passed: bool = Field(default=False, alias="pass")
    est_error: Optional[float] = None
    runtime_ms: float = 0.0
    detail: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, mode="json")


class SuiteSummary(BaseModel):
    suite: str
    total: int
    passed: int
    failed: int
    runtime_ms: float


class VerificationReport(BaseModel):
    records: list[VerificationRecord]
    summaries: list[SuiteSummary]
    exit_code: int
