from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from app.numerics.errors import ConfigInvalid
from app.numerics.grid import GridSpec

SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "verification" / "systems"

SUITE_NAMES = [
    "bounds",
    "chapman",
    "continuity",
    "dirac",
    "greens",
    "kernel",
    "moments",
    "resolvent",
    "riccati",
    "semigroup",
    "special",
    "weights",
]


def bundled_systems() -> List[str]:
    return sorted(path.stem for path in SYSTEMS_DIR.glob("*.json"))


def resolve_system(reference: str) -> Path:
    """A bundled system name or a path to a system JSON document."""
    candidate = Path(reference)
    if candidate.is_file():
        return candidate
    bundled = SYSTEMS_DIR / f"{reference}.json"
    if bundled.is_file():
        return bundled
    raise ValueError(f"System '{reference}' is neither a file nor one of {bundled_systems()}")


class WeightSpec(BaseModel):
    kind: str = Field(default="unit", description="exp_abs, cosh_abs, exp_smooth, cosh_smooth or unit")
    mu: float = 0.0

    @field_validator("kind")
    @classmethod
    def check_kind(cls, kind: str) -> str:
        allowed = {"exp_abs", "cosh_abs", "exp_smooth", "cosh_smooth", "unit"}
        if kind not in allowed:
            raise ValueError(f"Unknown weight kind '{kind}', expected one of {sorted(allowed)}")
        return kind


class SuiteConfig(BaseModel):
    systems: List[str] = Field(default_factory=lambda: ["scalar_heat"], description="System files or bundled names")
    suites: List[str] = Field(default_factory=lambda: list(SUITE_NAMES))
    grid: str = Field(default="-5:5:41", description="Grid spec min:max:count[,...]")
    t_grid: List[float] = Field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0])
    lambda_offsets: List[List[float]] = Field(
        default_factory=lambda: [[0.5, 0.0], [1.0, 1.0], [2.0, -1.0]],
        description="[re, im] offsets of lambda above omega",
    )
    weights: List[WeightSpec] = Field(
        default_factory=lambda: [
            WeightSpec(kind="unit"),
            WeightSpec(kind="cosh_abs", mu=0.3),
            WeightSpec(kind="exp_smooth", mu=0.3),
        ]
    )
    p_values: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    tolerance: float = Field(default=1e-3, gt=0.0, description="Relative slack of inequality checks")
    quad_tol: float = Field(default=1e-8, gt=0.0, description="Target tolerance of spatial quadrature")
    epsilon: float = Field(default=0.1, gt=0.0)
    vartheta: float = Field(default=0.5, gt=0.0, lt=1.0)
    out: str = Field(default="reports")
    seed: int = Field(default=0, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator("systems")
    @classmethod
    def check_systems(cls, systems: List[str]) -> List[str]:
        if not systems:
            raise ValueError("At least one system is required")
        for reference in systems:
            resolve_system(reference)
        return systems

    @field_validator("suites")
    @classmethod
    def check_suites(cls, suites: List[str]) -> List[str]:
        unknown = [name for name in suites if name not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"Unknown suites {unknown}, expected names from {SUITE_NAMES}")
        return suites

    @field_validator("grid")
    @classmethod
    def check_grid(cls, grid: str) -> str:
        GridSpec.parse(grid)
        return grid

    @field_validator("t_grid", "p_values")
    @classmethod
    def check_positive(cls, values: List[float]) -> List[float]:
        if any(value <= 0.0 for value in values):
            raise ValueError(f"Values must be positive, got {values}")
        return values

    @field_validator("lambda_offsets")
    @classmethod
    def check_offsets(cls, offsets: List[List[float]]) -> List[List[float]]:
        for pair in offsets:
            if len(pair) != 2 or pair[0] <= 0.0:
                raise ValueError(f"lambda offsets must be [re > 0, im] pairs, got {pair}")
        return offsets

    def grid_spec(self, d: int) -> GridSpec:
        return GridSpec.parse(self.grid).with_dimension(d)

    @classmethod
    def build(cls, values: Dict[str, Any], config_path: Optional[str] = None) -> "SuiteConfig":
        """
        Validate flag values, with a YAML config file overriding them.

        Raises:
            ConfigInvalid: The file is unreadable or a value fails validation
        """
        merged = {key: value for key, value in values.items() if value is not None}
        if config_path:
            try:
                with open(config_path, encoding="utf-8") as handle:
                    overrides = yaml.safe_load(handle) or {}
            except (OSError, yaml.YAMLError) as exc:
                raise ConfigInvalid(f"Cannot read config {config_path}: {exc}") from exc
            if not isinstance(overrides, dict):
                raise ConfigInvalid(f"Config {config_path} must hold a mapping")
            merged.update(overrides)
        try:
            return cls.model_validate(merged)
        except ValidationError as exc:
            raise ConfigInvalid(str(exc)) from exc
