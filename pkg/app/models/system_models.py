import json
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from app.numerics.linalg import OUSystem, validate_system

# A complex entry is a real number or an [re, im] pair
ComplexEntry = Union[float, List[float]]


def _to_complex(rows: List[List[ComplexEntry]]) -> np.ndarray:
    def entry(value: ComplexEntry) -> complex:
        if isinstance(value, list):
            return complex(value[0], value[1])
        return complex(value)

    return np.array([[entry(v) for v in row] for row in rows], dtype=complex)


def _to_pairs(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix, dtype=complex)]


class SystemDocument(BaseModel):
    name: str = Field(default="system", description="Label used in logs and reports")
    A: List[List[ComplexEntry]] = Field(..., description="Diffusion matrix, rows of [re, im] pairs")
    B: List[List[ComplexEntry]] = Field(..., description="Reaction matrix, rows of [re, im] pairs")
    S: List[List[float]] = Field(..., description="Real skew-symmetric drift matrix")
    d: Optional[int] = Field(default=None, description="Spatial dimension, must match S")
    Y: Optional[List[List[ComplexEntry]]] = Field(
        default=None, description="Optional transformation matrix, verified before use"
    )

    @field_validator("A", "B", "Y")
    @classmethod
    def check_pairs(cls, rows):
        if rows is None:
            return rows
        for row in rows:
            for value in row:
                if isinstance(value, list) and len(value) != 2:
                    raise ValueError(f"Complex entries must be [re, im] pairs, got {value}")
        return rows

    @model_validator(mode="after")
    def check_dimension(self):
        if self.d is not None and self.d != len(self.S):
            raise ValueError(f"d = {self.d} does not match S with {len(self.S)} rows")
        return self

    def to_system(self) -> OUSystem:
        Y = None if self.Y is None else _to_complex(self.Y)
        return validate_system(_to_complex(self.A), _to_complex(self.B), np.array(self.S, dtype=float), Y, self.name)

    @classmethod
    def from_system(cls, sys: OUSystem) -> "SystemDocument":
        return cls(
            name=sys.name,
            A=_to_pairs(sys.A),
            B=_to_pairs(sys.B),
            S=np.asarray(sys.S, dtype=float).tolist(),
            d=sys.d,
            Y=_to_pairs(sys.Y),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SystemDocument":
        path = Path(path)
        document = cls.model_validate(json.loads(path.read_text(encoding="utf-8")))
        if document.name == "system":
            document.name = path.stem
        return document


class SpectralResponse(BaseModel):
    name: str
    d: int
    N: int
    lambdaA: List[List[float]]
    lambdaB: List[List[float]]
    a_min: float
    a_max: float
    a0: float
    b0: float
    kappa: float
    a1: float
    nu: float
