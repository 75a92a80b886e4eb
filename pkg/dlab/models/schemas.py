# dlab/models/schemas.py

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, NonNegativeInt, model_validator
from typing import Any, Dict, List, Literal, Optional

EXPERIMENT_NAMES = (
    "norms", "gcdsum", "randmult", "helson", "zetamax",
    "sidon", "hilbert", "field", "partialsum",
)

ExperimentName = Literal[
    "norms", "gcdsum", "randmult", "helson", "zetamax",
    "sidon", "hilbert", "field", "partialsum",
]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentName
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(..., ge=0, lt=2**64)
    output_path: str = Field(..., min_length=1)


class ExperimentParams(BaseModel):
    """Base for per-experiment parameters; unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid")


class NormsParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    p_values: List[PositiveFloat] = Field(default=[0.5, 1.0, 2.0, 4.0], min_length=1)
    gamma_values: List[float] = Field(default=[0.0], min_length=1)
    samples: int = Field(default=20000, ge=2)


class GcdsumParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    universe_limit: PositiveInt = 12
    alpha_values: List[PositiveFloat] = Field(default=[0.5, 1.0], min_length=1)
    strategy: Literal["exhaustive", "greedy", "smooth"] = "exhaustive"


class RandmultParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    model: Literal["steinhaus", "rademacher"] = "steinhaus"
    exponents: List[PositiveFloat] = Field(default=[1.0, 2.0, 4.0], min_length=1)
    trials: int = Field(default=10000, ge=2)
    mode: Literal["moments", "homogeneous"] = "moments"
    m_values: List[NonNegativeInt] = Field(default=[1, 2], min_length=1)
    p: Literal[2, 4, 6, 8] = 4


class HelsonParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    trials: int = Field(default=10000, ge=2)


class ZetamaxParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    t_lo: float = 0.0
    t_hi: float = 1000.0
    gridpoints: int = Field(default=100000, ge=2)
    refine: bool = True
    resonator_set: Optional[List[PositiveInt]] = None

    @model_validator(mode="after")
    def window_not_empty(self) -> "ZetamaxParams":
        if not self.t_lo < self.t_hi:
            raise ValueError(f"t_lo must be below t_hi, got [{self.t_lo}, {self.t_hi}]")
        return self


class SidonParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    grid_per_dim: PositiveInt = 32
    restarts: PositiveInt = 4


class HilbertParams(ExperimentParams):
    max_size: PositiveInt


class FieldParams(ExperimentParams):
    prime_limits: List[int] = Field(..., min_length=1)
    draws: PositiveInt = 1000
    gridpoints: int = Field(default=4096, ge=2)

    @model_validator(mode="after")
    def limits_have_primes(self) -> "FieldParams":
        if any(p < 2 for p in self.prime_limits):
            raise ValueError(f"prime_limits must be at least 2, got {self.prime_limits}")
        return self


class PartialsumParams(ExperimentParams):
    N_values: List[PositiveInt] = Field(..., min_length=1)
    length_factor: PositiveInt = 2
    p_values: List[PositiveFloat] = Field(default=[1.0, 2.0], min_length=1)
    samples: int = Field(default=20000, ge=2)


class ExperimentInfo(BaseModel):
    name: str
    required_params: List[str]
    description: str


class RunReport(BaseModel):
    config_echo: ExperimentConfig
    rows_written: int = Field(..., ge=0)
    wall_time_seconds: float = Field(..., ge=0)
    artifact_version: str
    output_path: str
    config_hash: str
