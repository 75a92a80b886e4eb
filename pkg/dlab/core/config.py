# dlab/core/config.py

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="DLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # Parallelism (DLAB_THREADS; unset means all cores)
    threads: Optional[int] = Field(default=None, ge=1)

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    # Power iteration
    power_iteration_tol: float = 1e-10
    power_iteration_max_iter: int = 100_000

    # Budgets
    exhaustive_budget: int = 1_000_000
    exact_moment_max_n: int = 512

    # Samples per seeded block; changing it changes the random streams
    mc_block_size: int = Field(default=2048, ge=1)


@lru_cache()
def get_settings() -> Settings:
    from dlab.core.exceptions import ValidationError

    try:
        return Settings()
    except PydanticValidationError as e:
        fields = "; ".join(
            f"DLAB_{'_'.join(str(item) for item in error['loc']).upper()}: {error['msg']}" for error in e.errors()
        )
        raise ValidationError(f"Invalid environment settings: {fields}") from e
