"""Library settings using Pydantic BaseSettings."""

from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Caps and tolerances loaded from FROKAWEIL_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="FROKAWEIL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Size guardrails
    degree_cap: int = 8
    word_cap: int = 200_000
    max_ampliation: int = 4
    max_dilation_dim: int = 64

    # Linear-algebra tolerances
    isometry_tol: float = 1e-10
    contractive_tol: float = 1e-10
    rcond_floor: float = 1e-14
    krylov_growth_tol: float = 1e-10
    rank_rtol: float = 1e-10
    similarity_cond_warn: float = 1e8

    # Experiment defaults
    domain_margin: float = 0.05
    exact_tol: float = 1e-8
    approx_floor: float = 1e-8

    # Execution
    workers: int = 1


# Global settings instance
settings = Settings()
