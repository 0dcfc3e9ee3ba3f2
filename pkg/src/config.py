"""
Configuration management for the tilde-ck toolkit.
"""

from pathlib import Path
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix TILDE_CK_)."""

    model_config = SettingsConfigDict(
        env_prefix="TILDE_CK_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Word enumeration and the H3 fallback search
    enumeration_bound: int = Field(default=1_000_000, ge=1)
    h3_period_bound: int = Field(default=2, ge=1)

    # Triangle presentation search
    search_max_order: int = Field(default=3, ge=2)
    search_timeout_seconds: float = Field(default=60.0, gt=0)

    # Exact linear algebra
    modular_prime: int = Field(default=2_147_483_647, ge=2)
    dense_threshold: float = Field(default=0.25, gt=0, le=1)
    # largest rows*cols for the dense mod-p rank check; 0 turns it off
    precheck_max_entries: int = Field(default=4_000_000, ge=0)

    # Execution and output
    threads: int = Field(
        default=1,
        ge=1,
        description=(
            "Workers for the two block cokernels. They run in threads, so under the GIL "
            "this overlaps little work; results never depend on the value."
        ),
    )
    report_format: str = Field(default="text", pattern="^(text|json)$")

    # Logging Configuration
    log_dir: str = Field(default="logs")
    log_level: str = Field(default="INFO")
    console_log_level: str = Field(default="WARNING")
    log_max_bytes: int = Field(default=10485760)  # 10MB
    log_backup_count: int = Field(default=5)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def get_data_dir() -> Path:
    """Directory holding the shipped fixtures (C.1 presentation, graphs, matrices)."""
    return Path(__file__).resolve().parent.parent / "data"
