"""
Configuration Management for the LLAssist screening pipeline
Loads the TOML config file, environment variables and .env, and exposes
backend definitions, screening parameters and template overrides
"""

import os
from datetime import datetime
from pathlib import Path
from typing import Dict, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from app.errors import ConfigurationError


DEFAULT_CONFIG_FILE = Path("llassist.toml")
CONFIG_ENV_VAR = "LLASSIST_CONFIG"

BackendKind = Literal["openai_compatible", "ollama_compatible", "mock"]

_DEFAULT_BASE_URLS = {
    "openai_compatible": "https://api.openai.com",
    "ollama_compatible": "http://localhost:11434",
}


class ModelPricing(BaseModel):
    """Per-million-token prices for one model"""

    model_config = ConfigDict(frozen=True)

    input_cost_per_million_tokens: float = Field(ge=0)
    output_cost_per_million_tokens: float = Field(ge=0)


class BackendConfig(BaseModel):
    """One chat-completion backend"""

    model_config = ConfigDict(frozen=True)

    kind: BackendKind
    model_name: str
    base_url: Optional[str] = None
    api_key_env: Optional[str] = None  # env var name, never the key itself
    temperature: float = Field(default=0.0, ge=0.0, le=2.0)
    request_timeout: float = Field(default=120.0, gt=0)
    max_retries: int = Field(default=3, ge=0)
    max_in_flight: int = Field(default=4, ge=1)
    pricing: Optional[ModelPricing] = None
    seed: int = 0  # mock only

    @model_validator(mode="before")
    @classmethod
    def fill_backend_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = data.get("kind")
        if kind in _DEFAULT_BASE_URLS and not data.get("base_url"):
            data["base_url"] = _DEFAULT_BASE_URLS[kind]
        if kind == "openai_compatible" and not data.get("api_key_env"):
            data["api_key_env"] = "OPENAI_API_KEY"
        if data.get("base_url"):
            data["base_url"] = str(data["base_url"]).rstrip("/")
        return data

    def descriptor(self) -> Dict[str, object]:
        """Identity of the backend as recorded in run manifests"""
        return {
            "kind": self.kind,
            "model_name": self.model_name,
            "temperature": self.temperature,
        }


class ScreeningConfig(BaseModel):
    """Triage threshold, repair budget and parallelism"""

    model_config = ConfigDict(frozen=True)

    threshold: float = Field(default=0.7, gt=0.0, lt=1.0)
    repair_retries: int = Field(default=2, ge=0)
    samples_per_stage: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)


class TemplatePaths(BaseModel):
    """Optional replacements for the packaged prompt templates"""

    extraction_system: Optional[Path] = None
    extraction_user: Optional[Path] = None
    assessment_system: Optional[Path] = None
    assessment_user: Optional[Path] = None


def _default_backends() -> Dict[str, BackendConfig]:
    return {"mock": BackendConfig(kind="mock", model_name="mock-fnv1a")}


_active_config_file: Optional[Path] = None


class Settings(BaseSettings):
    """Application Settings"""

    model_config = SettingsConfigDict(
        env_prefix="LLASSIST_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    backends: Dict[str, BackendConfig] = Field(default_factory=_default_backends)
    screening: ScreeningConfig = Field(default_factory=ScreeningConfig)
    templates: TemplatePaths = Field(default_factory=TemplatePaths)
    mapping: Dict[str, str] = Field(default_factory=dict)

    # Logging
    log_level: str = "INFO"
    log_file: Optional[Path] = None

    # Set to an ISO-8601 instant to freeze timestamps and latencies
    fixed_clock: Optional[datetime] = None

    @model_validator(mode="after")
    def keep_mock_backend(self) -> "Settings":
        if "mock" not in self.backends:
            self.backends["mock"] = _default_backends()["mock"]
        return self

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        sources = [init_settings, env_settings, dotenv_settings]
        if _active_config_file is not None:
            sources.append(
                TomlConfigSettingsSource(settings_cls, toml_file=_active_config_file)
            )
        return tuple(sources)

    def backend(self, name: str) -> BackendConfig:
        """Look up a backend by name"""
        try:
            return self.backends[name]
        except KeyError:
            known = ", ".join(sorted(self.backends))
            raise ConfigurationError(
                f"Unknown backend '{name}'. Configured backends: {known}"
            ) from None


def resolve_config_path(explicit: Optional[Path] = None) -> Optional[Path]:
    """
    Resolve which config file to read

    Order: explicit path, then LLASSIST_CONFIG, then ./llassist.toml if present.
    An explicit or env-named path that does not exist is an error.
    """
    named = explicit or (Path(os.environ[CONFIG_ENV_VAR]) if os.environ.get(CONFIG_ENV_VAR) else None)
    if named is not None:
        if not named.is_file():
            raise ConfigurationError(f"Config file not found: {named}")
        return named
    if DEFAULT_CONFIG_FILE.is_file():
        return DEFAULT_CONFIG_FILE
    return None


_settings: Optional[Settings] = None


def load_settings(config_path: Optional[Path] = None, **overrides) -> Settings:
    """Build settings from the resolved config file and the environment"""
    global _active_config_file, _settings
    _active_config_file = resolve_config_path(config_path)
    try:
        _settings = Settings(**overrides)
    except ValueError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e
    finally:
        _active_config_file = None
    return _settings


def get_settings() -> Settings:
    """Get the global settings instance, loading it on first use"""
    if _settings is None:
        return load_settings()
    return _settings
