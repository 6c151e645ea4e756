from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import ConfigError

_DEFAULT_FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


class Settings(BaseModel):
	# Signature and model
	atoms: list[str] = Field(default_factory=lambda: ["a", "b", "c"])
	interp_size: int = 2
	degree_cap: int = 3

	# Budgets
	fuel: int = 10_000
	cong_budget: int = 64
	enum_cap: int = 64

	prime: int | None = None
	output_format: str = "text"
	log_level: str = "WARNING"
	fixtures_dir: Path = _DEFAULT_FIXTURES

	@field_validator("atoms")
	@classmethod
	def _atoms_nonempty(cls, value: list[str]) -> list[str]:
		value = [a.strip() for a in value if a.strip()]
		if not value:
			raise ValueError("at least one atom must be declared")
		return value

	@field_validator("interp_size", "fuel", "cong_budget", "enum_cap")
	@classmethod
	def _positive(cls, value: int) -> int:
		if value <= 0:
			raise ValueError("budgets and sizes must be positive")
		return value

	@field_validator("degree_cap")
	@classmethod
	def _cap(cls, value: int) -> int:
		if value < 0:
			raise ValueError("degree cap must be >= 0")
		return value

	@field_validator("output_format")
	@classmethod
	def _format(cls, value: str) -> str:
		if value not in ("text", "json", "dot"):
			raise ValueError(f"unknown output format {value!r}")
		return value

	@field_validator("log_level")
	@classmethod
	def _level(cls, value: str) -> str:
		value = value.strip().upper()
		if value not in _LEVELS:
			raise ValueError(f"unknown log level {value!r}")
		return value

	def with_overrides(self, **changes: object) -> "Settings":
		"""Layer non-None overrides (typically CLI flags) over these settings."""
		update = {k: v for k, v in changes.items() if v is not None}
		try:
			return Settings.model_validate({**self.model_dump(), **update})
		except ValidationError as e:
			raise ConfigError(str(e)) from e


def load_settings() -> Settings:
	load_dotenv()
	raw: dict[str, object] = {}
	if os.getenv("LINCAT_ATOMS"):
		raw["atoms"] = os.getenv("LINCAT_ATOMS", "").split(",")
	for key, env in (
		("interp_size", "LINCAT_INTERP_SIZE"),
		("degree_cap", "LINCAT_DEGREE"),
		("fuel", "LINCAT_FUEL"),
		("cong_budget", "LINCAT_CONG_BUDGET"),
		("enum_cap", "LINCAT_ENUM_CAP"),
		("prime", "LINCAT_PRIME"),
	):
		if os.getenv(env):
			raw[key] = os.getenv(env)
	if os.getenv("LINCAT_FORMAT"):
		raw["output_format"] = os.getenv("LINCAT_FORMAT")
	if os.getenv("LINCAT_LOG_LEVEL"):
		raw["log_level"] = os.getenv("LINCAT_LOG_LEVEL")
	if os.getenv("LINCAT_FIXTURES"):
		raw["fixtures_dir"] = Path(os.getenv("LINCAT_FIXTURES", ""))
	try:
		return Settings.model_validate(raw)
	except ValidationError as e:
		raise ConfigError(str(e)) from e


settings = load_settings()
