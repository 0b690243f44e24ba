import logging
from pathlib import Path
from typing import Any, Literal

from dotenv import dotenv_values
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    ValidationInfo,
    field_validator,
)

from iirnn.errors import ConfigError, UsageError
from iirnn.models.common import Variant

logger = logging.getLogger(__name__)

DEFAULT_KS: list[int] = [5, 10, 20]
DEFAULT_POSITIONS: list[int] = [1, 2, 3, 4, 5, 20]

REDDIT_GAP = 3600
LASTFM_GAP = 1800

PRESETS: dict[str, dict[str, Any]] = {
    "reddit": {"gap": REDDIT_GAP, "d": 50, "keep_prob": 1.0, "format": "reddit"},
    "lastfm": {"gap": LASTFM_GAP, "d": 100, "keep_prob": 0.8, "format": "lastfm"},
}


def _split_ints(value: Any) -> Any:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        try:
            return [int(p) for p in parts]
        except ValueError as exc:
            msg = f"expected comma-separated integers, got {value!r}"
            raise ValueError(msg) from exc
    return value


class TrainConfig(BaseModel):
    """Flat run configuration shared by every subcommand."""

    model_config = ConfigDict(extra="forbid")

    variant: Variant = Variant.II_LHS
    d: int = Field(default=50, ge=1)
    h: int = Field(default=100, ge=1)
    g: int = Field(default=15, ge=1)
    lr: float = Field(default=0.001, gt=0.0)
    keep_prob: float = 1.0
    batch_size: int = 15
    max_epochs: int = Field(default=20, ge=0)
    seed: int = 0
    L: int = Field(default=20, ge=2)
    ks: list[int] = Field(default_factory=lambda: DEFAULT_KS.copy())
    positions: list[int] = Field(default_factory=lambda: DEFAULT_POSITIONS.copy())
    gap: int = Field(default=REDDIT_GAP, ge=0)
    train_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)
    intra_layers: int = Field(default=1, ge=1)
    inter_layers: int = Field(default=1, ge=1)
    max_grad_norm: float | None = None
    validation_fraction: float = Field(default=0.05, ge=0.0, lt=1.0)
    init_scale: float = Field(default=0.1, gt=0.0)
    average: Literal["prediction", "session"] = "prediction"
    threads: int | None = None

    input: str | None = None
    format: Literal["tsv", "reddit", "lastfm"] = "tsv"
    corpus: str | None = None
    checkpoint: str | None = None
    out: str | None = None

    @field_validator("ks", "positions", mode="before")
    @classmethod
    def _parse_int_list(cls, value: Any) -> Any:
        return _split_ints(value)

    @field_validator("ks", "positions")
    @classmethod
    def _check_positive(cls, value: list[int]) -> list[int]:
        if not value or any(v < 1 for v in value):
            raise ValueError("must be a non-empty list of positive integers")
        return sorted(set(value))

    @field_validator("keep_prob")
    @classmethod
    def _check_keep_prob(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError("keep_prob must be in (0, 1]")
        return value

    @field_validator("batch_size")
    @classmethod
    def _check_batch_size(cls, value: int) -> int:
        if value < 1:
            raise ValueError("batch_size must be >= 1")
        return value

    @field_validator("max_grad_norm", "threads", "input", "corpus", mode="before")
    @classmethod
    def _empty_is_none(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "none"):
            return None
        return value

    @property
    def max_k(self) -> int:
        return max(self.ks)


class SynthSpec(BaseModel):
    """Parameters of the synthetic corpus generator."""

    model_config = ConfigDict(extra="forbid")

    num_users: int = Field(default=200, ge=1)
    sessions_per_user: int = Field(default=20, ge=1)
    min_length: int = Field(default=2, ge=1)
    max_length: int = Field(default=8, ge=1)
    n_items: int = Field(default=50, ge=1)
    rho: float = Field(default=0.9, ge=0.0, le=1.0)
    kappa: float = Field(default=0.7, ge=0.0, le=1.0)
    seed: int = 0
    gap: int = Field(default=REDDIT_GAP, ge=1)
    popularity_exponent: float = Field(default=0.0, ge=0.0)
    out: str | None = None

    @field_validator("max_length")
    @classmethod
    def _check_range(cls, value: int, info: ValidationInfo) -> int:
        low = info.data.get("min_length", 1)
        if value < low:
            raise ValueError("max_length must be >= min_length")
        return value


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    values = dotenv_values(p)
    return {k.strip(): v for k, v in values.items() if v is not None}


def _build[M: BaseModel](
    model: type[M],
    path: str | Path | None,
    overrides: dict[str, Any] | None,
    base: dict[str, Any] | None = None,
) -> M:
    raw: dict[str, Any] = dict(base or {})
    if path is not None:
        raw.update(read_config_file(path))
        logger.debug("Loaded config from %s", path)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    preset: str | None = None,
) -> TrainConfig:
    """Defaults, then preset, then file, then flag overrides."""
    base: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"
            )
        base = PRESETS[preset]
    return _build(TrainConfig, path, overrides, base)


def load_synth_spec(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> SynthSpec:
    return _build(SynthSpec, path, overrides)
