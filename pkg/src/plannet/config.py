"""Inference configuration and the life/story/knob mode presets."""

import logging
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError


logger = logging.getLogger(__name__)


class Config(BaseModel):
    """Network construction parameters.

    equality_prior is the constant E: the prior that a slot term and an
    observed entity denote the same individual. With mention enabled, every
    entity gets a Mention node whose probability is mention_base, raised to
    mention_base * mention_lift when the entity fills a hypothesized role.
    """

    model_config = ConfigDict(frozen=True)

    equality_prior: float = Field(default=1e-5, ge=0.0, le=1.0)
    mention_enabled: bool = False
    mention_base: float = Field(default=0.01, gt=0.0, le=1.0)
    mention_lift: float = Field(default=50.0, gt=0.0)
    word_leak: float = Field(default=1e-7, gt=0.0, lt=1.0)
    max_equality_candidates: int = Field(default=8, ge=1)

    @model_validator(mode="after")
    def _lift_bounded(self):
        if self.mention_lift * self.mention_base > 1.0:
            raise ValueError(
                f"mention_lift * mention_base = {self.mention_lift * self.mention_base:g} exceeds 1"
            )
        return self

    @classmethod
    def build(cls, **fields) -> "Config":
        """Construct a Config, raising ConfigError instead of pydantic errors."""
        try:
            return cls(**fields)
        except ValidationError as e:
            details = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                for err in e.errors()
            )
            raise ConfigError(f"invalid config: {details}") from None

    def override(self, **fields) -> "Config":
        """Copy with the non-None fields replaced, re-validated."""
        data = self.model_dump()
        data.update({k: v for k, v in fields.items() if v is not None})
        return Config.build(**data)


class ModePreset(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Literal["life", "story", "knob"]
    config: Config

    @model_validator(mode="after")
    def _mode_matches(self):
        if self.name == "life" and self.config.mention_enabled:
            raise ValueError("life mode cannot enable mention")
        if self.name == "story" and not self.config.mention_enabled:
            raise ValueError("story mode requires mention")
        return self


LIFE = Config(equality_prior=1e-5, mention_enabled=False, word_leak=1e-7)

# k=50, m0=0.01 leaves the rope/kill story near 0.05; see DESIGN.md.
STORY = Config(
    equality_prior=1e-5,
    mention_enabled=True,
    mention_base=1e-3,
    mention_lift=1000.0,
    word_leak=1e-10,
)


def preset(name: str, equality_prior: Optional[float] = None) -> ModePreset:
    """Return the named mode preset.

    "knob" is the life preset with a caller-supplied equality prior.

    Raises:
        ConfigError: on an unknown name, or a knob without an equality prior.
    """
    if name == "life":
        return ModePreset(name="life", config=LIFE)
    if name == "story":
        return ModePreset(name="story", config=STORY)
    if name == "knob":
        if equality_prior is None:
            raise ConfigError("knob mode requires an equality prior")
        return ModePreset(name="knob", config=LIFE.override(equality_prior=equality_prior))
    raise ConfigError(f"unknown mode preset: {name}")
