"""
Model configuration and shipped size profiles.
"""

from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Dict

from ..errors import ConfigError


class ModelKind(str, Enum):
    """What the network is built for."""
    TRANSLATION = "translation"
    LANGUAGE_MODEL = "language-model"


# Layer count, width, heads, feed-forward width, dropout.
PROFILES: Dict[str, Dict[str, Any]] = {
    "base": {"n_layers": 6, "d_model": 512, "n_heads": 8, "ffn_dim": 2048, "dropout": 0.1},
    "desk": {"n_layers": 2, "d_model": 64, "n_heads": 4, "ffn_dim": 128, "dropout": 0.1},
}

DEFAULT_PROFILE = "desk"


@dataclass(frozen=True)
class ModelConfig:
    """Shape and regularization settings of a Transformer."""
    vocab_size: int
    n_layers: int = 2
    d_model: int = 64
    n_heads: int = 4
    ffn_dim: int = 128
    dropout: float = 0.1
    max_len: int = 256
    share_embeddings: bool = True
    tie_softmax: bool = True
    kind: ModelKind = ModelKind.TRANSLATION

    def __post_init__(self):
        for name in ("vocab_size", "n_layers", "d_model", "n_heads", "ffn_dim", "max_len"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"model.{name} must be positive, got {getattr(self, name)}")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(
                f"model.d_model ({self.d_model}) must be divisible by model.n_heads ({self.n_heads})"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"model.dropout must lie in [0, 1), got {self.dropout}")
        if not isinstance(self.kind, ModelKind):
            object.__setattr__(self, "kind", ModelKind(self.kind))

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads

    @property
    def is_language_model(self) -> bool:
        return self.kind == ModelKind.LANGUAGE_MODEL

    @classmethod
    def from_profile(cls, profile: str, vocab_size: int, **overrides: Any) -> "ModelConfig":
        """
        Build a config from a named profile.

        Args:
            profile: "desk" or "base".
            vocab_size: Size of the shared subword vocabulary.
            **overrides: Any other ModelConfig field.
        """
        if profile not in PROFILES:
            raise ConfigError(f"unknown model profile {profile!r}; choose from {sorted(PROFILES)}")
        values = dict(PROFILES[profile])
        values.update(overrides)
        return cls(vocab_size=vocab_size, **values)

    def to_dict(self) -> Dict[str, str]:
        """Flat string mapping used by checkpoint config blocks."""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, bool):
                value = "true" if value else "false"
            out[key] = str(value)
        return out

    @classmethod
    def from_dict(cls, values: Dict[str, str]) -> "ModelConfig":
        kwargs: Dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            kwargs[f.name] = _coerce(f.name, raw, f.type)
        return cls(**kwargs)


def _coerce(name: str, raw: str, annotation: Any) -> Any:
    try:
        if annotation in (bool, "bool"):
            lowered = raw.strip().lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return lowered in ("true", "1", "yes")
        if annotation in (int, "int"):
            return int(raw)
        if annotation in (float, "float"):
            return float(raw)
        if annotation in (ModelKind, "ModelKind"):
            return ModelKind(raw)
    except ValueError as e:
        raise ConfigError(f"model.{name}: cannot parse {raw!r}") from e
    return raw
