"""
Experiment configuration files.

An experiment file holds ``section.key=value`` lines (parsed with
python-dotenv, so comments, quoting and ``${VAR}`` interpolation work as
in a ``.env`` file)::

    run.recipe=transfer
    data.train_src=data/child.train.t
    model.profile=desk
    train.epochs=30
    transfer.parent_epochs=1

Every key mirrors a field of the owning dataclass. Unknown sections or
keys are rejected so that typos never pass silently. Relative paths are
resolved against the directory of the config file.
"""

import enum
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union, get_args, get_origin, get_type_hints

from dotenv import dotenv_values

from .decoding import DecodeConfig, FusionConfig, FusionMode, PostNormNormalization, SearchStrategy
from .errors import ConfigError
from .logging_config import get_logger
from .model import DEFAULT_PROFILE, ModelConfig, ModelKind
from .trainer import TrainConfig

logger = get_logger(__name__)


@dataclass
class DataSettings:
    train_src: Optional[Path] = None
    train_tgt: Optional[Path] = None
    valid_src: Optional[Path] = None
    valid_tgt: Optional[Path] = None
    test_src: Optional[Path] = None
    test_tgt: Optional[Path] = None
    src_lang: str = "src"
    tgt_lang: str = "tgt"
    vocab: Optional[Path] = None
    vocab_size: int = 8000
    reverse: bool = False
    max_tokens: Optional[int] = None


@dataclass
class ModelSettings:
    profile: str = DEFAULT_PROFILE
    n_layers: Optional[int] = None
    d_model: Optional[int] = None
    n_heads: Optional[int] = None
    ffn_dim: Optional[int] = None
    dropout: Optional[float] = None
    max_len: int = 256
    share_embeddings: bool = True
    tie_softmax: bool = True


@dataclass
class DecodeSettings:
    strategy: SearchStrategy = SearchStrategy.BEAM
    beam_size: int = 4
    length_penalty: float = 0.6
    max_len: int = 100
    workers: int = 1
    validation_strategy: SearchStrategy = SearchStrategy.GREEDY


@dataclass
class FusionSettings:
    mode: FusionMode = FusionMode.NONE
    weight: float = 0.003
    postnorm_norm: PostNormNormalization = PostNormNormalization.SOFTMAX
    lm_checkpoint: Optional[Path] = None


@dataclass
class TransferSettings:
    parent_train_src: Optional[Path] = None
    parent_train_tgt: Optional[Path] = None
    parent_valid_src: Optional[Path] = None
    parent_valid_tgt: Optional[Path] = None
    parent_src_lang: str = "parent"
    parent_epochs: int = 1
    parent_checkpoint: Optional[Path] = None
    freeze: Tuple[str, ...] = ()


@dataclass
class BacktranslationSettings:
    mono: Optional[Path] = None
    reverse_checkpoint: Optional[Path] = None
    reverse_epochs: int = 10
    ratio: Optional[float] = 8.0
    subset_size: Optional[int] = None
    init_checkpoint: Optional[Path] = None


@dataclass
class RunSettings:
    recipe: str = "baseline"
    outdir: Path = Path("runs/experiment")


SECTIONS: Dict[str, type] = {
    "data": DataSettings,
    "model": ModelSettings,
    "train": TrainConfig,
    "decode": DecodeSettings,
    "fusion": FusionSettings,
    "transfer": TransferSettings,
    "backtranslation": BacktranslationSettings,
    "run": RunSettings,
}

_TRUE = ("true", "1", "yes", "on")
_FALSE = ("false", "0", "no", "off")


def _unwrap_optional(annotation: Any) -> Tuple[Any, bool]:
    if get_origin(annotation) is Union:
        args = [a for a in get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return annotation, False


def coerce_value(key: str, raw: Optional[str], annotation: Any, base_dir: Path) -> Any:
    """
    Convert a raw config string to the annotated field type.

    Raises:
        ConfigError: If the value cannot be parsed.
    """
    annotation, optional = _unwrap_optional(annotation)
    text = (raw or "").strip()
    if optional and text.lower() in ("", "none"):
        return None
    try:
        if annotation is bool:
            lowered = text.lower()
            if lowered not in _TRUE + _FALSE:
                raise ValueError(text)
            return lowered in _TRUE
        if annotation is int:
            return int(text)
        if annotation is float:
            return float(text)
        if annotation is Path:
            path = Path(text).expanduser()
            return path if path.is_absolute() else base_dir / path
        if isinstance(annotation, type) and issubclass(annotation, enum.Enum):
            return annotation(text)
        if get_origin(annotation) in (tuple, Tuple):
            args = get_args(annotation)
            items = [item.strip() for item in text.split(",") if item.strip()]
            element = args[0] if args else str
            return tuple(element(item) for item in items)
        return text
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from e


def format_value(value: Any) -> str:
    """Inverse of :func:`coerce_value` for the resolved config snapshot."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return str(value)


def _build_section(name: str, cls: type, values: Mapping[str, Optional[str]], base_dir: Path):
    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {name}.{key}; known keys: {sorted(known)}")
        kwargs[key] = coerce_value(f"{name}.{key}", raw, hints[key], base_dir)
    return cls(**kwargs)


@dataclass
class ExperimentConfig:
    """All settings of one experiment, one dataclass per section."""
    data: DataSettings = field(default_factory=DataSettings)
    model: ModelSettings = field(default_factory=ModelSettings)
    train: TrainConfig = field(default_factory=TrainConfig)
    decode: DecodeSettings = field(default_factory=DecodeSettings)
    fusion: FusionSettings = field(default_factory=FusionSettings)
    transfer: TransferSettings = field(default_factory=TransferSettings)
    backtranslation: BacktranslationSettings = field(default_factory=BacktranslationSettings)
    run: RunSettings = field(default_factory=RunSettings)
    source: Optional[Path] = None

    @classmethod
    def from_mapping(
        cls,
        values: Mapping[str, Optional[str]],
        base_dir: Union[str, Path] = ".",
        source: Optional[Path] = None,
    ) -> "ExperimentConfig":
        """
        Build from ``section.key`` -> raw string pairs.

        Raises:
            ConfigError: On unknown sections or keys and unparsable values.
        """
        grouped: Dict[str, Dict[str, Optional[str]]] = {name: {} for name in SECTIONS}
        for key, raw in values.items():
            section, dot, name = key.partition(".")
            if not dot or not name:
                raise ConfigError(f"config key {key!r} must look like section.key")
            if section not in SECTIONS:
                raise ConfigError(f"unknown config section {section!r} in {key!r}; known: {sorted(SECTIONS)}")
            grouped[section][name] = raw
        base = Path(base_dir)
        built = {name: _build_section(name, SECTIONS[name], grouped[name], base) for name in SECTIONS}
        return cls(source=source, **built)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """
        Read an experiment file.

        Raises:
            ConfigError: If the file is missing or invalid.
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        config = cls.from_mapping(dotenv_values(path), base_dir=path.parent, source=path)
        logger.info("Loaded experiment config", path=str(path), recipe=config.run.recipe)
        return config

    def to_lines(self) -> List[str]:
        """Every setting, defaults included, as sorted ``section.key=value`` lines."""
        lines: List[str] = []
        for name in SECTIONS:
            section = getattr(self, name)
            for f in sorted(fields(section), key=lambda f: f.name):
                lines.append(f"{name}.{f.name}={format_value(getattr(section, f.name))}")
        return lines

    def write_resolved(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8", newline="\n")
        return path

    def model_config(self, vocab_size: int, kind: ModelKind = ModelKind.TRANSLATION) -> ModelConfig:
        settings = self.model
        overrides = {
            key: getattr(settings, key)
            for key in ("n_layers", "d_model", "n_heads", "ffn_dim", "dropout")
            if getattr(settings, key) is not None
        }
        return ModelConfig.from_profile(
            settings.profile,
            vocab_size=vocab_size,
            max_len=settings.max_len,
            share_embeddings=settings.share_embeddings,
            tie_softmax=settings.tie_softmax,
            kind=kind,
            **overrides,
        )

    def fusion_config(self) -> FusionConfig:
        return FusionConfig(self.fusion.mode, self.fusion.weight, self.fusion.postnorm_norm)

    def decode_config(self, validation: bool = False) -> DecodeConfig:
        """Decoding for test/back-translation, or the (greedy by default) validation variant."""
        d = self.decode
        strategy = d.validation_strategy if validation else d.strategy
        fusion = FusionConfig() if validation else self.fusion_config()
        return DecodeConfig(strategy, d.beam_size, d.length_penalty, d.max_len, fusion, d.workers)

    def check_paths(self, required: List[str]) -> None:
        """
        Verify that required ``section.key`` paths are set and every set path exists.

        Raises:
            ConfigError: Naming the first missing key or file.
        """
        for key in required:
            section, _, name = key.partition(".")
            if getattr(getattr(self, section), name) is None:
                raise ConfigError(f"{key} is required for recipe {self.run.recipe}")
        for name in SECTIONS:
            section = getattr(self, name)
            for f in fields(section):
                value = getattr(section, f.name)
                if name == "run" or not isinstance(value, Path):
                    continue
                if not value.exists():
                    raise ConfigError(f"{name}.{f.name}: {value} does not exist")
