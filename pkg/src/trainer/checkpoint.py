"""
Binary checkpoint format.

Layout (all integers little-endian):

    magic            6 bytes  b"LRNMT1"
    config length    uint32
    config block     UTF-8 "key=value" lines
    fingerprint      uint64   vocabulary fingerprint
    optimizer flag   uint8    1 when Adam moments follow as tensors
    tensor count     uint32
    per tensor:
        name length  uint16
        name         UTF-8
        rank         uint8
        dims         rank x uint32
        data         float32, row-major

Only canonical parameter paths are stored; aliases are rebound on load.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..errors import CheckpointFormatError, CorpusIOError, FingerprintError
from ..logging_config import get_logger
from ..model import ModelConfig, Parameters, bind_aliases, parameter_shapes
from ..tensor import Tensor
from .optim import AdamState

logger = get_logger(__name__)

MAGIC = b"LRNMT1"
MOMENT_PREFIXES = ("adam.m.", "adam.v.")
META_PREFIX = "meta."
ADAM_STEP_KEY = "meta.adam_step"

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    """Parameters plus everything needed to rebuild and validate a model."""
    params: Parameters
    config: ModelConfig
    fingerprint: int
    optimizer: Optional[AdamState] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    def check_fingerprint(self, expected: int, force: bool = False) -> None:
        """
        Refuse to bind to a vocabulary other than the one trained with.

        Raises:
            FingerprintError: On mismatch, unless ``force`` is set.
        """
        if self.fingerprint == expected:
            return
        if force:
            logger.warning(
                "Binding checkpoint to a different vocabulary",
                checkpoint=f"{self.fingerprint:016x}",
                vocabulary=f"{expected:016x}",
            )
            return
        raise FingerprintError(
            f"checkpoint vocabulary {self.fingerprint:016x} does not match "
            f"active vocabulary {expected:016x}"
        )


def _config_block(ckpt: Checkpoint) -> bytes:
    entries = dict(ckpt.config.to_dict())
    for key, value in ckpt.metadata.items():
        entries[f"{META_PREFIX}{key}"] = str(value)
    if ckpt.optimizer is not None:
        entries[ADAM_STEP_KEY] = str(ckpt.optimizer.step)
    lines = [f"{key}={entries[key]}" for key in sorted(entries)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _tensor_record(name: str, values: np.ndarray) -> bytes:
    encoded = name.encode("utf-8")
    parts = [struct.pack("<H", len(encoded)), encoded, struct.pack("<B", values.ndim)]
    parts.append(struct.pack(f"<{values.ndim}I", *values.shape))
    parts.append(np.ascontiguousarray(values, dtype="<f4").tobytes())
    return b"".join(parts)


def _tensors(ckpt: Checkpoint) -> List[Tuple[str, np.ndarray]]:
    out = [(name, ckpt.params[name].values) for name in parameter_shapes(ckpt.config)]
    if ckpt.optimizer is not None:
        for prefix, moments in zip(MOMENT_PREFIXES, (ckpt.optimizer.m, ckpt.optimizer.v)):
            for name in sorted(moments):
                out.append((prefix + name, moments[name]))
    return out


def save_checkpoint(ckpt: Checkpoint, path: PathLike) -> Path:
    """
    Serialize ``ckpt`` to ``path``; tensors are stored as 32-bit floats.

    Raises:
        CorpusIOError: If the file cannot be written.
    """
    path = Path(path)
    tensors = _tensors(ckpt)
    config = _config_block(ckpt)
    chunks = [
        MAGIC,
        struct.pack("<I", len(config)),
        config,
        struct.pack("<Q", ckpt.fingerprint),
        struct.pack("<B", 1 if ckpt.optimizer is not None else 0),
        struct.pack("<I", len(tensors)),
    ]
    chunks.extend(_tensor_record(name, values) for name, values in tensors)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as e:
        raise CorpusIOError(f"cannot write checkpoint {path}: {e}") from e
    logger.debug("Checkpoint saved", path=str(path), tensors=len(tensors))
    return path


class _Reader:
    def __init__(self, data: bytes, path: PathLike):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise CheckpointFormatError(
                f"{self.path}: truncated at byte {self.offset} (needed {size} more)"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _parse_config_block(block: bytes, path: PathLike) -> Dict[str, str]:
    try:
        text = block.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CheckpointFormatError(f"{path}: config block is not UTF-8") from e
    entries: Dict[str, str] = {}
    for line in text.split("\n"):
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CheckpointFormatError(f"{path}: malformed config line {line!r}")
        entries[key] = value
    return entries


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CorpusIOError: If the file cannot be read.
        CheckpointFormatError: On bad magic, truncation, trailing bytes or
            tensors that disagree with the stored model config.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CorpusIOError(f"cannot read checkpoint {path}: {e}") from e

    reader = _Reader(data, path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointFormatError(f"{path}: not a checkpoint (bad magic)")
    (config_len,) = reader.unpack("<I")
    entries = _parse_config_block(reader.take(config_len), path)
    (fingerprint,) = reader.unpack("<Q")
    (has_optimizer,) = reader.unpack("<B")
    (count,) = reader.unpack("<I")

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(f"{path}: tensor name is not UTF-8") from e
        (rank,) = reader.unpack("<B")
        dims = reader.unpack(f"<{rank}I") if rank else ()
        size = int(np.prod(dims)) if dims else 1
        raw = reader.take(4 * size)
        tensors[name] = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(dims)
    if reader.offset != len(data):
        raise CheckpointFormatError(f"{path}: {len(data) - reader.offset} trailing bytes")

    model_entries = {k: v for k, v in entries.items() if not k.startswith(META_PREFIX)}
    config = ModelConfig.from_dict(model_entries)
    metadata = {
        k[len(META_PREFIX):]: v
        for k, v in entries.items()
        if k.startswith(META_PREFIX) and k != ADAM_STEP_KEY
    }

    canonical: Parameters = {}
    for name, shape in parameter_shapes(config).items():
        if name not in tensors:
            raise CheckpointFormatError(f"{path}: missing tensor {name}")
        if tensors[name].shape != shape:
            raise CheckpointFormatError(
                f"{path}: tensor {name} has shape {tensors[name].shape}, config implies {shape}"
            )
        canonical[name] = Tensor(tensors.pop(name), requires_grad=True, name=name)

    optimizer = None
    if has_optimizer:
        optimizer = AdamState(step=int(entries.get(ADAM_STEP_KEY, "0")))
        for prefix, moments in zip(MOMENT_PREFIXES, (optimizer.m, optimizer.v)):
            for name in [n for n in tensors if n.startswith(prefix)]:
                moments[name[len(prefix):]] = tensors.pop(name)
    if tensors:
        raise CheckpointFormatError(f"{path}: unexpected tensors {sorted(tensors)}")

    logger.debug("Checkpoint loaded", path=str(path), fingerprint=f"{fingerprint:016x}")
    return Checkpoint(
        params=bind_aliases(canonical, config),
        config=config,
        fingerprint=fingerprint,
        optimizer=optimizer,
        metadata=metadata,
    )
