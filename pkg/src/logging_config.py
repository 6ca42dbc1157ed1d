"""
Structured logging for training runs.

Every event is a structlog event dict. Context bound with :func:`run_context`
(recipe, stage, epoch ...) is merged into every event emitted inside the
block, including events from library modules that know nothing about the
run. Console output is human readable (or JSON lines with ``json_logs``);
a log file, when requested, always receives JSON lines so finished runs
can be parsed back.
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

import structlog

_SHARED_PROCESSORS = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.stdlib.PositionalArgumentsFormatter(),
    structlog.processors.StackInfoRenderer(),
]


def _round_floats(logger: Any, method: str, event: Dict[str, Any]) -> Dict[str, Any]:
    """Six significant digits for losses, rates and scores."""
    for key, value in event.items():
        if isinstance(value, float):
            event[key] = float(f"{value:.6g}")
    return event


def _formatter(renderer: Any) -> structlog.stdlib.ProcessorFormatter:
    return structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=_SHARED_PROCESSORS,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            _round_floats,
            structlog.processors.format_exc_info,
            renderer,
        ],
    )


def setup_logging(
    level: str = "INFO", log_file: Optional[str] = None, json_logs: bool = False
) -> None:
    """
    Configure logging for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR).
        log_file: Optional path of a JSON-lines log file.
        json_logs: If True, the console also gets JSON lines.
    """
    log_level = getattr(logging, level.upper(), logging.INFO)

    structlog.configure(
        processors=_SHARED_PROCESSORS + [structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_renderer = (
        structlog.processors.JSONRenderer()
        if json_logs
        else structlog.dev.ConsoleRenderer(
            colors=sys.stderr.isatty(), exception_formatter=structlog.dev.plain_traceback
        )
    )
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(_formatter(console_renderer))
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setLevel(log_level)
        file_handler.setFormatter(_formatter(structlog.processors.JSONRenderer()))
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Structured logger for a module (pass ``__name__``)."""
    return structlog.stdlib.get_logger(name)


@contextmanager
def run_context(**fields: Any) -> Iterator[None]:
    """
    Bind ``fields`` to every event logged inside the block.

    Nested blocks add to the outer context and restore it on exit::

        with run_context(recipe="transfer", stage="parent"):
            session.fit(examples)
    """
    with structlog.contextvars.bound_contextvars(**{k: v for k, v in fields.items() if v is not None}):
        yield


class TrainingLogger:
    """
    Logger specialized for tracking training sessions.

    Records session boundaries, per-epoch statistics, validation scores
    and checkpoint writes as structured events bound to a session id.
    """

    def __init__(self, session_id: str, stage: Optional[str] = None):
        """
        Initialize the training logger.

        Args:
            session_id: Session identifier bound to every event.
            stage: Optional recipe stage name (e.g. "parent", "child").
        """
        self.session_id = session_id
        self.stage = stage
        fields: Dict[str, Any] = {"session_id": session_id}
        if stage:
            fields["stage"] = stage
        self.logger = get_logger("trainer.session").bind(**fields)
        self._epoch_count = 0

    def log_session_start(self, task: str, config: Dict[str, Any]) -> None:
        self.logger.info("Session started", task=task, config=config)

    def log_session_end(self, epochs: int, steps: int, best_bleu: Optional[float]) -> None:
        self.logger.info("Session ended", epochs=epochs, steps=steps, best_bleu=best_bleu)

    def log_epoch(
        self, epoch: int, mean_loss: float, steps: int, bleu: Optional[float], seconds: float
    ) -> None:
        """Log one finished epoch."""
        self._epoch_count += 1
        self.logger.info(
            "Epoch finished",
            epoch=epoch,
            mean_loss=mean_loss,
            steps=steps,
            valid_bleu=bleu,
            seconds=round(seconds, 2),
        )

    def log_checkpoint(self, path: str, reason: str = "last") -> None:
        self.logger.debug("Checkpoint written", path=path, reason=reason)

    def log_error(self, error: str, context: Optional[Dict[str, Any]] = None) -> None:
        self.logger.error("Error occurred", error=error, context=context or {})

    @property
    def epoch_count(self) -> int:
        return self._epoch_count
