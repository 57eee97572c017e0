"""Structured logging configuration with run ID support for tracing design and reproduction runs."""

import logging
import sys
import uuid
from concurrent.futures import Executor, Future
from contextvars import ContextVar, Token, copy_context
from typing import Any, Callable, Optional, TextIO, TypeVar

import structlog
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from structlog.types import EventDict, WrappedLogger

# Run ID shared by every log record emitted while a command executes
_run_id: ContextVar[Optional[str]] = ContextVar("run_id", default=None)

_T = TypeVar("_T")


def generate_run_id() -> str:
    """Generate a new run ID."""
    return str(uuid.uuid4())


def set_run_id(run_id: str) -> None:
    """Set the run ID for the current context."""
    _run_id.set(run_id)


def get_run_id() -> Optional[str]:
    """Get the current run ID."""
    return _run_id.get()


class RunContext:
    """Context manager binding a run ID (and optionally the command name) for one CLI invocation."""

    def __init__(self, run_id: Optional[str] = None, command: Optional[str] = None):
        self.run_id = run_id or generate_run_id()
        self.command = command
        self.token: Optional[Token[Optional[str]]] = None

    def __enter__(self) -> str:
        self.token = _run_id.set(self.run_id)
        if self.command is not None:
            structlog.contextvars.bind_contextvars(command=self.command)
        return self.run_id

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        if self.token is not None:
            _run_id.reset(self.token)
        if self.command is not None:
            structlog.contextvars.unbind_contextvars("command")


def submit_in_context(pool: Executor, func: Callable[..., _T], *args: Any) -> "Future[_T]":
    """Submit work that logs with the caller's run ID and bound fields.

    Pool threads start from an empty context, so each task runs in a copy of the submitter's.
    """
    return pool.submit(copy_context().run, func, *args)


LOG_SPECIFIC_FIELDS = {
    "timestamp",
    "logger",
    "message",
    "command",
    "run_id",
}
CONTEXT_FIELDS = {
    "level",
    "stream",
}


class LoggingContext(BaseSettings):
    stream: str = Field(
        default="stderr",
        description="The log stream used (stdout or stderr)",
        json_schema_extra={"env_names": ["STREAM"]},
    )
    logging_level: str = Field(
        default="WARNING",
        description="The logging level of the toolkit",
        json_schema_extra={"env_names": ["LOGGING_LEVEL"]},
    )
    log_format: str = Field(
        default="json",
        description="The log output format (json or keyvalue)",
        json_schema_extra={"env_names": ["LOG_FORMAT"]},
    )

    model_config = SettingsConfigDict(
        extra="allow",
    )


_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}


def get_logging_level(level: str) -> int:
    try:
        return _LEVELS[level.upper()]
    except KeyError:
        raise ValueError(f"Unsupported logging level: {level}") from None


def get_stream(stream: str) -> TextIO:
    if stream.lower() == "stdout":
        return sys.stdout
    elif stream.lower() == "stderr":
        return sys.stderr
    else:
        raise ValueError(f"Unsupported stream: {stream}")


def _process_log_fields(logger: WrappedLogger, log_method: str, event_dict: EventDict) -> EventDict:
    event_dict["message"] = event_dict.pop("event", "")

    run_id = get_run_id()
    if run_id:
        event_dict["run_id"] = run_id

    allowed_keys = LOG_SPECIFIC_FIELDS | CONTEXT_FIELDS

    # Domain fields (h, eps, p_min, solver status, ...) are grouped under "extra"
    extra_fields = {key: event_dict.pop(key) for key in list(event_dict.keys()) if key not in allowed_keys}
    if extra_fields:
        event_dict["extra"] = extra_fields

    return event_dict


def configure_structlog(context: Optional[LoggingContext] = None) -> None:
    if context is None:
        context = LoggingContext()

    level = get_logging_level(context.logging_level)
    logging.basicConfig(
        format="%(message)s",
        level=level,
        stream=get_stream(context.stream),
    )
    logging.getLogger().setLevel(level)

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if context.log_format.lower() == "json"
        else structlog.processors.KeyValueRenderer(key_order=["timestamp", "level", "logger", "message"])
    )

    structlog.configure(
        processors=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.contextvars.merge_contextvars,
            _process_log_fields,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.make_filtering_bound_logger(level),
        cache_logger_on_first_use=False,
    )

    set_context_fields(context)


def set_context_fields(context: LoggingContext) -> None:
    structlog.contextvars.bind_contextvars(
        stream=context.stream,
    )


def clear_context_fields() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str = "") -> structlog.stdlib.BoundLogger:
    if not name:
        name = __name__
    return structlog.get_logger(name)  # type: ignore
