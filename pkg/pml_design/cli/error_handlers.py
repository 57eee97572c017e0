"""Centralized error handling for the command-line front end."""

from typing import Any

from pydantic import ValidationError

from ..errors import PmlDesignError, SolverNumericalError
from ..structured_logging import get_logger

logger = get_logger("ERROR_HANDLERS")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class ErrorHandler:
    """Maps exceptions to exit codes with consistent logging."""

    @staticmethod
    def handle_input_error(err: PmlDesignError, operation: str, **context: Any) -> int:
        """Invalid files, shapes, thresholds or budgets."""
        logger.error(
            f"Invalid input for {operation}",
            error_type=type(err).__name__,
            error=str(err),
            **context,
        )
        return EXIT_INPUT_ERROR

    @staticmethod
    def handle_numerical_error(err: SolverNumericalError, operation: str, **context: Any) -> int:
        logger.error(
            f"Numerical failure during {operation}",
            error_type=type(err).__name__,
            error=str(err),
            **context,
        )
        return EXIT_NUMERICAL_ERROR

    @staticmethod
    def handle_validation_error(err: ValidationError, **context: Any) -> int:
        """Command-line arguments that fail CliConfig validation."""
        first = err.errors()[0]
        logger.error(
            "Invalid command-line arguments",
            error_type="ValidationError",
            error=first["msg"],
            **context,
        )
        return EXIT_INPUT_ERROR

    @staticmethod
    def handle_unexpected_error(err: Exception, operation: str, **context: Any) -> int:
        logger.error(
            f"Unexpected error during {operation}",
            error_type=type(err).__name__,
            error=str(err),
            **context,
        )
        return EXIT_UNEXPECTED

    @classmethod
    def exit_code(cls, err: Exception, operation: str, **context: Any) -> int:
        if isinstance(err, SolverNumericalError):
            return cls.handle_numerical_error(err, operation, **context)
        if isinstance(err, PmlDesignError):
            return cls.handle_input_error(err, operation, **context)
        if isinstance(err, ValidationError):
            return cls.handle_validation_error(err, **context)
        return cls.handle_unexpected_error(err, operation, **context)
