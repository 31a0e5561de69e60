"""
Message formatting utilities for error reporting.

This module provides functions for formatting framed error and warning messages printed by the
command line, and the plain-text metrics table shown after ``compare``.
"""

from dataclasses import dataclass
from typing import Mapping, Sequence, Union


@dataclass
class ErrorMessage:
    """Represents a formatted error message with header and border styling."""

    header: str
    error: Union[Exception, str]
    padding: int = 16
    border_char: str = "-"
    corner_char: str = "!"

    def __post_init__(self) -> None:
        if not isinstance(self.padding, int) or self.padding < 0:
            raise ValueError("Padding must be a non-negative integer")
        if not all(isinstance(char, str) and len(char) == 1 for char in (self.border_char, self.corner_char)):
            raise ValueError("Border and corner characters must be single characters")

    def format(self) -> str:
        """Format the message with borders and header.

        Returns:
            str: Formatted message with borders and header.
        """
        if isinstance(self.error, Exception):
            error_str = f"{type(self.error).__name__}: {self.error}"
        else:
            error_str = str(self.error) if self.error else "Unknown error"

        content_width = max(len(self.header) + 4, max(len(line) for line in error_str.splitlines() or [""]), 20)
        border = self.corner_char + self.border_char * (content_width + 2) + self.corner_char
        header_line = " " * self.padding + f"| {self.header} |" + " " * self.padding

        return f"\n{border}\n{header_line}\n{error_str}\n{border}\n"


def format_error_message(command: str, error: Union[Exception, str], padding: int = 16) -> str:
    """Create a framed error message with the failing command as header.

    Example:
        >>> print(format_error_message("fit", "bad input"))  # doctest: +NORMALIZE_WHITESPACE
        !----------------------!
                        | fit |
        bad input
        !----------------------!
    """
    return ErrorMessage(header=command, error=error, padding=padding).format()


def format_warning(message: str, padding: int = 16) -> str:
    return ErrorMessage(header="WARNING", error=message, padding=padding, border_char="~", corner_char="*").format()


def format_metrics_table(rows: Sequence[Mapping[str, object]], columns: Sequence[str]) -> str:
    """Align rows of metrics into a plain-text table; floats are printed in scientific notation."""

    def cell(value: object) -> str:
        if isinstance(value, float):
            return f"{value:.3e}"
        return str(value)

    table = [list(columns)] + [[cell(row.get(column, "")) for column in columns] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    lines = ["  ".join(text.ljust(width) for text, width in zip(line, widths)).rstrip() for line in table]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)
