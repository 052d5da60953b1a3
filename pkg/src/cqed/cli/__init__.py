"""Command-line parameter handling and the bundled scripts."""

from .parameters import (HelpRequested, ParameterTable, UsageError, parse_complex, print_help,
                         update)

__all__ = ["HelpRequested", "ParameterTable", "UsageError", "parse_complex", "print_help",
           "update"]
