"""CLI settings for stabaaa.

This module contains the accepted choices for command-line flags and their defaults.
"""

from typing import Dict, Final, Tuple

SCHEMA_VERSION: Final[int] = 1

# Environment
SEED_ENV_VAR: Final[str] = "STABAAA_SEED"
DEFAULT_SEED: Final[int] = 0

# Flag choices
ALGORITHMS: Final[Tuple[str, ...]] = ("aaa", "stabaaa", "loewner", "truncate-refit")
FREQ_UNITS: Final[Tuple[str, ...]] = ("hz", "rad_s")
ERROR_MODES: Final[Tuple[str, ...]] = ("abs", "rel")
REFIT_MODES: Final[Tuple[str, ...]] = ("truncate", "flip")
SDP_BACKENDS: Final[Tuple[str, ...]] = ("ipm", "cvxpy")

# Defaults
DEFAULT_ALGORITHM: Final[str] = "stabaaa"
DEFAULT_FREQ_UNIT: Final[str] = "hz"
DEFAULT_ERROR_MODE: Final[str] = "abs"
DEFAULT_TOL: Final[float] = 1e-3
DEFAULT_COMPARE: Final[str] = "aaa,stabaaa,truncate-refit"

# Exit codes
EXIT_OK: Final[int] = 0
EXIT_VALIDATION: Final[int] = 1
EXIT_NUMERICAL: Final[int] = 2
EXIT_TOLERANCE: Final[int] = 3
# 128 + SIGINT
EXIT_INTERRUPTED: Final[int] = 130

EXIT_CODE_NAMES: Final[Dict[int, str]] = {
    EXIT_OK: "ok",
    EXIT_VALIDATION: "validation error",
    EXIT_NUMERICAL: "numerical failure",
    EXIT_TOLERANCE: "tolerance not met",
    EXIT_INTERRUPTED: "interrupted",
}
