"""Path configuration for CLI artifacts.

This module contains the default output locations and the artifact file names written by the
``fit``, ``poles``, ``compare`` and ``export`` commands.
"""

from pathlib import Path
from typing import Final

DEFAULT_OUTPUT_DIR: Final[Path] = Path("out")

# Artifact names
MODEL_FILE: Final[str] = "model.json"
STABILITY_FILE: Final[str] = "stability.json"
METRICS_FILE: Final[str] = "metrics.json"
PLOT_DATA_FILE: Final[str] = "plot_data.csv"
POLES_FILE: Final[str] = "poles.json"
POLES_CSV_FILE: Final[str] = "poles.csv"
COMPARE_FILE: Final[str] = "metrics.csv"
POLE_RESIDUE_FILE: Final[str] = "pole_residue.json"
SDPA_FILE: Final[str] = "stability_sdp.dat-s"
