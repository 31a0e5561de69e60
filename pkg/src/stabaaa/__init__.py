"""Stable rational approximation of frequency-response data.

The numerical services live in ``stabaaa.services``; ``stabaaa.main`` is the command line.
"""

from .services.aaa import aaa_fit
from .services.datamodel import FrequencyDataset, load_dataset, normalize
from .services.stabaaa import StabAaaConfig, stabaaa_fit, truncate_refit

__version__ = "0.1.0"
