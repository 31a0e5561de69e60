"""
hash.py - Dataset fingerprints

Contains the SHA-256 fingerprint stored in every JSON artifact so that a model can be traced back to
the exact samples it was fitted on.
"""

import hashlib

import numpy as np

from ..services.datamodel import FrequencyDataset


def dataset_sha256(ds: FrequencyDataset) -> str:
    """Generate a SHA-256 hash of the dataset samples.

    Frequencies and the real and imaginary parts of the responses are hashed as little-endian float64
    in sample order, so the fingerprint does not depend on the CSV formatting of the source file.

    Args:
        ds: Dataset to fingerprint.

    Returns:
        A 64-character hexadecimal string.

    Examples:
        >>> from stabaaa.services.datamodel import FrequencyDataset
        >>> len(dataset_sha256(FrequencyDataset.from_samples([1.0, 2.0], [1 + 0j, 0.5j])))
        64
    """
    hash_object = hashlib.sha256()
    for array in (ds.freqs, ds.values.real, ds.values.imag):
        hash_object.update(np.ascontiguousarray(array, dtype="<f8").tobytes())
    return hash_object.hexdigest()
