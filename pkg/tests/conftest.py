"""Shared fixtures: seeded generators, sampled rational systems and small hand-built models."""

from pathlib import Path
from typing import Sequence

import numpy as np
import pytest

from stabaaa.services.barycentric import BarycentricModel
from stabaaa.services.datamodel import FrequencyDataset, write_dataset


def rational_response(poles: Sequence[complex], residues: Sequence[complex], constant: float, s: np.ndarray):
    """d + Σ rᵢ/(s − pᵢ); callers pass conjugate-closed poles and residues."""
    s = np.asarray(s, dtype=complex)
    poles = np.asarray(poles, dtype=complex)
    residues = np.asarray(residues, dtype=complex)
    return constant + (1.0 / (s[:, None] - poles[None, :])) @ residues


def sampled(func, freqs: np.ndarray, noise: float = 0.0, rng=None) -> FrequencyDataset:
    values = func(1j * freqs)
    if noise:
        values = values + noise * (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size))
    return FrequencyDataset(freqs, values)


def third_order(s):
    """1/(s+1) + (s+0.5)/(s² + 0.4s + 4): stable, odd degree."""
    return 1.0 / (s + 1.0) + (s + 0.5) / (s**2 + 0.4 * s + 4.0)


def third_order_unstable_pair(s):
    """1/(s+1) + (s+0.5)/(s² − 0.4s + 4): poles −1 and 0.2 ± j·1.99."""
    return 1.0 / (s + 1.0) + (s + 0.5) / (s**2 - 0.4 * s + 4.0)


def first_order_unstable(s):
    return 1.0 / (s - 0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def freqs() -> np.ndarray:
    return np.logspace(-1, 1, 40)


@pytest.fixture
def stable_ds(freqs) -> FrequencyDataset:
    return sampled(third_order, freqs)


@pytest.fixture
def unstable_pair_ds(freqs) -> FrequencyDataset:
    return sampled(third_order_unstable_pair, freqs)


@pytest.fixture
def noisy_unstable_ds(freqs, rng) -> FrequencyDataset:
    return sampled(first_order_unstable, freqs, noise=1e-3, rng=rng)


@pytest.fixture
def random_model(rng) -> BarycentricModel:
    k = 4
    support = np.sort(rng.uniform(0.2, 5.0, k))
    values = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    weights = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return BarycentricModel(support, values, weights / np.linalg.norm(weights))


@pytest.fixture
def stable_csv(tmp_path: Path, stable_ds) -> Path:
    path = tmp_path / "stable.csv"
    write_dataset(stable_ds, path, freq_unit="rad_s")
    return path


@pytest.fixture
def noisy_unstable_csv(tmp_path: Path, noisy_unstable_ds) -> Path:
    path = tmp_path / "unstable.csv"
    write_dataset(noisy_unstable_ds, path, freq_unit="rad_s")
    return path
