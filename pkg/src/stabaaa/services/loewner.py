"""Loewner matrices, the Loewner-framework baseline model and the real quasi-Loewner matrix.

This module contains the complex Loewner / shifted-Loewner pair built from a left/right split of
the samples, the SVD-projected descriptor model derived from it, and the real-valued quasi-Loewner
matrix whose least singular vector gives the AAA weights. The quasi-Loewner builder is the only
place its entry formulas exist.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numba
import numpy as np
import scipy.linalg

from ..config.numerics import LOEWNER_RANK_TOL
from ..core.errors import DataValidationError, DegenerateDataError
from .barycentric import DescriptorRealization
from .datamodel import FrequencyDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LoewnerPair:
    """Loewner matrix L, shifted Loewner matrix Ls and the data they were built from.

    Rows belong to the left points jμᵢ (values 𝕍), columns to the right points jη_l (values 𝕎).
    """

    L: np.ndarray
    Ls: np.ndarray
    left_freqs: np.ndarray
    right_freqs: np.ndarray
    V: np.ndarray
    W: np.ndarray


@dataclass(frozen=True, eq=False)
class RealQuasiLoewner:
    """Real matrix of shape 2(V−ℓ)×2ℓ; rows [real-part equations; imaginary-part equations]."""

    M: np.ndarray
    support_freqs: np.ndarray
    support_values: np.ndarray
    test_freqs: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape


def _check_disjoint(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if np.intersect1d(a, b).size:
        raise DataValidationError(f"{what} share the frequency {np.intersect1d(a, b)[0]!r}; division by zero")


def loewner_pair(
    left_freqs: np.ndarray, left_values: np.ndarray, right_freqs: np.ndarray, right_values: np.ndarray
) -> LoewnerPair:
    """Build L(i,l) = (vᵢ − w_l)/(jμᵢ − jη_l) and Ls(i,l) = (jμᵢvᵢ − jη_l w_l)/(jμᵢ − jη_l).

    Raises:
        DataValidationError: If a left point coincides with a right point.
    """
    mu = np.asarray(left_freqs, dtype=float)
    eta = np.asarray(right_freqs, dtype=float)
    v = np.asarray(left_values, dtype=complex)
    w = np.asarray(right_values, dtype=complex)
    _check_disjoint(mu, eta, "left and right sets")

    denom = 1j * mu[:, None] - 1j * eta[None, :]
    L = (v[:, None] - w[None, :]) / denom
    Ls = (1j * mu[:, None] * v[:, None] - 1j * eta[None, :] * w[None, :]) / denom
    return LoewnerPair(L=L, Ls=Ls, left_freqs=mu, right_freqs=eta, V=v, W=w)


def partition_alternating(ds: FrequencyDataset) -> Tuple[np.ndarray, np.ndarray]:
    """Even sample indices go left, odd go right; a trailing unmatched left point is dropped."""
    left = np.arange(0, ds.count, 2)
    right = np.arange(1, ds.count, 2)
    return left[: right.size], right


def loewner_rom(pair: LoewnerPair, rank_tol: float = LOEWNER_RANK_TOL) -> DescriptorRealization:
    """Descriptor model E = −L, A = −Ls, B = 𝕍, C = 𝕎, projected onto its numerical rank.

    The left basis comes from the SVD of [L, Ls], the right basis from the SVD of [L; Ls]; both are
    truncated to the singular values above rank_tol·σ₁.

    Raises:
        DataValidationError: If the left and right sets differ in size.
        DegenerateDataError: If L vanishes or no singular value survives truncation.
    """
    if pair.L.shape[0] != pair.L.shape[1]:
        raise DataValidationError(f"left/right sets must have equal size, got {pair.L.shape}")

    scale = max(np.linalg.norm(pair.L), np.linalg.norm(pair.Ls))
    if scale == 0.0 or np.linalg.norm(pair.L) <= rank_tol * scale:
        raise DegenerateDataError("Loewner matrix vanishes; the data are constant")

    Y, sigma_row, _ = scipy.linalg.svd(np.hstack([pair.L, pair.Ls]), full_matrices=False)
    _, sigma_col, Xh = scipy.linalg.svd(np.vstack([pair.L, pair.Ls]), full_matrices=False)
    rank = min(
        int(np.count_nonzero(sigma_row > rank_tol * sigma_row[0])),
        int(np.count_nonzero(sigma_col > rank_tol * sigma_col[0])),
    )
    if rank == 0:
        raise DegenerateDataError("all singular values fall below the truncation tolerance")
    logger.info(f"Loewner model truncated to order {rank} of {pair.L.shape[0]}")

    Yr = Y[:, :rank]
    Xr = Xh[:rank].conj().T
    return DescriptorRealization(
        E=-(Yr.conj().T @ pair.L @ Xr),
        A=-(Yr.conj().T @ pair.Ls @ Xr),
        B=Yr.conj().T @ pair.V,
        C=pair.W @ Xr,
        field_kind="complex",
    )


def loewner_fit(ds: FrequencyDataset, rank_tol: float = LOEWNER_RANK_TOL) -> DescriptorRealization:
    left, right = partition_alternating(ds)
    pair = loewner_pair(ds.freqs[left], ds.values[left], ds.freqs[right], ds.values[right])
    return loewner_rom(pair, rank_tol)


@numba.njit(cache=False)
def _quasi_loewner_entries(lam, h_re, h_im, zeta, H_re, H_im):  # pragma: no cover - compiled
    n_test = zeta.size
    n_sup = lam.size
    M = np.empty((2 * n_test, 2 * n_sup))
    for l in range(n_test):
        a = H_re[l]
        b = H_im[l]
        for i in range(n_sup):
            c = h_re[i]
            d = h_im[i]
            minus = 1.0 / (zeta[l] - lam[i])
            plus = 1.0 / (zeta[l] + lam[i])
            M[l, 2 * i] = (b - d) * minus + (b + d) * plus
            M[l, 2 * i + 1] = (a - c) * (minus - plus)
            M[n_test + l, 2 * i] = -(a - c) * (minus + plus)
            M[n_test + l, 2 * i + 1] = (b - d) * minus - (b + d) * plus
    return M


def real_quasi_loewner(
    support_freqs: np.ndarray, support_values: np.ndarray, test_freqs: np.ndarray, test_values: np.ndarray
) -> RealQuasiLoewner:
    """Real quasi-Loewner matrix of the linearized error.

    For x = [α₁, β₁, …, α_ℓ, β_ℓ] and wᵢ = αᵢ + jβᵢ, M·x stacks the real and imaginary parts of

        E(jζ) = Σᵢ (H(jζ) − hᵢ)·wᵢ/(jζ − jλᵢ) + (H(jζ) − hᵢ*)·wᵢ*/(jζ + jλᵢ)

    over the test points ζ_l.

    Raises:
        DataValidationError: If a support frequency equals a test frequency.
    """
    lam = np.ascontiguousarray(support_freqs, dtype=float)
    zeta = np.ascontiguousarray(test_freqs, dtype=float)
    h = np.asarray(support_values, dtype=complex)
    H = np.asarray(test_values, dtype=complex)
    _check_disjoint(lam, zeta, "support and test sets")

    M = _quasi_loewner_entries(
        lam,
        np.ascontiguousarray(h.real),
        np.ascontiguousarray(h.imag),
        zeta,
        np.ascontiguousarray(H.real),
        np.ascontiguousarray(H.imag),
    )
    return RealQuasiLoewner(M=M, support_freqs=lam, support_values=h, test_freqs=zeta)


def dump_loewner_csv(pair: LoewnerPair, directory: Union[str, Path]) -> None:
    """Write Re/Im parts of L and Ls as CSV files for debugging."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, matrix in (("L", pair.L), ("Ls", pair.Ls)):
        np.savetxt(directory / f"{name}_re.csv", matrix.real, delimiter=",", fmt="%.17g")
        np.savetxt(directory / f"{name}_im.csv", matrix.imag, delimiter=",", fmt="%.17g")
