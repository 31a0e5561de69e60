"""Real-valued barycentric models.

This module contains BarycentricModel, the rational function

    Ĥ(s) = Σᵢ [hᵢwᵢ/(s − jλᵢ) + (hᵢwᵢ)*/(s + jλᵢ)] / Σᵢ [wᵢ/(s − jλᵢ) + wᵢ*/(s + jλᵢ)]

whose conjugate-mirrored terms make the impulse response real, plus its descriptor realizations, and
pole, zero and residue extraction. Poles and zeros always come from structured pencils; polynomial
coefficients are never formed.

Important:
    Pencils are solved in the all-real realization so that LAPACK returns exact conjugate pairs.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Final, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from ..config.numerics import (
    CONJUGATE_TOL,
    INFINITE_BETA_TOL,
    INFINITE_RATIO,
    POLE_SEPARATION_TOL,
    WEIGHT_ZERO_TOL,
)
from ..core.errors import DataValidationError, EigenSolverError, PoleEvaluationError

logger = logging.getLogger(__name__)

K2: Final[np.ndarray] = np.array([[0.0, -1.0], [1.0, 0.0]])
SQRT2: Final[float] = math.sqrt(2.0)

ComplexLike = Union[complex, np.ndarray, Sequence[complex]]


@dataclass(frozen=True, eq=False)
class BarycentricModel:
    """Support frequencies λᵢ, values hᵢ and complex weights wᵢ of the real barycentric form.

    A model with k = 0 is the constant ``constant`` (the AAA initialization).
    """

    support: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    constant: float = 0.0

    def __post_init__(self) -> None:
        support = np.array(self.support, dtype=float).ravel()
        values = np.array(self.values, dtype=complex).ravel()
        weights = np.array(self.weights, dtype=complex).ravel()
        if not (support.size == values.size == weights.size):
            raise DataValidationError(
                f"support, values and weights differ in length: {support.size}, {values.size}, {weights.size}"
            )
        if np.any(support <= 0):
            raise DataValidationError("support frequencies must be positive")
        if np.unique(support).size != support.size:
            raise DataValidationError("support frequencies must be distinct")
        for name, array in (("support", support), ("values", values), ("weights", weights)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def from_real_weights(cls, support, values, x: np.ndarray) -> "BarycentricModel":
        """Assemble wᵢ = x[2i] + j·x[2i+1] from the stacked real unknowns [α₁, β₁, …]."""
        x = np.asarray(x, dtype=float)
        return cls(support, values, x[0::2] + 1j * x[1::2])

    @property
    def k(self) -> int:
        return int(self.support.size)

    @property
    def real_weights(self) -> np.ndarray:
        """Weights stacked as [α₁, β₁, …, α_k, β_k]."""
        x = np.empty(2 * self.k)
        x[0::2] = self.weights.real
        x[1::2] = self.weights.imag
        return x

    def with_weights(self, weights: np.ndarray) -> "BarycentricModel":
        return replace(self, weights=np.asarray(weights, dtype=complex))

    def __call__(self, s: ComplexLike) -> Union[complex, np.ndarray]:
        return evaluate(self, s)


@dataclass(frozen=True, eq=False)
class DescriptorRealization:
    """Descriptor system (E, A, B, C) with transfer function C(sE − A)⁻¹B."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    field_kind: str = "complex"

    @property
    def order(self) -> int:
        return int(self.A.shape[0])

    def transfer(self, s: ComplexLike) -> Union[complex, np.ndarray]:
        return descriptor_transfer(self, s)


@dataclass(frozen=True, eq=False)
class PoleSet:
    """Finite poles (with optional residues) and the number of infinite eigenvalues of a pencil.

    ``constant`` is the limit of the model at infinity, so that
    constant + Σ rᵢ/(s − pᵢ) reproduces the model when residues are present.
    """

    finite_poles: np.ndarray
    infinite_count: int
    residues: Optional[np.ndarray] = None
    constant: float = 0.0
    expected_count: Optional[int] = None

    @property
    def count(self) -> int:
        return int(self.finite_poles.size)

    @property
    def count_deficit(self) -> int:
        if self.expected_count is None:
            return 0
        return self.expected_count - self.count

    def partial_fractions(self, s: ComplexLike) -> Union[complex, np.ndarray]:
        if self.residues is None:
            raise DataValidationError("pole set carries no residues")
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.constant + (1.0 / (s_arr[:, None] - self.finite_poles[None, :])) @ self.residues
        return out if np.ndim(s) else complex(out[0])


def _nodes(m: BarycentricModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mirrored nodes ±jλᵢ with their values and weights, the near-zero weights set to 0."""
    z = np.concatenate([1j * m.support, -1j * m.support])
    h = np.concatenate([m.values, m.values.conj()])
    w = np.concatenate([m.weights, m.weights.conj()])
    w = np.where(np.abs(w) < WEIGHT_ZERO_TOL * np.linalg.norm(m.weights), 0.0, w)
    return z, h, w


def weight_diagnostics(m: BarycentricModel) -> np.ndarray:
    """Indices of weights below 1e-14·‖w‖; those support points no longer interpolate."""
    if m.k == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(np.abs(m.weights) < WEIGHT_ZERO_TOL * np.linalg.norm(m.weights))


def evaluate(m: BarycentricModel, s: ComplexLike) -> Union[complex, np.ndarray]:
    """Evaluate Ĥ(s) = N(s)/D(s).

    Support points return the stored hᵢ (or hᵢ* at −jλᵢ) without forming the 0/0 limit.

    Args:
        m: Barycentric model.
        s: Scalar or array of complex points.

    Returns:
        Model response with the shape of ``s``.

    Raises:
        PoleEvaluationError: If D(s) vanishes at a point that is not a support point.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if m.k == 0:
        out = np.full(s_arr.shape, m.constant, dtype=complex)
        return out if np.ndim(s) else complex(out[0])

    z, h, w = _nodes(m)
    diff = s_arr[:, None] - z[None, :]
    exact = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        cauchy = np.where(exact, 0.0, 1.0 / np.where(exact, 1.0, diff))
        num = cauchy @ (h * w)
        den = cauchy @ w
        out = num / den

    hit_rows, hit_cols = np.nonzero(exact & (w != 0)[None, :])
    out[hit_rows] = h[hit_cols]
    interpolated = np.zeros(s_arr.size, dtype=bool)
    interpolated[hit_rows] = True

    vanishing = (den == 0) & ~interpolated
    if np.any(vanishing):
        raise PoleEvaluationError(
            "barycentric denominator vanishes away from the support points",
            {"points": s_arr[vanishing].tolist()},
        )
    return out if np.ndim(s) else complex(out[0])


def evaluate_denominator(m: BarycentricModel, s: ComplexLike) -> Union[complex, np.ndarray]:
    """D(s) = Σᵢ wᵢ/(s − jλᵢ) + wᵢ*/(s + jλᵢ), with the same near-zero weights dropped as in evaluate.

    Raises:
        DataValidationError: If s coincides with a support point ±jλᵢ.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    z, _, w = _nodes(m)
    diff = s_arr[:, None] - z[None, :]
    if np.any(diff == 0):
        raise DataValidationError("the denominator is undefined at the support points")
    out = (1.0 / diff) @ w
    return out if np.ndim(s) else complex(out[0])


def evaluate_numerator(m: BarycentricModel, s: ComplexLike) -> Union[complex, np.ndarray]:
    """N(s) = Σᵢ hᵢwᵢ/(s − jλᵢ) + (hᵢwᵢ)*/(s + jλᵢ), weights thresholded as in evaluate."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    z, h, w = _nodes(m)
    out = (1.0 / (s_arr[:, None] - z[None, :])) @ (h * w)
    return out if np.ndim(s) else complex(out[0])


def _denominator_derivative(m: BarycentricModel, s: np.ndarray) -> np.ndarray:
    z, _, w = _nodes(m)
    return -(1.0 / (s[:, None] - z[None, :]) ** 2) @ w


def _require_order(m: BarycentricModel) -> None:
    if m.k < 1:
        raise DataValidationError("operation requires at least one support point")


def build_descriptor_realization(m: BarycentricModel) -> DescriptorRealization:
    """Complex descriptor realization of size 2k+1.

    Λ = diag(jλ₁, −jλ₁, …, 1), B = [w₁, w₁*, …, 1]ᵀ, C = [h₁, h₁*, …, 0], R = ones,
    A = Λ − B·R and E = diag(1, …, 1, 0).
    """
    _require_order(m)
    n = 2 * m.k + 1
    lam = np.empty(n, dtype=complex)
    lam[0:-1:2], lam[1:-1:2], lam[-1] = 1j * m.support, -1j * m.support, 1.0
    B = np.empty(n, dtype=complex)
    B[0:-1:2], B[1:-1:2], B[-1] = m.weights, m.weights.conj(), 1.0
    C = np.zeros(n, dtype=complex)
    C[0:-1:2], C[1:-1:2] = m.values, m.values.conj()
    A = np.diag(lam) - np.outer(B, np.ones(n))
    E = np.diag(np.r_[np.ones(n - 1), 0.0]).astype(complex)
    return DescriptorRealization(E=E, A=A, B=B, C=C, field_kind="complex")


def build_unit_input_realization(m: BarycentricModel) -> DescriptorRealization:
    """Variant with unit input map: B = ones, R = [w₁, w₁*, …, 1], C = [h₁w₁, (h₁w₁)*, …, 0]."""
    _require_order(m)
    n = 2 * m.k + 1
    lam = np.empty(n, dtype=complex)
    lam[0:-1:2], lam[1:-1:2], lam[-1] = 1j * m.support, -1j * m.support, 1.0
    R = np.empty(n, dtype=complex)
    R[0:-1:2], R[1:-1:2], R[-1] = m.weights, m.weights.conj(), 1.0
    hw = m.values * m.weights
    C = np.zeros(n, dtype=complex)
    C[0:-1:2], C[1:-1:2] = hw, hw.conj()
    B = np.ones(n, dtype=complex)
    A = np.diag(lam) - np.outer(B, R)
    E = np.diag(np.r_[np.ones(n - 1), 0.0]).astype(complex)
    return DescriptorRealization(E=E, A=A, B=B, C=C, field_kind="complex")


def build_real_realization(m: BarycentricModel) -> DescriptorRealization:
    """All-real realization obtained by the block similarity J = blkdiag(J₂, …, 1).

    B = √2[Re w₁, Im w₁, …, 1]ᵀ (last entry 1), C = √2[Re h₁, −Im h₁, …, 0],
    R = [√2, 0, …, 1], Λ = blkdiag(K₂λ₁, …, 1) and A = Λ − B·R. No complex arithmetic is used.
    """
    _require_order(m)
    k = m.k
    n = 2 * k + 1
    lam_real = np.zeros((n, n))
    for i, lam_i in enumerate(m.support):
        lam_real[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = K2 * lam_i
    lam_real[-1, -1] = 1.0

    B = np.empty(n)
    B[0:-1:2], B[1:-1:2], B[-1] = SQRT2 * m.weights.real, SQRT2 * m.weights.imag, 1.0
    C = np.zeros(n)
    C[0:-1:2], C[1:-1:2] = SQRT2 * m.values.real, -SQRT2 * m.values.imag
    R = np.zeros(n)
    R[0:-1:2], R[-1] = SQRT2, 1.0

    A = lam_real - np.outer(B, R)
    E = np.diag(np.r_[np.ones(n - 1), 0.0])
    return DescriptorRealization(E=E, A=A, B=B, C=C, field_kind="real")


def descriptor_transfer(real: DescriptorRealization, s: ComplexLike) -> Union[complex, np.ndarray]:
    """C(sE − A)⁻¹B by one dense solve per point."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty(s_arr.size, dtype=complex)
    for idx, point in enumerate(s_arr):
        out[idx] = real.C @ scipy.linalg.solve(point * real.E - real.A, real.B.astype(complex))
    return out if np.ndim(s) else complex(out[0])


def denominator_matrices(m: BarycentricModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimal realization of D(s): 𝒜 = blkdiag([[0, λᵢ], [−λᵢ, 0]]), ℬᵢ = [2, 0]ᵀ, 𝒞 = [α₁, β₁, …]."""
    _require_order(m)
    k = m.k
    A = np.zeros((2 * k, 2 * k))
    for i, lam_i in enumerate(m.support):
        A[2 * i, 2 * i + 1] = lam_i
        A[2 * i + 1, 2 * i] = -lam_i
    B = np.zeros(2 * k)
    B[0::2] = 2.0
    return A, B, m.real_weights


def finite_generalized_eigenvalues(A: np.ndarray, E: np.ndarray) -> Tuple[np.ndarray, int]:
    """Finite eigenvalues of the pencil (A, E) and the count of infinite ones.

    An eigenvalue is infinite when |β| < 1e-12·(‖A‖ + ‖E‖) in the homogeneous (α, β) output, or when
    its magnitude exceeds 1e12 times the median finite magnitude.
    """
    try:
        alpha, beta = scipy.linalg.eig(A, E, right=False, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(
            f"generalized eigensolver failed: {e}",
            {"order": int(A.shape[0]), "norm_A": float(np.linalg.norm(A)), "norm_E": float(np.linalg.norm(E))},
        ) from e

    scale = np.linalg.norm(A) + np.linalg.norm(E)
    finite = np.abs(beta) >= INFINITE_BETA_TOL * scale
    eigs = alpha[finite] / beta[finite]
    if eigs.size:
        median = np.median(np.abs(eigs))
        if median > 0:
            eigs = eigs[np.abs(eigs) <= INFINITE_RATIO * median]
    if not np.all(np.isfinite(eigs)):
        raise EigenSolverError("non-finite generalized eigenvalues", {"eigenvalues": eigs.tolist()})

    order = np.lexsort((eigs.imag, eigs.real))
    return eigs[order], int(A.shape[0] - eigs.size)


def poles(m: BarycentricModel) -> PoleSet:
    """Finite poles from the (2k+1)-pencil of the real realization; generically 2k−1 of them."""
    _require_order(m)
    real = build_real_realization(m)
    finite, infinite = finite_generalized_eigenvalues(real.A, real.E)

    expected = 2 * m.k - 1
    if finite.size != expected:
        logger.warning(f"Pencil returned {finite.size} finite poles, expected {expected} for k={m.k}")
    if finite.size:
        mirrored = np.sort_complex(finite.conj())
        if np.max(np.abs(np.sort_complex(finite) - mirrored)) > CONJUGATE_TOL * np.max(np.abs(finite)):
            logger.warning("Finite poles are not closed under conjugation within tolerance")
    return PoleSet(finite_poles=finite, infinite_count=infinite, expected_count=expected)


def denominator_zeros(m: BarycentricModel) -> np.ndarray:
    """Zeros of D(s) from the pencil ([[𝒜, ℬ], [𝒞, 0]], diag(I, 0))."""
    A, B, C = denominator_matrices(m)
    n = A.shape[0]
    pencil_A = np.zeros((n + 1, n + 1))
    pencil_A[:n, :n], pencil_A[:n, n], pencil_A[n, :n] = A, B, C
    pencil_E = np.diag(np.r_[np.ones(n), 0.0])
    zeros, _ = finite_generalized_eigenvalues(pencil_A, pencil_E)
    return zeros


def feedthrough(m: BarycentricModel) -> float:
    """lim Ĥ(s) as s → ∞, i.e. Σ Re(hᵢwᵢ) / Σ αᵢ."""
    if m.k == 0:
        return m.constant
    alpha_sum = float(np.sum(m.weights.real))
    if abs(alpha_sum) <= WEIGHT_ZERO_TOL * float(np.sum(np.abs(m.weights))):
        logger.warning("Σαᵢ vanishes; the model is not proper and its constant term is set to 0")
        return 0.0
    return float(np.sum((m.values * m.weights).real)) / alpha_sum


def pole_residue(m: BarycentricModel) -> PoleSet:
    """Poles with residues rᵢ = N(pᵢ)/D'(pᵢ) and the constant term.

    Residues are returned even when poles cluster; a warning is logged in that case.
    """
    pole_set = poles(m)
    p = pole_set.finite_poles
    if p.size > 1:
        gaps = np.abs(p[:, None] - p[None, :]) + np.diag(np.full(p.size, np.inf))
        if np.min(gaps) < POLE_SEPARATION_TOL * np.max(np.abs(p)):
            logger.warning(f"Clustered poles (min separation {np.min(gaps):.3e}); residues are ill-conditioned")
    residues = np.atleast_1d(evaluate_numerator(m, p)) / _denominator_derivative(m, p) if p.size else p.copy()
    return PoleSet(
        finite_poles=p,
        infinite_count=pole_set.infinite_count,
        residues=residues,
        constant=feedthrough(m),
        expected_count=pole_set.expected_count,
    )
