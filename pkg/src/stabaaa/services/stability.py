"""Stability classification and minimum-phase certificates of the barycentric denominator.

This module contains the minimal state-space realization of the denominator D(s), its change of
variables through the thin SVD of the quasi-Loewner matrix, the pole-based stability verdict, and a
KYP feasibility check that certifies strict positive realness of the denominator under constant
output feedback.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from ..config.numerics import BORDERLINE_REAL_PART, RANK_TOL, SPR_EQUALITY_TOL, SPR_GAIN_GRID
from ..core.errors import ConditioningError, DataValidationError
from .backends import SdpSettings
from .barycentric import BarycentricModel, PoleSet, denominator_matrices, poles
from .interior_point import STATUS_INFEASIBLE, LmiProgram
from .loewner import RealQuasiLoewner

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DenominatorRealization:
    """(𝒜, ℬ, 𝒞) with 𝒞(sI − 𝒜)⁻¹ℬ = D(s); 𝒜 is block-diagonal and skew-symmetric."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def order(self) -> int:
        return int(self.A.shape[0])

    @property
    def cb(self) -> float:
        return float(self.C @ self.B)

    def transfer(self, s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        eye = np.eye(self.order)
        out = np.array([self.C @ scipy.linalg.solve(point * eye - self.A, self.B.astype(complex)) for point in s_arr])
        return out if np.ndim(s) else complex(out[0])


@dataclass(frozen=True, eq=False)
class TransformedDenominator:
    """Denominator in the coordinates T = VΣ of the thin SVD 𝕃_real = UΣVᵀ.

    Ã = T⁻¹𝒜T, B̃ = T⁻¹ℬ and x̄ = ΣVᵀx_opt. T is kept factored as (V, sigma).
    """

    A_t: np.ndarray
    B_t: np.ndarray
    xbar: np.ndarray
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    source: DenominatorRealization

    @property
    def T(self) -> np.ndarray:
        return self.V * self.sigma[None, :]

    def transform_output(self, C: np.ndarray) -> np.ndarray:
        """C̃ = C·T."""
        return (np.asarray(C) @ self.V) * self.sigma

    def restore_output(self, C_t: np.ndarray) -> np.ndarray:
        """C = C̃·T⁻¹ = C̃·Σ⁻¹·Vᵀ, by diagonal scaling and an orthogonal product."""
        return (np.asarray(C_t) / self.sigma) @ self.V.T


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Pole-based stability verdict; stable ⇔ margin < 0.

    ``characterization`` is ``"iff"`` when exactly 2k − 1 finite poles were found and
    ``"sufficient"`` otherwise (a pole-zero cancellation may hide denominator zeros).
    """

    stable: bool
    finite_poles: PoleSet
    unstable_poles: np.ndarray
    borderline_poles: np.ndarray
    margin: float
    cb: float

    @property
    def cb_sign(self) -> int:
        return int(np.sign(self.cb))

    @property
    def pole_count_deficit(self) -> int:
        return self.finite_poles.count_deficit

    @property
    def characterization(self) -> str:
        return "iff" if self.pole_count_deficit == 0 else "sufficient"

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "margin": self.margin if np.isfinite(self.margin) else None,
            "poles": [[p.real, p.imag] for p in self.finite_poles.finite_poles],
            "unstable_poles": [[p.real, p.imag] for p in self.unstable_poles],
            "borderline_poles": [[p.real, p.imag] for p in self.borderline_poles],
            "cb": self.cb,
            "cb_sign": self.cb_sign,
            "infinite_count": self.finite_poles.infinite_count,
            "pole_count_deficit": self.pole_count_deficit,
            "characterization": self.characterization,
        }


@dataclass(frozen=True, eq=False)
class SprCertificate:
    """KYP matrix P ≻ 0 with PA_cl + A_clᵀP ≺ 0 and PB = Cᵀ for A_cl = A − gBC."""

    P: np.ndarray
    g: float
    margin: float
    kyp_max_eig: float
    p_min_eig: float
    equality_residual: float

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "margin": self.margin,
            "kyp_max_eig": self.kyp_max_eig,
            "p_min_eig": self.p_min_eig,
            "equality_residual": self.equality_residual,
        }


def build_denominator_realization(m: BarycentricModel) -> DenominatorRealization:
    """𝒜 = blkdiag([[0, λᵢ], [−λᵢ, 0]]), ℬ = [2, 0, 2, 0, …]ᵀ, 𝒞 = [α₁, β₁, …, α_k, β_k]."""
    A, B, C = denominator_matrices(m)
    return DenominatorRealization(A=A, B=B, C=C)


def transform_denominator(
    den: DenominatorRealization, M: RealQuasiLoewner, x_opt: np.ndarray
) -> TransformedDenominator:
    """Change of variables T = VΣ from the thin SVD of the quasi-Loewner matrix.

    Raises:
        ConditioningError: If σ_min/σ_max ≤ 1e-14 (T is not invertible); a larger tolerance
            gives fewer support points and a better conditioned matrix.
    """
    matrix = M.M if isinstance(M, RealQuasiLoewner) else np.asarray(M, dtype=float)
    if matrix.shape[1] != den.order:
        raise DataValidationError(f"quasi-Loewner matrix has {matrix.shape[1]} columns for order {den.order}")
    if matrix.shape[0] < matrix.shape[1]:
        raise ConditioningError("quasi-Loewner matrix has fewer rows than columns", {"shape": list(matrix.shape)})

    U, sigma, Vh = scipy.linalg.svd(matrix, full_matrices=False)
    ratio = sigma[-1] / sigma[0] if sigma[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise ConditioningError(
            f"quasi-Loewner matrix is rank deficient (σ_min/σ_max = {ratio:.3e}); retry with a larger tolerance",
            {"sigma_min": float(sigma[-1]), "sigma_max": float(sigma[0]), "ratio": float(ratio)},
        )

    A_t = (Vh @ den.A @ Vh.T) * sigma[None, :] / sigma[:, None]
    B_t = (Vh @ den.B) / sigma
    xbar = sigma * (Vh @ np.asarray(x_opt, dtype=float))
    return TransformedDenominator(A_t=A_t, B_t=B_t, xbar=xbar, U=U, sigma=sigma, V=Vh.T, source=den)


def classify_stability(m: BarycentricModel) -> StabilityReport:
    """Stable iff every finite pole has a strictly negative real part.

    Poles with |Re p| < 1e-10 are listed as borderline; they do not change the verdict.
    """
    pole_set = poles(m)
    p = pole_set.finite_poles
    margin = float(np.max(p.real)) if p.size else -np.inf
    report = StabilityReport(
        stable=bool(margin < 0),
        finite_poles=pole_set,
        unstable_poles=p[p.real >= 0],
        borderline_poles=p[np.abs(p.real) < BORDERLINE_REAL_PART],
        margin=margin,
        cb=2.0 * float(np.sum(m.weights.real)),
    )
    if report.borderline_poles.size:
        logger.warning(f"{report.borderline_poles.size} pole(s) within {BORDERLINE_REAL_PART:g} of the imaginary axis")
    if report.pole_count_deficit:
        logger.warning(f"Pole count deviates from 2k-1 by {report.pole_count_deficit}; verdict is sufficient only")
    logger.info(f"Stability: {'stable' if report.stable else 'unstable'}, margin {margin:.3e}, k={m.k}")
    return report


def _kyp_program(A_cl: np.ndarray, B: np.ndarray, C: np.ndarray):
    """Maximize t over P = P₀ + N·Z·Nᵀ (so PB = Cᵀ holds exactly) with P ⪰ tI, −(A_clᵀP + PA_cl) ⪰ tI, t ≤ 1."""
    n = A_cl.shape[0]
    bb = float(B @ B)
    P0 = (np.outer(C, B) + np.outer(B, C)) / bb - float(C @ B) * np.outer(B, B) / bb**2
    N = scipy.linalg.null_space(B[None, :])

    rows, cols = np.triu_indices(n - 1)
    m = rows.size + 1
    p_stack = np.zeros((m + 1, n, n))
    kyp_stack = np.zeros((m + 1, n, n))
    cap_stack = np.zeros((m + 1, 1, 1))

    p_stack[0] = P0
    kyp_stack[0] = -(A_cl.T @ P0 + P0 @ A_cl)
    cap_stack[0, 0, 0] = 1.0
    for idx, (a, b) in enumerate(zip(rows, cols), start=1):
        E = np.outer(N[:, a], N[:, b])
        E = E + E.T if a != b else E
        p_stack[idx] = E
        kyp_stack[idx] = -(A_cl.T @ E + E @ A_cl)
    p_stack[m] = -np.eye(n)
    kyp_stack[m] = -np.eye(n)
    cap_stack[m, 0, 0] = -1.0

    c = np.zeros(m)
    c[-1] = -1.0
    program = LmiProgram(c=c, blocks=(p_stack, kyp_stack, cap_stack), labels=("P", "KYP", "cap"))
    return program, P0, N, (rows, cols)


def verify_spr(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    g: float,
    settings: Optional[SdpSettings] = None,
) -> Optional[SprCertificate]:
    """Certify that (A − gBC, B, C) is strictly positive real.

    The closed loop is first checked for CB > 0 and a Hurwitz state matrix. The KYP conditions are then
    solved as an LMI with PB = Cᵀ eliminated by substitution and margin δ = 1e-8·max(1, ‖A_cl‖_F).

    Returns:
        The certificate, or None when the closed loop is not SPR.

    Raises:
        SdpNumericalError: If the LMI solver breaks down.
    """
    settings = settings or SdpSettings()
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).ravel()
    C = np.asarray(C, dtype=float).ravel()
    if float(C @ B) <= 0:
        logger.debug(f"verify_spr: CB = {float(C @ B):.3e} is not positive")
        return None

    A_cl = A - g * np.outer(B, C)
    spectral_abscissa = float(np.max(np.linalg.eigvals(A_cl).real))
    if spectral_abscissa >= 0:
        logger.debug(f"verify_spr: closed loop with g={g:g} is not Hurwitz ({spectral_abscissa:.3e})")
        return None

    delta = settings.margin_scale * max(1.0, float(np.linalg.norm(A_cl)))
    program, P0, N, (rows, cols) = _kyp_program(A_cl, B, C)
    result = settings.make_backend().solve(program)
    if result.status == STATUS_INFEASIBLE:
        return None

    t = float(result.y[-1])
    Z = np.zeros((N.shape[1], N.shape[1]))
    Z[rows, cols] = result.y[:-1]
    Z = Z + np.triu(Z, 1).T
    P = P0 + N @ Z @ N.T
    P = 0.5 * (P + P.T)

    if t < delta:
        logger.debug(f"verify_spr: best KYP margin {t:.3e} below δ={delta:.1e} for g={g:g}")
        return None

    certificate = SprCertificate(
        P=P,
        g=float(g),
        margin=t,
        kyp_max_eig=float(np.linalg.eigvalsh(A_cl.T @ P + P @ A_cl)[-1]),
        p_min_eig=float(np.linalg.eigvalsh(P)[0]),
        equality_residual=float(np.linalg.norm(P @ B - C)),
    )
    if certificate.equality_residual > SPR_EQUALITY_TOL * max(1.0, float(np.linalg.norm(C))):
        logger.warning(f"KYP equality residual {certificate.equality_residual:.2e} exceeds tolerance")
    return certificate


def aspr_gain_sweep(
    den: DenominatorRealization,
    grid: Sequence[float] = SPR_GAIN_GRID,
    settings: Optional[SdpSettings] = None,
) -> Optional[SprCertificate]:
    """First gain of ``grid`` for which the closed-loop denominator is SPR, or None."""
    for g in grid:
        certificate = verify_spr(den.A, den.B, den.C, g, settings)
        if certificate is not None:
            logger.info(f"Denominator is SPR under output feedback g={g:g}")
            return certificate
    logger.info("No gain on the grid makes the denominator SPR")
    return None
