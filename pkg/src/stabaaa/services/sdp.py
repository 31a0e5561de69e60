"""Convex stability program on the transformed denominator and recovery of stabilized weights.

This module contains StabilitySdp,

    minimize r  subject to  Y ≻ 0,
                            ÃY + YÃᵀ − 2g·B̃B̃ᵀ ≺ 0,
                            [[r, (B̃ − Yx̄)ᵀ], [B̃ − Yx̄, Y]] ⪰ 0,

its solution through one of the LMI backends, and the map from an optimal (Y, g) back to barycentric
weights through C̃ᵀ = Y⁻¹B̃ and C = C̃·T⁻¹.

Important:
    The solver works on a normalized copy: Ã, B̃ and x̄ are divided by ‖Ã‖_F, ‖B̃‖ and ‖x̄‖.
    Y, g and r are mapped back before they leave this module.
    In those units g is boxed to [0, gain_bound] and the objective is r + gain_penalty·g, which picks
    the smallest feedback gain among the optimal Y.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO, Tuple, Union

import numpy as np
import scipy.linalg

from ..config.numerics import COND_LIMIT, SDP_POLISH_GAIN_STEPS, STABILIZABILITY_TOL
from ..core.errors import ConditioningError, SdpInfeasibleError, SdpNumericalError
from .backends import SdpBackend, SdpSettings
from .interior_point import STATUS_INFEASIBLE, STATUS_OPTIMAL, LmiProgram
from .stability import TransformedDenominator

logger = logging.getLogger(__name__)


def _unit_scale(value: float) -> float:
    return value if value > 0 else 1.0


@dataclass(frozen=True, eq=False)
class StabilitySdp:
    """Stability program in original coordinates plus the scales of its normalized copy.

    The decision vector of the normalized program is [upper triangle of Y (row-major), g, r].
    """

    A_t: np.ndarray
    B_t: np.ndarray
    xbar: np.ndarray
    a_scale: float
    b_scale: float
    c_scale: float
    delta_pd: float
    delta_lmi: float
    settings: SdpSettings

    @property
    def dim(self) -> int:
        return int(self.A_t.shape[0])

    @property
    def decision_size(self) -> int:
        return self.dim * (self.dim + 1) // 2 + 2

    @property
    def block_sizes(self) -> Tuple[int, int, int]:
        return self.dim, self.dim, self.dim + 1

    @property
    def A_n(self) -> np.ndarray:
        return self.A_t / self.a_scale

    @property
    def B_n(self) -> np.ndarray:
        return self.B_t / self.b_scale

    @property
    def xbar_n(self) -> np.ndarray:
        return self.xbar / self.c_scale

    def _triu(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.triu_indices(self.dim)

    def pack(self, Y: np.ndarray, g: float, r: float) -> np.ndarray:
        """Decision vector of the normalized program for (Y, g, r) given in original coordinates."""
        rows, cols = self._triu()
        Y_n = np.asarray(Y) * self.c_scale / self.b_scale
        g_n = g * self.b_scale * self.c_scale / self.a_scale
        r_n = r / (self.b_scale * self.c_scale)
        return np.concatenate([Y_n[rows, cols], [g_n, r_n]])

    def normalized_Y(self, y: np.ndarray) -> np.ndarray:
        rows, cols = self._triu()
        Y_n = np.zeros((self.dim, self.dim))
        Y_n[rows, cols] = y[:-2]
        return Y_n + np.triu(Y_n, 1).T

    def unpack(self, y: np.ndarray) -> Tuple[np.ndarray, float, float]:
        """Inverse of pack."""
        Y_n = self.normalized_Y(y)
        g = float(y[-2]) * self.a_scale / (self.b_scale * self.c_scale)
        r = float(y[-1]) * self.b_scale * self.c_scale
        return Y_n * self.b_scale / self.c_scale, g, r

    def constraint_blocks(self, Y: np.ndarray, g: float, r: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Y, −(ÃY + YÃᵀ − 2gB̃B̃ᵀ) and the Schur block, in original coordinates and without margins."""
        Y = np.asarray(Y, dtype=float)
        u = self.B_t - Y @ self.xbar
        lyapunov = -(self.A_t @ Y + Y @ self.A_t.T - 2.0 * g * np.outer(self.B_t, self.B_t))
        schur = np.block([[np.array([[r]]), u[None, :]], [u[:, None], Y]])
        return Y, lyapunov, schur

    def to_program(self, include_gain_box: bool = True) -> LmiProgram:
        """Normalized program with blocks of sizes 2k, 2k, 2k+1 and, optionally, the box 0 ≤ g ≤ gain_bound."""
        n = self.dim
        A, B, x = self.A_n, self.B_n, self.xbar_n
        rows, cols = self._triu()
        n_y = rows.size
        m = n_y + 2
        i_g, i_r = n_y + 1, n_y + 2

        basis = np.zeros((n_y, n, n))
        basis[np.arange(n_y), rows, cols] = 1.0
        basis[np.arange(n_y), cols, rows] = 1.0

        positivity = np.zeros((m + 1, n, n))
        positivity[0] = -self.delta_pd * np.eye(n)
        positivity[1 : n_y + 1] = basis

        lyapunov = np.zeros((m + 1, n, n))
        lyapunov[0] = -self.delta_lmi * np.eye(n)
        lyapunov[1 : n_y + 1] = -(np.matmul(A, basis) + np.matmul(basis, A.T))
        lyapunov[i_g] = 2.0 * np.outer(B, B)

        schur = np.zeros((m + 1, n + 1, n + 1))
        schur[0, 0, 1:] = B
        schur[0, 1:, 0] = B
        basis_x = basis @ x
        schur[1 : n_y + 1, 0, 1:] = -basis_x
        schur[1 : n_y + 1, 1:, 0] = -basis_x
        schur[1 : n_y + 1, 1:, 1:] = basis
        schur[i_r, 0, 0] = 1.0

        blocks = [positivity, lyapunov, schur]
        labels = ["Y", "lyapunov", "schur"]
        if include_gain_box:
            box = np.zeros((m + 1, 2, 2))
            box[0] = np.diag([0.0, self.settings.gain_bound])
            box[i_g] = np.diag([1.0, -1.0])
            blocks.append(box)
            labels.append("gain_box")

        c = np.zeros(m)
        c[i_g - 1] = self.settings.gain_penalty
        c[i_r - 1] = 1.0
        return LmiProgram(c=c, blocks=tuple(blocks), labels=tuple(labels))


@dataclass(frozen=True, eq=False)
class SdpSolution:
    """Optimal (Y, g, r) in original coordinates; Y is None when the program is infeasible."""

    Y: Optional[np.ndarray]
    g: float
    r: float
    status: str
    duality_gap: float
    iterations: int = 0
    backend: str = "ipm"
    polished: bool = False

    @property
    def Q(self) -> np.ndarray:
        """Y⁻¹, formed for diagnostics only."""
        if self.Y is None:
            raise SdpInfeasibleError("infeasible program has no Q")
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(self.Y), np.eye(self.Y.shape[0]))

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "g": self.g,
            "r": self.r,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "backend": self.backend,
            "polished": self.polished,
        }


@dataclass(frozen=True)
class RelaxationReport:
    """How far the relaxed optimum is from the exact stability constraint and from x̄."""

    schur_value: float
    r: float
    unweighted_cost: float
    relative_cost: float
    y_min_eig: float
    lmi_max_eig: float
    exact_constraint_max_eig: float

    @property
    def certified(self) -> bool:
        return self.y_min_eig > 0 and self.exact_constraint_max_eig < 0

    def to_dict(self) -> dict:
        return {
            "schur_value": self.schur_value,
            "r": self.r,
            "unweighted_cost": self.unweighted_cost,
            "relative_cost": self.relative_cost,
            "y_min_eig": self.y_min_eig,
            "lmi_max_eig": self.lmi_max_eig,
            "exact_constraint_max_eig": self.exact_constraint_max_eig,
            "certified": self.certified,
        }


def build_stability_sdp(td: TransformedDenominator, settings: Optional[SdpSettings] = None) -> StabilitySdp:
    """Stability program for a transformed denominator, with margins δ = margin_scale·max(1, ‖Ã_n‖_F)."""
    settings = settings or SdpSettings()
    a = _unit_scale(float(np.linalg.norm(td.A_t)))
    b = _unit_scale(float(np.linalg.norm(td.B_t)))
    c = _unit_scale(float(np.linalg.norm(td.xbar)))
    delta = settings.margin_scale * max(1.0, float(np.linalg.norm(td.A_t / a)))
    return StabilitySdp(
        A_t=td.A_t,
        B_t=td.B_t,
        xbar=td.xbar,
        a_scale=a,
        b_scale=b,
        c_scale=c,
        delta_pd=delta,
        delta_lmi=delta,
        settings=settings,
    )


def is_stabilizable(A: np.ndarray, B: np.ndarray, tol: float = STABILIZABILITY_TOL) -> bool:
    """PBH test: rank [A − λI, B] = n for every eigenvalue λ of A with Re λ ≥ 0."""
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    scale = max(1.0, float(np.linalg.norm(A)), float(np.linalg.norm(B)))
    for lam in np.linalg.eigvals(A):
        if lam.real < -tol * scale:
            continue
        pencil = np.hstack([A - lam * np.eye(n), B.astype(complex)])
        if scipy.linalg.svdvals(pencil)[-1] <= tol * scale:
            return False
    return True


def _lyapunov_peak(p: StabilitySdp, Y_n: np.ndarray, g_n: float) -> float:
    """Largest eigenvalue of ÃY + YÃᵀ − 2g·B̃B̃ᵀ in normalized units."""
    A, B = p.A_n, p.B_n
    lyapunov = A @ Y_n + Y_n @ A.T - 2.0 * g_n * np.outer(B, B)
    return float(np.linalg.eigvalsh(0.5 * (lyapunov + lyapunov.T))[-1])


def _margins_hold(p: StabilitySdp, Y_n: np.ndarray, g_n: float) -> bool:
    """Half of the enforced margins is accepted."""
    positive = np.linalg.eigvalsh(Y_n)[0] >= 0.5 * p.delta_pd
    return bool(positive and _lyapunov_peak(p, Y_n, g_n) <= -0.5 * p.delta_lmi)


def _polish(p: StabilitySdp, Y_n: np.ndarray, g_n: float) -> Optional[Tuple[np.ndarray, float]]:
    """Symmetric rank-two correction of Y with Y·x̄ = B̃ exactly, plus the smallest gain step that keeps it stable.

    The gain is raised by SDP_POLISH_GAIN_STEPS·max(1, g) inside the box; None if no step restores
    the margins.
    """
    x, u = p.xbar_n, p.B_n - Y_n @ p.xbar_n
    xx = float(x @ x)
    correction = (np.outer(u, x) + np.outer(x, u)) / xx - float(x @ u) * np.outer(x, x) / xx**2
    candidate = Y_n + correction
    if np.linalg.eigvalsh(candidate)[0] < 0.5 * p.delta_pd:
        return None
    for growth in SDP_POLISH_GAIN_STEPS:
        g = g_n + growth * max(1.0, g_n)
        if g > p.settings.gain_bound:
            break
        if _lyapunov_peak(p, candidate, g) <= -0.5 * p.delta_lmi:
            return candidate, g
    return None


def _infeasible(backend: str, iterations: int = 0) -> SdpSolution:
    return SdpSolution(
        Y=None,
        g=np.nan,
        r=np.inf,
        status=STATUS_INFEASIBLE,
        duality_gap=np.inf,
        iterations=iterations,
        backend=backend,
    )


def solve_sdp(p: StabilitySdp, backend: Optional[SdpBackend] = None) -> SdpSolution:
    """Solve the stability program.

    When Y·x̄ = B̃ can be made exact without losing the strictness margins, Y is polished to it, g
    is raised as little as needed and r is set to 0.

    Returns:
        SdpSolution with status ``optimal``, ``max_iters`` or ``infeasible``.

    Raises:
        SdpNumericalError: If the backend breaks down.
    """
    backend = backend or p.settings.make_backend()
    if not is_stabilizable(p.A_n, p.B_n):
        logger.info("(Ã, B̃) is not stabilizable; the stability program is infeasible")
        return _infeasible(backend.name)

    program = p.to_program()
    result = backend.solve(program)
    logger.info(f"SDP ({backend.name}, dim {p.dim}): {result.status} after {result.iterations} iterations")
    if result.status == STATUS_INFEASIBLE:
        return _infeasible(backend.name, result.iterations)

    y = result.y.copy()
    g_n = float(y[-2])
    if g_n >= 0.999 * p.settings.gain_bound:
        logger.warning(f"Normalized feedback gain reached its bound {p.settings.gain_bound:g}")

    Y_n = p.normalized_Y(y)
    polished = False
    if result.status == STATUS_OPTIMAL:
        polish = _polish(p, Y_n, g_n)
        if polish is not None:
            candidate, y[-2] = polish
            rows, cols = np.triu_indices(p.dim)
            y[:-2] = candidate[rows, cols]
            y[-1] = 0.0
            polished = True
            logger.debug("Stability constraints are inactive at the optimum; Y polished to r = 0")
        elif not _margins_hold(p, Y_n, g_n):
            logger.warning("SDP optimum violates the strictness margins; the recovered model may be marginal")

    Y, g, r = p.unpack(y)
    return SdpSolution(
        Y=0.5 * (Y + Y.T),
        g=g,
        r=max(r, 0.0),
        status=result.status,
        duality_gap=float(result.gap) * p.b_scale * p.c_scale,
        iterations=result.iterations,
        backend=backend.name,
        polished=polished,
    )


def recover_weights(sol: SdpSolution, td: TransformedDenominator, allow_inexact: bool = False) -> np.ndarray:
    """Weights wᵢ = C[2i] + j·C[2i+1] from C̃ᵀ = Y⁻¹B̃ and C = C̃·Σ⁻¹·Vᵀ.

    Args:
        sol: Solution of the stability program.
        td: The transformed denominator the program was built from.
        allow_inexact: Accept a ``max_iters`` solution.

    Raises:
        SdpInfeasibleError: If the program was infeasible.
        SdpNumericalError: If the solution is not optimal and ``allow_inexact`` is False.
        ConditioningError: If cond(Y) > 1e12.
    """
    if sol.status == STATUS_INFEASIBLE or sol.Y is None:
        raise SdpInfeasibleError("cannot recover weights from an infeasible stability program")
    if sol.status != STATUS_OPTIMAL and not allow_inexact:
        raise SdpNumericalError(f"stability program ended with status {sol.status!r}", {"gap": sol.duality_gap})

    eigs = np.linalg.eigvalsh(sol.Y)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > COND_LIMIT:
        raise ConditioningError(
            "Y is too ill-conditioned to recover weights",
            {"min_eig": float(eigs[0]), "max_eig": float(eigs[-1])},
        )
    C_t = scipy.linalg.cho_solve(scipy.linalg.cho_factor(sol.Y), td.B_t)
    C = td.restore_output(C_t)
    return C[0::2] + 1j * C[1::2]


def relaxation_report(sol: SdpSolution, p: StabilitySdp) -> RelaxationReport:
    """Schur value (B̃ − Yx̄)ᵀQ(B̃ − Yx̄), ‖QB̃ − x̄‖ and the exact constraint ÃᵀQ + QÃ − 2gQB̃B̃ᵀQ on Q = Y⁻¹."""
    if sol.Y is None:
        raise SdpInfeasibleError("infeasible program has no relaxation report")
    factor = scipy.linalg.cho_factor(sol.Y)
    u = p.B_t - sol.Y @ p.xbar
    schur_value = float(u @ scipy.linalg.cho_solve(factor, u))
    QB = scipy.linalg.cho_solve(factor, p.B_t)
    unweighted = float(np.linalg.norm(QB - p.xbar))

    Q = sol.Q
    exact = p.A_t.T @ Q + Q @ p.A_t - 2.0 * sol.g * np.outer(QB, QB)
    lmi = p.A_t @ sol.Y + sol.Y @ p.A_t.T - 2.0 * sol.g * np.outer(p.B_t, p.B_t)
    return RelaxationReport(
        schur_value=schur_value,
        r=sol.r,
        unweighted_cost=unweighted,
        relative_cost=unweighted / _unit_scale(float(np.linalg.norm(p.xbar))),
        y_min_eig=float(np.linalg.eigvalsh(sol.Y)[0]),
        lmi_max_eig=float(np.linalg.eigvalsh(0.5 * (lmi + lmi.T))[-1]),
        exact_constraint_max_eig=float(np.linalg.eigvalsh(0.5 * (exact + exact.T))[-1]),
    )


def write_sdpa(p: StabilitySdp, target: Union[str, Path, TextIO]) -> None:
    """Dump the normalized program in SDPA sparse format.

    SDPA states Σ yᵢFᵢ − F₀ ⪰ 0, so the constant matrices are written negated. Each entry line is
    ``matrix block i j value`` for the upper triangle, matrix 0 being the constant.
    """
    program = p.to_program()
    lines = [
        f'"stabaaa stability program, dim {p.dim}, scales a={p.a_scale:.17g} b={p.b_scale:.17g} c={p.c_scale:.17g}"',
        f"{program.m} = mDIM",
        f"{len(program.blocks)} = nBLOCK",
        " ".join(str(n) for n in program.block_sizes) + " = bLOCKsTRUCT",
        " ".join(f"{ci:.17g}" for ci in program.c),
    ]
    for mat in range(program.m + 1):
        sign = -1.0 if mat == 0 else 1.0
        for blk, stack in enumerate(program.blocks, start=1):
            rows, cols = np.triu_indices(stack.shape[1])
            values = sign * stack[mat][rows, cols]
            for i, j, value in zip(rows, cols, values):
                if value != 0.0:
                    lines.append(f"{mat} {blk} {i + 1} {j + 1} {value:.17g}")
    text = "\n".join(lines) + "\n"

    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
