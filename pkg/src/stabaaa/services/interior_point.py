"""Dense primal-dual interior-point method for small linear matrix inequality programs.

This module contains LmiProgram, the problem form shared by every SDP in the package,

    minimize    cᵀy
    subject to  F₀ʲ + Σᵢ yᵢFᵢʲ ⪰ 0   for every block j,

and InteriorPointBackend, an infeasible-start solver using Nesterov-Todd scaling and Mehrotra's
predictor-corrector. The dual variables X ʲ ⪰ 0 satisfy ⟨Fᵢ, X⟩ = cᵢ and certify optimality through
the duality gap ⟨X, S⟩.

Important:
    Everything is dense. Problems with a few thousand decision variables are the intended size.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Final, List, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse

from ..config.numerics import (
    SDP_BACKTRACK_FACTOR,
    SDP_FEAS_TOL,
    SDP_GAP_TOL,
    SDP_INFEASIBILITY_TOL,
    SDP_MAX_ITERS,
    SDP_MIN_STEP,
    SDP_NEAR_OPTIMAL_FACTOR,
    SDP_REFINEMENT_STEPS,
    SDP_SCHUR_SHIFTS,
    SDP_STEP_FRACTION,
)
from ..core.errors import DataValidationError, SdpNumericalError

logger = logging.getLogger(__name__)

STATUS_OPTIMAL: Final[str] = "optimal"
STATUS_MAX_ITERS: Final[str] = "max_iters"
STATUS_INFEASIBLE: Final[str] = "infeasible"

Blocks = List[np.ndarray]


@dataclass(frozen=True, eq=False)
class LmiProgram:
    """Objective vector c (length m) and one coefficient stack of shape (m+1, n, n) per block.

    Index 0 of every stack is the constant matrix F₀; index i ≥ 1 multiplies yᵢ₋₁.
    """

    c: np.ndarray
    blocks: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).ravel()
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        if not blocks:
            raise DataValidationError("an LMI program needs at least one block")
        for j, stack in enumerate(blocks):
            if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
                raise DataValidationError(f"block {j} must have shape (m+1, n, n), got {stack.shape}")
            if stack.shape[0] != c.size + 1:
                raise DataValidationError(f"block {j} has {stack.shape[0] - 1} coefficients for {c.size} variables")
            scale = max(1.0, float(np.max(np.abs(stack))))
            if np.max(np.abs(stack - stack.transpose(0, 2, 1))) > 1e-12 * scale:
                raise DataValidationError(f"block {j} has non-symmetric coefficient matrices")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", blocks)

    @property
    def m(self) -> int:
        return int(self.c.size)

    @property
    def block_sizes(self) -> Tuple[int, ...]:
        return tuple(int(b.shape[1]) for b in self.blocks)

    def constant(self) -> Blocks:
        return [b[0] for b in self.blocks]

    def operator(self, y: np.ndarray) -> Blocks:
        """Linear part Σᵢ yᵢFᵢ per block."""
        return [np.tensordot(y, b[1:], axes=1) for b in self.blocks]

    def evaluate(self, y: np.ndarray) -> Blocks:
        """F₀ + Σᵢ yᵢFᵢ per block."""
        return [b[0] + lin for b, lin in zip(self.blocks, self.operator(y))]

    def adjoint(self, X: Sequence[np.ndarray]) -> np.ndarray:
        """(⟨F₁, X⟩, …, ⟨F_m, X⟩) summed over blocks."""
        return sum(np.tensordot(b[1:], Xj, axes=([1, 2], [0, 1])) for b, Xj in zip(self.blocks, X))


@dataclass(frozen=True, eq=False)
class ConicResult:
    """Solver output: decision vector y, slack blocks S = F(y), dual blocks X and convergence data."""

    y: np.ndarray
    S: Blocks
    X: Blocks
    status: str
    primal_objective: float
    dual_objective: float
    gap: float
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    info: Dict[str, float] = field(default_factory=dict)


def _inner(A: Sequence[np.ndarray], B: Sequence[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(A, B)))


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _cholesky(A: np.ndarray, what: str) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(A, lower=True)
    except np.linalg.LinAlgError as e:
        min_eig = float(np.linalg.eigvalsh(A)[0])
        raise SdpNumericalError(f"{what} lost positive definiteness", {"min_eig": min_eig}) from e


def _positive_definite(blocks: Sequence[np.ndarray]) -> bool:
    for A in blocks:
        try:
            scipy.linalg.cholesky(A, lower=True)
        except np.linalg.LinAlgError:
            return False
    return True


@dataclass(frozen=True, eq=False)
class _Scaling:
    """NT scaling of one block: W = RRᵀ maps S to X, and R⁻¹XR⁻ᵀ = RᵀSR = diag(lam)."""

    R: np.ndarray
    R_inv: np.ndarray
    lam: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return self.R @ self.R.T

    @classmethod
    def from_pair(cls, X: np.ndarray, S: np.ndarray) -> "_Scaling":
        L_x = _cholesky(X, "dual iterate X")
        L_s = _cholesky(S, "slack iterate S")
        _, lam, Vh = scipy.linalg.svd(L_s.T @ L_x)
        if not lam[-1] > 0:
            raise SdpNumericalError("NT scaling is singular", {"lam_max": float(lam[0])})
        V = Vh.T
        R = L_x @ V / np.sqrt(lam)[None, :]
        L_x_inv = scipy.linalg.solve_triangular(L_x, np.eye(X.shape[0]), lower=True)
        R_inv = np.sqrt(lam)[:, None] * (Vh @ L_x_inv)
        return cls(R=R, R_inv=R_inv, lam=lam)


def _max_step(X: Sequence[np.ndarray], dX: Sequence[np.ndarray]) -> float:
    """Largest α with X + α·dX ⪰ 0, infinite when dX keeps every block positive semidefinite."""
    alpha = math.inf
    for Xj, dXj in zip(X, dX):
        L = _cholesky(Xj, "iterate")
        half = scipy.linalg.solve_triangular(L, dXj, lower=True)
        Z = scipy.linalg.solve_triangular(L, half.T, lower=True)
        low = float(scipy.linalg.eigvalsh(_sym(Z))[0])
        if low < 0:
            alpha = min(alpha, -1.0 / low)
    return alpha


class _SchurSystem:
    """Schur complement matrix M with Mᵢₖ = Σⱼ⟨Fᵢ, WFₖW⟩, factored after Jacobi equilibration.

    Variables whose coefficients vanish on the optimal face make M nearly singular late in the
    run. If the plain factorization fails, the smallest shift in SDP_SCHUR_SHIFTS that factors is
    used and every solve is refined against the unshifted matrix.
    """

    def __init__(self, M: np.ndarray):
        diag = np.diag(M)
        self.M = M
        self.scale = 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0))
        balanced = self.scale[:, None] * M * self.scale[None, :]
        self.shift = 0.0
        for shift in (0.0, *SDP_SCHUR_SHIFTS):
            try:
                self.factor = scipy.linalg.cho_factor(balanced + shift * np.eye(M.shape[0]), lower=True)
            except np.linalg.LinAlgError:
                continue
            self.shift = shift
            break
        else:
            raise SdpNumericalError(
                "Schur complement matrix is not positive definite",
                {"m": int(M.shape[0]), "trace": float(np.trace(M)), "largest_shift": SDP_SCHUR_SHIFTS[-1]},
            )
        if self.shift:
            logger.debug(f"Schur complement factored with diagonal shift {self.shift:g}")

    @classmethod
    def build(cls, program: LmiProgram, scalings: Sequence[_Scaling], coefficients: Sequence) -> "_SchurSystem":
        """Mᵢₖ = Σⱼ vec(Fᵢʲ)ᵀ·vec(WʲFₖʲWʲ), with the coefficient rows of each block held sparse."""
        M = np.zeros((program.m, program.m))
        for stack, coef, sc in zip(program.blocks, coefficients, scalings):
            W = sc.W
            congruent = (W @ stack[1:] @ W).reshape(program.m, -1)
            M += coef @ congruent.T
        return cls(0.5 * (M + M.T))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        dy = self.scale * scipy.linalg.cho_solve(self.factor, self.scale * rhs)
        if self.shift:
            for _ in range(SDP_REFINEMENT_STEPS):
                dy = dy + self.scale * scipy.linalg.cho_solve(self.factor, self.scale * (rhs - self.M @ dy))
        return dy


class InteriorPointBackend:
    """Self-contained primal-dual interior-point solver for LmiProgram.

    Steps are shortened until both iterates stay positive definite. When the Schur system or the
    step length breaks down on an iterate that already meets the tolerances within a factor of
    SDP_NEAR_OPTIMAL_FACTOR, that iterate is returned as optimal.

    Args:
        max_iters: Iteration cap; the last iterate is returned with status ``max_iters``.
        gap_tol: Relative duality-gap tolerance.
        feas_tol: Relative primal and dual residual tolerance.
        step_fraction: Fraction of the distance to the cone boundary taken per step.
        infeasibility_tol: Threshold on ‖F*(X)‖/(−⟨F₀, X⟩) that certifies infeasibility.
    """

    name = "ipm"

    def __init__(
        self,
        max_iters: int = SDP_MAX_ITERS,
        gap_tol: float = SDP_GAP_TOL,
        feas_tol: float = SDP_FEAS_TOL,
        step_fraction: float = SDP_STEP_FRACTION,
        infeasibility_tol: float = SDP_INFEASIBILITY_TOL,
    ):
        self.max_iters = max_iters
        self.gap_tol = gap_tol
        self.feas_tol = feas_tol
        self.step_fraction = step_fraction
        self.infeasibility_tol = infeasibility_tol

    def _starting_point(self, program: LmiProgram) -> Tuple[np.ndarray, Blocks, Blocks]:
        """Multiples of the identity, sized block by block from that block's coefficients."""
        c_weight = 1.0 + np.abs(program.c)
        X, S = [], []
        for stack in program.blocks:
            n = stack.shape[1]
            coef_norms = np.sqrt(np.sum(stack[1:] ** 2, axis=(1, 2)))
            xi = max(10.0, math.sqrt(n), n * float(np.max(c_weight / (1.0 + coef_norms))))
            eta = max(10.0, math.sqrt(n), float(np.linalg.norm(stack[0])), float(np.max(coef_norms)))
            X.append(xi * np.eye(n))
            S.append(eta * np.eye(n))
        return np.zeros(program.m), X, S

    def _direction(self, program, schur, scalings, r_p, R_d, R_c):
        W = [sc.W for sc in scalings]
        rhs = program.adjoint([Rc - Wj @ Rd @ Wj for Rc, Wj, Rd in zip(R_c, W, R_d)]) - r_p
        dy = schur.solve(rhs)
        dS = [lin + Rd for lin, Rd in zip(program.operator(dy), R_d)]
        dX = [_sym(Rc - Wj @ dSj @ Wj) for Rc, Wj, dSj in zip(R_c, W, dS)]
        return dy, dX, dS

    def _iterate(self, program, coefficients, y, X, S, r_p, R_d, gap, d_res):
        mu = gap / sum(program.block_sizes)
        scalings = [_Scaling.from_pair(Xj, Sj) for Xj, Sj in zip(X, S)]
        schur = _SchurSystem.build(program, scalings, coefficients)

        # predictor
        dy, dX, dS = self._direction(program, schur, scalings, r_p, R_d, [-Xj for Xj in X])
        a_p = min(1.0, _max_step(X, dX))
        a_d = min(1.0, _max_step(S, dS))
        gap_aff = _inner([Xj + a_p * d for Xj, d in zip(X, dX)], [Sj + a_d * d for Sj, d in zip(S, dS)])
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3

        # corrector
        R_c = []
        for sc, dXj, dSj in zip(scalings, dX, dS):
            dX_t = sc.R_inv @ dXj @ sc.R_inv.T
            dS_t = sc.R.T @ dSj @ sc.R
            G = sigma * mu * np.eye(sc.lam.size) - np.diag(sc.lam**2) - _sym(dX_t @ dS_t)
            T = 2.0 * G / (sc.lam[:, None] + sc.lam[None, :])
            R_c.append(sc.R @ T @ sc.R.T)
        dy, dX, dS = self._direction(program, schur, scalings, r_p, R_d, R_c)

        a_p = min(1.0, self.step_fraction * _max_step(X, dX))
        a_d = min(1.0, self.step_fraction * _max_step(S, dS))
        return self._advance(program, y, X, S, (dy, dX, dS), a_p, a_d, d_res)

    def _advance(self, program, y, X, S, direction, a_p, a_d, d_res):
        """Halve both step lengths until the new X and S factor; re-anchor S to F(y) once dual feasible."""
        dy, dX, dS = direction
        while max(a_p, a_d) >= SDP_MIN_STEP:
            y_new = y + a_d * dy
            X_new = [_sym(Xj + a_p * d) for Xj, d in zip(X, dX)]
            S_new = [_sym(Sj + a_d * d) for Sj, d in zip(S, dS)]
            if (1.0 - a_d) * d_res <= self.feas_tol:
                anchored = [_sym(Fj) for Fj in program.evaluate(y_new)]
                if _positive_definite(anchored):
                    S_new = anchored
            if _positive_definite(X_new) and _positive_definite(S_new):
                return y_new, X_new, S_new
            a_p *= SDP_BACKTRACK_FACTOR
            a_d *= SDP_BACKTRACK_FACTOR
        raise SdpNumericalError("step length collapsed before the iterates stayed positive definite")

    def _near_optimal(self, gap: float, pobj: float, dobj: float, p_res: float, d_res: float) -> bool:
        loose_gap = SDP_NEAR_OPTIMAL_FACTOR * self.gap_tol * max(1.0, abs(pobj), abs(dobj))
        return gap <= loose_gap and max(p_res, d_res) <= SDP_NEAR_OPTIMAL_FACTOR * self.feas_tol

    def _result(self, y, S, X, status, pobj, dobj, it, p_res, d_res) -> ConicResult:
        return ConicResult(
            y=y,
            S=S,
            X=X,
            status=status,
            primal_objective=pobj,
            dual_objective=dobj,
            gap=_inner(X, S),
            iterations=it,
            primal_residual=p_res,
            dual_residual=d_res,
        )

    def solve(self, program: LmiProgram) -> ConicResult:
        """Solve ``program``.

        Returns:
            ConicResult with status ``optimal``, ``infeasible`` or ``max_iters``.

        Raises:
            SdpNumericalError: If the Schur system or the step length breaks down before the
                iterate is near optimal.
        """
        y, X, S = self._starting_point(program)
        F0 = program.constant()
        c_scale = 1.0 + float(np.linalg.norm(program.c))
        # dual residual is relative per block
        f_scales = [1.0 + float(np.linalg.norm(f0)) for f0 in F0]
        coefficients = [scipy.sparse.csr_matrix(stack[1:].reshape(program.m, -1)) for stack in program.blocks]

        for it in range(self.max_iters + 1):
            R_d = [f0 + lin - Sj for f0, lin, Sj in zip(F0, program.operator(y), S)]
            r_p = program.c - program.adjoint(X)
            pobj = float(program.c @ y)
            dobj = -_inner(F0, X)
            gap = _inner(X, S)
            p_res = float(np.linalg.norm(r_p)) / c_scale
            d_res = max(float(np.linalg.norm(Rj)) / fs for Rj, fs in zip(R_d, f_scales))
            logger.debug(f"IPM {it:3d}: pobj={pobj:.9e} dobj={dobj:.9e} gap={gap:.2e} res={p_res:.1e}/{d_res:.1e}")

            if gap <= self.gap_tol * max(1.0, abs(pobj), abs(dobj)) and max(p_res, d_res) <= self.feas_tol:
                return self._result(y, S, X, STATUS_OPTIMAL, pobj, dobj, it, p_res, d_res)

            certificate = -_inner(F0, X)
            if certificate > 0:
                ratio = float(np.linalg.norm(program.adjoint(X))) / certificate
                if ratio < self.infeasibility_tol:
                    logger.info(f"IPM detected infeasibility at iteration {it} (ratio {ratio:.2e})")
                    return self._result(y, S, X, STATUS_INFEASIBLE, pobj, dobj, it, p_res, d_res)

            if it == self.max_iters:
                break

            try:
                y, X, S = self._iterate(program, coefficients, y, X, S, r_p, R_d, gap, d_res)
            except SdpNumericalError as e:
                if not self._near_optimal(gap, pobj, dobj, p_res, d_res):
                    raise
                logger.warning(f"IPM stopped at iteration {it} ({e}); returning the near-optimal iterate")
                return self._result(y, S, X, STATUS_OPTIMAL, pobj, dobj, it, p_res, d_res)

        logger.warning(f"IPM stopped after {self.max_iters} iterations with gap {gap:.2e}")
        return self._result(y, S, X, STATUS_MAX_ITERS, pobj, dobj, self.max_iters, p_res, d_res)
