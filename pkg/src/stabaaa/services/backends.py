"""SDP solver settings and the interchangeable LMI backends."""

import logging
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from ..config.numerics import (
    SDP_FEAS_TOL,
    SDP_GAIN_BOUND,
    SDP_GAIN_PENALTY,
    SDP_GAP_TOL,
    SDP_MARGIN_SCALE,
    SDP_MAX_ITERS,
)
from ..config.settings import SDP_BACKENDS
from ..core.errors import DataValidationError, SdpNumericalError
from .interior_point import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERS,
    STATUS_OPTIMAL,
    ConicResult,
    InteriorPointBackend,
    LmiProgram,
)

logger = logging.getLogger(__name__)


class SdpBackend(Protocol):
    name: str

    def solve(self, program: LmiProgram) -> ConicResult:
        ...


@dataclass
class SdpSettings:
    """Solver tolerances, strictness margin scale, gain box and penalty, and backend name.

    gain_bound and gain_penalty act on the normalized gain: the program keeps 0 ≤ g ≤ gain_bound and
    adds gain_penalty·g to the objective.
    """

    max_iters: int = SDP_MAX_ITERS
    gap_tol: float = SDP_GAP_TOL
    feas_tol: float = SDP_FEAS_TOL
    margin_scale: float = SDP_MARGIN_SCALE
    gain_bound: float = SDP_GAIN_BOUND
    gain_penalty: float = SDP_GAIN_PENALTY
    backend: str = "ipm"

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise DataValidationError(f"max_iters must be at least 1, got {self.max_iters!r}")
        for name in ("gap_tol", "feas_tol", "margin_scale", "gain_bound"):
            if not getattr(self, name) > 0:
                raise DataValidationError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.gain_penalty >= 0:
            raise DataValidationError(f"gain_penalty must be non-negative, got {self.gain_penalty!r}")
        if self.backend not in SDP_BACKENDS:
            raise DataValidationError(f"unknown SDP backend {self.backend!r}; expected one of {SDP_BACKENDS}")

    def make_backend(self) -> SdpBackend:
        if self.backend == "cvxpy":
            return CvxpyBackend()
        return InteriorPointBackend(max_iters=self.max_iters, gap_tol=self.gap_tol, feas_tol=self.feas_tol)


class CvxpyBackend:
    """LmiProgram solved through cvxpy (installed with the ``cvxpy`` extra).

    Args:
        solver: cvxpy solver name; None lets cvxpy choose an SDP-capable solver.
    """

    name = "cvxpy"

    def __init__(self, solver: Optional[str] = None):
        try:
            import cvxpy
        except ImportError as e:
            raise DataValidationError("the cvxpy backend needs the optional extra: pip install stabaaa[cvxpy]") from e
        self._cp = cvxpy
        self.solver = solver

    def solve(self, program: LmiProgram) -> ConicResult:
        cp = self._cp
        y = cp.Variable(program.m)
        constraints = []
        for stack in program.blocks:
            n = stack.shape[1]
            flat = stack[1:].reshape(program.m, n * n)
            expr = stack[0] + cp.reshape(flat.T @ y, (n, n), order="C")
            constraints.append(0.5 * (expr + expr.T) >> 0)

        problem = cp.Problem(cp.Minimize(program.c @ y), constraints)
        try:
            problem.solve(solver=self.solver)
        except cp.error.SolverError as e:
            raise SdpNumericalError(f"cvxpy solver failed: {e}") from e
        logger.debug(f"cvxpy finished with status {problem.status}")

        if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            zeros = np.zeros(program.m)
            return ConicResult(zeros, program.evaluate(zeros), [], STATUS_INFEASIBLE, np.inf, np.inf, np.inf, 0)
        if y.value is None:
            raise SdpNumericalError(f"cvxpy returned no solution (status {problem.status})")

        status = STATUS_OPTIMAL if problem.status == cp.OPTIMAL else STATUS_MAX_ITERS
        y_value = np.asarray(y.value, dtype=float)
        S = program.evaluate(y_value)
        X = [np.asarray(con.dual_value, dtype=float) for con in constraints]
        pobj = float(program.c @ y_value)
        dobj = -float(sum(np.vdot(f0, Xj) for f0, Xj in zip(program.constant(), X)))
        return ConicResult(
            y=y_value,
            S=S,
            X=X,
            status=status,
            primal_objective=pobj,
            dual_objective=dobj,
            gap=abs(pobj - dobj),
            iterations=int(getattr(problem.solver_stats, "num_iters", None) or 0),
        )
