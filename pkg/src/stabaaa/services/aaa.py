"""Real-valued AAA with enforced conjugate symmetry.

This module contains the greedy loop that moves the worst-fitted sample into the support set, builds
the real quasi-Loewner matrix and takes its least right singular vector as the weight vector. The loop
state is explicit so that a fit can be resumed with a tighter tolerance.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from ..config.numerics import RANK_TOL
from ..config.settings import DEFAULT_ERROR_MODE, DEFAULT_TOL, ERROR_MODES
from ..core.errors import ConditioningError, DataValidationError, SaturationError
from .barycentric import BarycentricModel, weight_diagnostics
from .datamodel import FrequencyDataset, sample_errors
from .loewner import RealQuasiLoewner, real_quasi_loewner

logger = logging.getLogger(__name__)


@dataclass
class AaaSettings:
    """Tolerance, iteration cap and error mode of one AAA run.

    ``max_iter=None`` means ⌊V/4⌋ (at least 1) for a dataset of V samples.
    """

    eps: float = DEFAULT_TOL
    max_iter: Optional[int] = None
    error_mode: str = DEFAULT_ERROR_MODE

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise DataValidationError(f"eps must be positive, got {self.eps!r}")
        if self.max_iter is not None and self.max_iter < 1:
            raise DataValidationError(f"max_iter must be at least 1, got {self.max_iter!r}")
        if self.error_mode not in ERROR_MODES:
            raise DataValidationError(f"unknown error mode {self.error_mode!r}; expected one of {ERROR_MODES}")

    def iteration_cap(self, sample_count: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return max(1, sample_count // 4)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    chosen_freq: float
    max_error: float
    sigma_min: float

    def to_dict(self) -> dict:
        return {
            "iter": self.iteration,
            "chosen_freq": self.chosen_freq,
            "max_err": self.max_error,
            "sigma_min": self.sigma_min,
        }


TraceHook = Callable[[IterationRecord], None]


@dataclass
class AaaState:
    """Current model, support/test partition of the sample indices and per-iteration history.

    Support and test indices always partition range(V). ``max_error`` in the history is recorded as
    observed; the greedy loop does not make it monotone.
    """

    model: BarycentricModel
    support_indices: List[int]
    test_indices: np.ndarray
    iteration: int = 0
    history: List[IterationRecord] = field(default_factory=list)
    loewner_real: Optional[RealQuasiLoewner] = None
    x_opt: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, ds: FrequencyDataset) -> "AaaState":
        """k = 0 state: the real part of the sample mean as a constant model, every sample in the test set."""
        constant = float(np.mean(ds.values).real)
        empty = np.zeros(0)
        return cls(
            model=BarycentricModel(empty, empty, empty, constant=constant),
            support_indices=[],
            test_indices=np.arange(ds.count),
        )

    def copy(self) -> "AaaState":
        return replace(
            self,
            support_indices=list(self.support_indices),
            test_indices=self.test_indices.copy(),
            history=list(self.history),
        )


@dataclass(frozen=True, eq=False)
class FitOutcome:
    """Result of an AAA run.

    ``loewner_real`` and ``x_opt`` belong to ``model`` and are None for the k = 0 constant model.
    ``state`` is the loop state at exit and can be passed back to run_aaa to resume.
    """

    model: BarycentricModel
    converged: bool
    k: int
    final_max_error: float
    loewner_real: Optional[RealQuasiLoewner]
    x_opt: Optional[np.ndarray]
    test_indices: np.ndarray
    state: AaaState
    near_zero_weights: np.ndarray


def _test_errors(model: BarycentricModel, ds: FrequencyDataset, test: np.ndarray, mode: str) -> np.ndarray:
    return sample_errors(model, ds, mode, indices=test)


def select_support(state: AaaState, ds: FrequencyDataset, mode: str = DEFAULT_ERROR_MODE) -> int:
    """Dataset index of the test sample with the largest deviation; ties go to the lowest frequency.

    Raises:
        SaturationError: If the test set is empty.
    """
    if state.test_indices.size == 0:
        raise SaturationError("the test set is empty; every sample is already a support point")
    errors = _test_errors(state.model, ds, state.test_indices, mode)
    # test indices are ascending, so argmax's first-occurrence rule picks the lowest frequency
    return int(state.test_indices[int(np.argmax(errors))])


def _least_singular_pair(M: RealQuasiLoewner):
    rows, cols = M.shape
    if rows < cols:
        raise ConditioningError(
            f"quasi-Loewner matrix has fewer rows than columns ({rows} < {cols})",
            {"rows": rows, "cols": cols},
        )
    try:
        _, sigma, Vh = scipy.linalg.svd(M.M, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConditioningError(f"SVD of the quasi-Loewner matrix failed: {e}", {"rows": rows, "cols": cols}) from e

    x = Vh[-1].copy()
    if np.sum(x[0::2]) < 0:
        x = -x
    return x, float(sigma[-1]), float(sigma[0])


def solve_weights(M: RealQuasiLoewner) -> np.ndarray:
    """Unit vector x_opt minimizing ‖M·x‖₂, signed so that Σαᵢ > 0.

    Raises:
        ConditioningError: If σ_min/σ_max < 1e-14. The minimizer is still available in
            ``error.diagnostics["x_opt"]``.
    """
    x, sigma_min, sigma_max = _least_singular_pair(M)
    ratio = sigma_min / sigma_max if sigma_max > 0 else 0.0
    if ratio < RANK_TOL:
        raise ConditioningError(
            f"quasi-Loewner matrix is rank deficient (σ_min/σ_max = {ratio:.3e})",
            {"sigma_min": sigma_min, "sigma_max": sigma_max, "ratio": ratio, "x_opt": x},
        )
    return x


def run_aaa(
    ds: FrequencyDataset,
    settings: AaaSettings,
    state: Optional[AaaState] = None,
    trace: Optional[TraceHook] = None,
) -> FitOutcome:
    """Run the greedy loop from ``state`` (or from scratch) until the test error reaches eps.

    The iteration cap counts support points, so a resumed state keeps its earlier iterations.
    Without convergence the model with the smallest test error among those with k ≥ 1 is returned.

    Raises:
        SaturationError: If another iteration would leave fewer test samples than support points.
    """
    state = AaaState.initial(ds) if state is None else state.copy()
    mode = settings.error_mode
    cap = settings.iteration_cap(ds.count)

    errors = _test_errors(state.model, ds, state.test_indices, mode)
    max_error = float(np.max(errors)) if errors.size else 0.0
    # the constant start (k = 0) is never preferred over a fitted model
    best = (state.model, state.loewner_real, state.x_opt, max_error, state.test_indices) if state.model.k else None
    logger.info(f"AAA start: V={ds.count}, eps={settings.eps:.3g}, k={state.model.k}, cap={cap}")

    converged = max_error <= settings.eps
    while not converged and state.iteration < cap:
        if ds.count - (state.iteration + 1) < state.iteration + 1:
            raise SaturationError(
                f"cannot add support point {state.iteration + 1}: only {state.test_indices.size} test samples left"
            )
        chosen = select_support(state, ds, mode)
        state.support_indices.append(chosen)
        state.test_indices = state.test_indices[state.test_indices != chosen]
        state.iteration += 1

        support = np.asarray(state.support_indices)
        M = real_quasi_loewner(
            ds.freqs[support], ds.values[support], ds.freqs[state.test_indices], ds.values[state.test_indices]
        )
        try:
            x = solve_weights(M)
            sigma_min = float(np.linalg.norm(M.M @ x))
        except ConditioningError as e:
            if "x_opt" not in e.diagnostics:
                raise
            logger.warning(f"Iteration {state.iteration}: {e}; keeping the least singular vector")
            x = e.diagnostics["x_opt"]
            sigma_min = e.diagnostics["sigma_min"]

        state.model = BarycentricModel.from_real_weights(ds.freqs[support], ds.values[support], x)
        state.loewner_real, state.x_opt = M, x
        errors = _test_errors(state.model, ds, state.test_indices, mode)
        max_error = float(np.max(errors)) if errors.size else 0.0

        record = IterationRecord(state.iteration, float(ds.freqs[chosen]), max_error, sigma_min)
        state.history.append(record)
        if trace is not None:
            trace(record)
        logger.debug(f"AAA iter {record.iteration}: λ={record.chosen_freq:.6g} err={max_error:.3e} σ={sigma_min:.3e}")

        if best is None or max_error < best[3]:
            best = (state.model, M, x, max_error, state.test_indices)
        converged = max_error <= settings.eps

    if converged:
        model, M, x, test = state.model, state.loewner_real, state.x_opt, state.test_indices
        logger.info(f"AAA converged at k={model.k} with max test error {max_error:.3e}")
    else:
        if best is None:
            best = (state.model, state.loewner_real, state.x_opt, max_error, state.test_indices)
        model, M, x, max_error, test = best
        logger.warning(
            f"AAA reached the iteration cap {cap} without meeting eps={settings.eps:.3g}; "
            f"returning the best model (k={model.k}, max test error {max_error:.3e})"
        )

    small = weight_diagnostics(model)
    if small.size:
        logger.warning(f"{small.size} near-zero weight(s) at support indices {small.tolist()}")

    return FitOutcome(
        model=model,
        converged=converged,
        k=model.k,
        final_max_error=max_error,
        loewner_real=M,
        x_opt=x,
        test_indices=test,
        state=state,
        near_zero_weights=small,
    )


def aaa_fit(
    ds: FrequencyDataset,
    eps: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    error_mode: str = DEFAULT_ERROR_MODE,
    trace: Optional[TraceHook] = None,
) -> FitOutcome:
    """Fit a real barycentric model to ``ds`` with the greedy AAA loop.

    Args:
        ds: Dataset, preferably normalized.
        eps: Target maximum deviation over the test set.
        max_iter: Maximum number of support points, ⌊V/4⌋ by default.
        error_mode: ``"abs"`` or ``"rel"``.
        trace: Optional callback receiving one IterationRecord per iteration.

    Returns:
        FitOutcome; ``converged`` is False when the cap was reached first.

    Examples:
        Constant data stop before the first iteration:

        >>> ds = FrequencyDataset([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
        >>> aaa_fit(ds, eps=1e-9).k
        0
    """
    return run_aaa(ds, AaaSettings(eps=eps, max_iter=max_iter, error_mode=error_mode), trace=trace)
