"""AAA with stability enforcement, and the truncate-and-refit baseline.

This module contains stabaaa_fit, the outer loop that runs AAA, checks the poles of the result and,
for an unstable model, replaces its weights by the solution of the stability program. When the
stabilized model misses the tolerance, the AAA tolerance is tightened and the loop resumes from the
current support set. truncate_refit is the classical alternative: drop (or flip) unstable poles and
refit the residues by least squares.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import scipy.linalg

from ..config.numerics import CONJUGATE_TOL, DEFAULT_M_MAX, DEFAULT_THETA
from ..config.settings import DEFAULT_ERROR_MODE, DEFAULT_TOL, ERROR_MODES, REFIT_MODES
from ..core.errors import (
    ConditioningError,
    DataValidationError,
    DegenerateDataError,
    SdpInfeasibleError,
    SdpNumericalError,
    StabilizationError,
)
from .aaa import AaaSettings, FitOutcome, TraceHook, run_aaa
from .backends import SdpSettings
from .barycentric import BarycentricModel, pole_residue
from .datamodel import ErrorReport, FrequencyDataset, error_metrics, sample_errors
from .interior_point import STATUS_INFEASIBLE, STATUS_OPTIMAL
from .sdp import RelaxationReport, SdpSolution, build_stability_sdp, recover_weights, relaxation_report, solve_sdp
from .stability import StabilityReport, build_denominator_realization, classify_stability, transform_denominator

logger = logging.getLogger(__name__)


@dataclass
class StabAaaConfig:
    """Target tolerance, tightening factor θ, retry cap and the inner AAA/SDP settings.

    ``resume=False`` restarts AAA from scratch at the tightened tolerance instead of adding support
    points to the current model.
    """

    eps: float = DEFAULT_TOL
    theta: float = DEFAULT_THETA
    m_max: int = DEFAULT_M_MAX
    max_iter: Optional[int] = None
    error_mode: str = DEFAULT_ERROR_MODE
    resume: bool = True
    sdp: SdpSettings = field(default_factory=SdpSettings)

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise DataValidationError(f"eps must be positive, got {self.eps!r}")
        if not 0 < self.theta < 1:
            raise DataValidationError(f"theta must lie in (0, 1), got {self.theta!r}")
        if self.m_max < 0:
            raise DataValidationError(f"m_max must be non-negative, got {self.m_max!r}")
        if self.error_mode not in ERROR_MODES:
            raise DataValidationError(f"unknown error mode {self.error_mode!r}")

    def aaa_settings(self, eps: float) -> AaaSettings:
        return AaaSettings(eps=eps, max_iter=self.max_iter, error_mode=self.error_mode)

    def eps_for_round(self, round_no: int) -> float:
        """ε_M = ε·θ^(M−1)."""
        return self.eps * self.theta ** (round_no - 1)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    eps: float
    k: int
    stable: bool
    sdp: bool
    max_error_test: float
    e_inf: float

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "eps": self.eps,
            "k": self.k,
            "stable": self.stable,
            "sdp": self.sdp,
            "max_error_test": self.max_error_test,
            "e_inf": self.e_inf,
        }


@dataclass(frozen=True, eq=False)
class StabAaaOutcome:
    """Stable model returned by stabaaa_fit with its round history.

    ``max_error_test`` is measured on the AAA test set of the last round; ``metrics`` covers every sample.
    """

    model: BarycentricModel
    stable: bool
    met_tolerance: bool
    rounds: int
    sdp_invocations: int
    final_eps: float
    max_error_test: float
    metrics: ErrorReport
    stability: Optional[StabilityReport]
    aaa: FitOutcome
    history: List[RoundRecord] = field(default_factory=list)
    sdp_solution: Optional[SdpSolution] = None
    relaxation: Optional[RelaxationReport] = None

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "met_tolerance": self.met_tolerance,
            "rounds": self.rounds,
            "sdp_calls": self.sdp_invocations,
            "final_eps": self.final_eps,
            "k": self.model.k,
            "max_error_test": self.max_error_test,
            "history": [record.to_dict() for record in self.history],
            "sdp": self.sdp_solution.to_dict() if self.sdp_solution else None,
            "relaxation": self.relaxation.to_dict() if self.relaxation else None,
        }


def _stabilize(outcome: FitOutcome, cfg: StabAaaConfig):
    model = outcome.model
    den = build_denominator_realization(model)
    try:
        td = transform_denominator(den, outcome.loewner_real, outcome.x_opt)
    except ConditioningError as e:
        raise StabilizationError(f"cannot stabilize: {e}", model=model) from e

    problem = build_stability_sdp(td, cfg.sdp)
    try:
        solution = solve_sdp(problem)
    except SdpNumericalError as e:
        raise StabilizationError(f"the stability program broke down: {e}", model=model) from e
    if solution.status == STATUS_INFEASIBLE:
        raise StabilizationError("the stability program is infeasible", model=model)
    if solution.status != STATUS_OPTIMAL:
        logger.warning(f"Stability program ended with status {solution.status}; using its last iterate")

    try:
        weights = recover_weights(solution, td, allow_inexact=True)
    except (ConditioningError, SdpInfeasibleError) as e:
        raise StabilizationError(f"cannot recover stabilized weights: {e}", model=model) from e

    stabilized = model.with_weights(weights)
    report = classify_stability(stabilized)
    if not report.stable:
        raise StabilizationError(
            f"stabilized model still has {report.unstable_poles.size} unstable pole(s)", model=model
        )
    return stabilized, report, solution, relaxation_report(solution, problem)


def stabaaa_fit(ds: FrequencyDataset, cfg: Optional[StabAaaConfig] = None, trace: Optional[TraceHook] = None):
    """Fit a stable real barycentric model.

    Each round runs AAA at ε_M. A stable result is returned as is. An unstable one is stabilized by
    the stability program; it is returned when its error over the current test set is within ε or
    when the retry cap is reached, and otherwise ε_M ← θ·ε_M and AAA continues.

    Args:
        ds: Dataset, preferably normalized.
        cfg: Loop configuration; defaults to StabAaaConfig().
        trace: Optional per-iteration AAA callback.

    Returns:
        StabAaaOutcome whose model has no pole in the closed right half-plane.

    Raises:
        StabilizationError: If stabilization is impossible; the unconstrained model is attached.
        SaturationError: If AAA runs out of test samples.
    """
    cfg = cfg or StabAaaConfig()

    history: List[RoundRecord] = []
    sdp_calls = 0
    state = None
    round_no = 1
    while True:
        eps_m = cfg.eps_for_round(round_no)
        outcome = run_aaa(ds, cfg.aaa_settings(eps_m), state=state if cfg.resume else None, trace=trace)
        state = outcome.state
        model = outcome.model

        report = classify_stability(model) if model.k else None
        if report is None or report.stable:
            metrics = error_metrics(model, ds, cfg.error_mode)
            history.append(RoundRecord(round_no, eps_m, model.k, True, False, outcome.final_max_error, metrics.e_inf))
            met = outcome.final_max_error <= cfg.eps
            logger.info(f"stabAAA round {round_no}: unconstrained model is stable (k={model.k})")
            return StabAaaOutcome(
                model=model,
                stable=True,
                met_tolerance=met,
                rounds=round_no,
                sdp_invocations=sdp_calls,
                final_eps=eps_m,
                max_error_test=outcome.final_max_error,
                metrics=metrics,
                stability=report,
                aaa=outcome,
                history=history,
            )

        logger.info(f"stabAAA round {round_no}: {report.unstable_poles.size} unstable pole(s) at k={model.k}")
        sdp_calls += 1
        stabilized, st_report, solution, relaxation = _stabilize(outcome, cfg)
        test = outcome.test_indices
        test_errors = sample_errors(stabilized, ds, cfg.error_mode, indices=test)
        max_error_test = float(np.max(test_errors)) if test_errors.size else 0.0
        metrics = error_metrics(stabilized, ds, cfg.error_mode)
        history.append(RoundRecord(round_no, eps_m, stabilized.k, True, True, max_error_test, metrics.e_inf))
        logger.info(f"stabAAA round {round_no}: stabilized test error {max_error_test:.3e} (eps {cfg.eps:.3g})")

        met = max_error_test <= cfg.eps
        if met or round_no > cfg.m_max:
            if not met:
                logger.warning(
                    f"Tolerance {cfg.eps:.3g} not met after {round_no} round(s); returning the stabilized model"
                )
            return StabAaaOutcome(
                model=stabilized,
                stable=True,
                met_tolerance=met,
                rounds=round_no,
                sdp_invocations=sdp_calls,
                final_eps=eps_m,
                max_error_test=max_error_test,
                metrics=metrics,
                stability=st_report,
                aaa=outcome,
                history=history,
                sdp_solution=solution,
                relaxation=relaxation,
            )
        round_no += 1


@dataclass(frozen=True, eq=False)
class PoleResidueModel:
    """H(s) = d + Σ rᵢ/(s − pᵢ) with conjugate-closed poles and residues."""

    poles: np.ndarray
    residues: np.ndarray
    constant: float = 0.0

    @property
    def order(self) -> int:
        return int(self.poles.size)

    @property
    def stable(self) -> bool:
        return bool(self.poles.size == 0 or np.max(self.poles.real) < 0)

    def evaluate(self, s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.constant + (1.0 / (s_arr[:, None] - self.poles[None, :])) @ self.residues
        return out if np.ndim(s) else complex(out[0])

    def __call__(self, s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        return self.evaluate(s)

    def to_dict(self) -> dict:
        return {
            "poles": [[p.real, p.imag] for p in self.poles],
            "residues": [[r.real, r.imag] for r in self.residues],
            "constant": self.constant,
        }


def _split_conjugates(poles: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(poles)))) if poles.size else 1.0
    real = poles[np.abs(poles.imag) <= CONJUGATE_TOL * scale].real
    upper = poles[poles.imag > CONJUGATE_TOL * scale]
    return real, upper


def fit_residues(poles: np.ndarray, ds: FrequencyDataset) -> PoleResidueModel:
    """Least-squares residues and a real constant for fixed conjugate-closed poles.

    Real poles get real residues and each pair (p, p*) gets residues (r, r*), so the model is real.
    """
    real, upper = _split_conjugates(np.asarray(poles, dtype=complex))
    s = ds.s[:, None]
    columns = [1.0 / (s - real[None, :])]
    if upper.size:
        first, second = 1.0 / (s - upper[None, :]), 1.0 / (s - upper.conj()[None, :])
        columns += [first + second, 1j * (first - second)]
    columns.append(np.ones((ds.count, 1)))
    basis = np.hstack(columns)

    system = np.vstack([basis.real, basis.imag])
    rhs = np.concatenate([ds.values.real, ds.values.imag])
    theta, *_ = scipy.linalg.lstsq(system, rhs)

    n_real, n_pair = real.size, upper.size
    pair_res = theta[n_real : n_real + n_pair] + 1j * theta[n_real + n_pair : n_real + 2 * n_pair]
    return PoleResidueModel(
        poles=np.concatenate([real.astype(complex), upper, upper.conj()]),
        residues=np.concatenate([theta[:n_real].astype(complex), pair_res, pair_res.conj()]),
        constant=float(theta[-1]),
    )


def truncate_refit(m: BarycentricModel, ds: FrequencyDataset, mode: str = "truncate") -> PoleResidueModel:
    """Drop (``truncate``) or mirror p → −p* (``flip``) the unstable poles, then refit residues.

    Raises:
        DegenerateDataError: If no stable pole remains.
    """
    if mode not in REFIT_MODES:
        raise DataValidationError(f"unknown refit mode {mode!r}; expected one of {REFIT_MODES}")
    p = pole_residue(m).finite_poles
    if mode == "flip":
        p = np.where(p.real > 0, -p.conj(), p)
    kept = p[p.real < 0]
    if kept.size == 0:
        raise DegenerateDataError("every pole is unstable; nothing is left to refit")
    logger.info(f"{mode}: kept {kept.size} of {p.size} poles")
    return fit_residues(kept, ds)
