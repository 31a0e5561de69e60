"""Algorithm dispatch shared by the command-line handlers.

This module contains FitRequest, the validated set of fitting options, run_algorithm, which runs one of
the four algorithms and collects its metrics and pole map, and compare_algorithms, which runs several of
them concurrently on the same dataset. Handlers only parse flags and write artifacts.
"""

import asyncio
import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from ..config.numerics import DEFAULT_M_MAX, DEFAULT_THETA
from ..config.settings import (
    ALGORITHMS,
    DEFAULT_ALGORITHM,
    DEFAULT_ERROR_MODE,
    DEFAULT_SEED,
    DEFAULT_TOL,
    REFIT_MODES,
    SEED_ENV_VAR,
)
from ..core.errors import DataValidationError
from .aaa import TraceHook, aaa_fit
from .backends import SdpSettings
from .barycentric import (
    BarycentricModel,
    DescriptorRealization,
    denominator_zeros,
    finite_generalized_eigenvalues,
    pole_residue,
)
from .datamodel import ErrorReport, FrequencyDataset, error_metrics
from .loewner import loewner_fit, real_quasi_loewner
from .sdp import StabilitySdp, build_stability_sdp
from .stabaaa import PoleResidueModel, StabAaaConfig, stabaaa_fit, truncate_refit
from .stability import StabilityReport, build_denominator_realization, classify_stability, transform_denominator

logger = logging.getLogger(__name__)

FittedModel = Union[BarycentricModel, PoleResidueModel, DescriptorRealization]


@dataclass(frozen=True)
class FitRequest:
    """Options of one fit; validated on construction so bad flags fail before any computation."""

    algorithm: str = DEFAULT_ALGORITHM
    eps: float = DEFAULT_TOL
    theta: float = DEFAULT_THETA
    m_max: int = DEFAULT_M_MAX
    max_iter: Optional[int] = None
    error_mode: str = DEFAULT_ERROR_MODE
    refit_mode: str = "truncate"
    resume: bool = True
    sdp: SdpSettings = field(default_factory=SdpSettings)

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise DataValidationError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.refit_mode not in REFIT_MODES:
            raise DataValidationError(f"unknown refit mode {self.refit_mode!r}; expected one of {REFIT_MODES}")
        if self.max_iter is not None and self.max_iter < 1:
            raise DataValidationError(f"max order must be at least 1, got {self.max_iter!r}")
        self.stabaaa_config()

    def stabaaa_config(self) -> StabAaaConfig:
        return StabAaaConfig(
            eps=self.eps,
            theta=self.theta,
            m_max=self.m_max,
            max_iter=self.max_iter,
            error_mode=self.error_mode,
            resume=self.resume,
            sdp=self.sdp,
        )


@dataclass(frozen=True, eq=False)
class PoleMap:
    poles: np.ndarray
    residues: Optional[np.ndarray]
    constant: float
    zeros: np.ndarray
    infinite_count: int
    report: Optional[StabilityReport] = None

    @property
    def stable(self) -> bool:
        if self.report is not None:
            return self.report.stable
        return bool(self.poles.size == 0 or np.max(self.poles.real) < 0)


def model_evaluator(model: FittedModel) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(model, DescriptorRealization):
        return model.transfer
    return model


def model_order(model: FittedModel) -> int:
    if isinstance(model, BarycentricModel):
        return model.k
    return model.order


def model_poles(model: FittedModel) -> PoleMap:
    """Poles, residues and zeros of any fitted model, with the stability report for barycentric ones."""
    empty = np.zeros(0, dtype=complex)
    if isinstance(model, BarycentricModel):
        if model.k == 0:
            return PoleMap(empty, empty, model.constant, empty, 0)
        pr = pole_residue(model)
        zeros = denominator_zeros(model)
        return PoleMap(pr.finite_poles, pr.residues, pr.constant, zeros, pr.infinite_count, classify_stability(model))
    if isinstance(model, PoleResidueModel):
        return PoleMap(model.poles, model.residues, model.constant, empty, 0)
    poles, infinite = finite_generalized_eigenvalues(model.A, model.E)
    return PoleMap(poles, None, 0.0, empty, infinite)


@dataclass(frozen=True, eq=False)
class FitResult:
    algorithm: str
    model: FittedModel
    metrics: ErrorReport
    poles: PoleMap
    met_tolerance: bool
    seconds: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return model_order(self.model)

    @property
    def stable(self) -> bool:
        return self.poles.stable

    def summary(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "k": self.k,
            "e_inf": self.metrics.e_inf,
            "e_2": self.metrics.e_2,
            "e_rms": self.metrics.e_rms,
            "stable": self.stable,
            "seconds": self.seconds,
            "status": "ok",
        }


def run_algorithm(ds: FrequencyDataset, request: FitRequest, trace: Optional[TraceHook] = None) -> FitResult:
    """Fit ``ds`` with ``request.algorithm`` and measure the result on every sample.

    Args:
        ds: Dataset, normalized unless the caller chose otherwise.
        request: Validated options.
        trace: Optional AAA iteration callback.

    Returns:
        FitResult; ``met_tolerance`` is AAA convergence for ``aaa``, the stabAAA verdict for ``stabaaa``
        and E∞ ≤ ε for the baselines.
    """
    start = time.perf_counter()
    logger.info(f"Running {request.algorithm} on {ds.count} samples (eps={request.eps:g})")
    diagnostics: Dict[str, Any] = {}

    if request.algorithm == "stabaaa":
        outcome = stabaaa_fit(ds, request.stabaaa_config(), trace=trace)
        model: FittedModel = outcome.model
        met = outcome.met_tolerance
        diagnostics = outcome.to_dict()
    elif request.algorithm == "loewner":
        model = loewner_fit(ds)
        met = None
    else:
        fit = aaa_fit(ds, eps=request.eps, max_iter=request.max_iter, error_mode=request.error_mode, trace=trace)
        diagnostics = {
            "converged": fit.converged,
            "aaa_k": fit.k,
            "final_max_error": fit.final_max_error,
            "near_zero_weights": fit.near_zero_weights.tolist(),
            "history": [record.to_dict() for record in fit.state.history],
        }
        if request.algorithm == "aaa":
            model, met = fit.model, fit.converged
        else:
            model, met = truncate_refit(fit.model, ds, request.refit_mode), None
            diagnostics["refit_mode"] = request.refit_mode

    metrics = error_metrics(model_evaluator(model), ds, request.error_mode)
    if met is None:
        met = metrics.e_inf <= request.eps
    result = FitResult(
        algorithm=request.algorithm,
        model=model,
        metrics=metrics,
        poles=model_poles(model),
        met_tolerance=bool(met),
        seconds=time.perf_counter() - start,
        diagnostics=diagnostics,
    )
    logger.info(
        f"{request.algorithm}: k={result.k}, E_inf={metrics.e_inf:.3e}, stable={result.stable} "
        f"in {result.seconds:.2f} s"
    )
    return result


async def compare_algorithms(
    ds: FrequencyDataset,
    request: FitRequest,
    algorithms: Sequence[str],
    trace: Optional[TraceHook] = None,
) -> List[Union[FitResult, BaseException]]:
    """Run several algorithms on the shared immutable dataset in worker threads.

    Failures are returned in place of the result so that one failing algorithm does not hide the others.
    """
    requests = [replace(request, algorithm=name) for name in algorithms]
    tasks = [asyncio.to_thread(run_algorithm, ds, item, trace) for item in requests]
    return list(await asyncio.gather(*tasks, return_exceptions=True))


def seeded_rng() -> np.random.Generator:
    raw = os.environ.get(SEED_ENV_VAR, str(DEFAULT_SEED))
    try:
        return np.random.default_rng(int(raw))
    except ValueError as e:
        raise DataValidationError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from e


def interpolation_spot_check(model: BarycentricModel, rng: np.random.Generator, count: int = 5) -> float:
    """Largest |Ĥ(jλᵢ) − hᵢ| over a random sample of support points with non-negligible weight."""
    active = np.flatnonzero(np.abs(model.weights) > 1e-12 * np.linalg.norm(model.weights)) if model.k else []
    if len(active) == 0:
        return 0.0
    chosen = rng.choice(active, size=min(count, len(active)), replace=False)
    response = np.asarray(model(1j * model.support[chosen]))
    return float(np.max(np.abs(response - model.values[chosen])))


def rebuild_stability_sdp(
    model: BarycentricModel, ds: FrequencyDataset, settings: Optional[SdpSettings] = None
) -> StabilitySdp:
    """Stability program of a saved model, rebuilt from the normalized samples it was fitted on.

    The support points must be samples of ``ds``; the remaining samples form the test set.
    """
    if model.k == 0:
        raise DataValidationError("a constant model has no stability program")
    idx = np.clip(np.searchsorted(ds.freqs, model.support), 0, ds.count - 1)
    if not np.allclose(ds.freqs[idx], model.support, rtol=1e-12, atol=0.0):
        raise DataValidationError("model support frequencies are not samples of this dataset")
    test = np.setdiff1d(np.arange(ds.count), idx)
    M = real_quasi_loewner(model.support, model.values, ds.freqs[test], ds.values[test])
    td = transform_denominator(build_denominator_realization(model), M, model.real_weights)
    return build_stability_sdp(td, settings)
