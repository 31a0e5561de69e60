"""Randomized suites over many generated systems; run with ``-m slow`` or deselect with ``-m "not slow"``."""

import time

import numpy as np
import pytest
import scipy.optimize

from stabaaa.services.aaa import aaa_fit
from stabaaa.services.barycentric import BarycentricModel, evaluate
from stabaaa.services.datamodel import FrequencyDataset, normalize
from stabaaa.services.interior_point import STATUS_MAX_ITERS, STATUS_OPTIMAL
from stabaaa.services.sdp import _margins_hold, build_stability_sdp, recover_weights, solve_sdp
from stabaaa.services.stabaaa import StabAaaConfig, stabaaa_fit
from stabaaa.services.stability import (
    aspr_gain_sweep,
    build_denominator_realization,
    classify_stability,
    transform_denominator,
)

from .conftest import rational_response
from .test_sdp import toy_denominator

pytestmark = pytest.mark.slow


def random_system(rng, pairs: int, damping=(0.05, 0.5), real_pole: bool = False):
    """Conjugate pole pairs −ζω ± jω·√(1−ζ²) with ω in [0.5, 5] and residues of magnitude 0.5 to 2."""
    omega = rng.uniform(0.5, 5.0, pairs)
    zeta = rng.uniform(*damping, pairs)
    upper = -zeta * omega + 1j * omega * np.sqrt(1.0 - zeta**2)
    residues = rng.uniform(0.5, 2.0, pairs) * np.exp(2j * np.pi * rng.uniform(size=pairs))
    poles_, residues_ = np.concatenate([upper, upper.conj()]), np.concatenate([residues, residues.conj()])
    if real_pole:
        poles_ = np.append(poles_, -rng.uniform(0.5, 5.0))
        residues_ = np.append(residues_, rng.uniform(0.5, 2.0))
    return poles_, residues_


def sampled_system(rng, poles_, residues_, samples: int, noise: float = 0.0) -> FrequencyDataset:
    freqs = np.logspace(-1, np.log10(20.0), samples)
    values = rational_response(poles_, residues_, 0.0, 1j * freqs)
    if noise:
        values = values + noise * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
    return normalize(FrequencyDataset(freqs, values))[0]


def noisy_system(rng, unstable: bool) -> FrequencyDataset:
    """Two or three pairs sampled with 1e-4 noise; one pair is slightly unstable if asked."""
    pairs = int(rng.integers(2, 4))
    poles_, residues_ = random_system(rng, pairs, damping=(0.05, 0.3))
    if unstable:
        poles_[0] = complex(rng.uniform(0.01, 0.05) * abs(poles_[0]), poles_[0].imag)
        poles_[pairs] = poles_[0].conjugate()
    return sampled_system(rng, poles_, residues_, 200, noise=1e-4)


def noisy_fit(rng, unstable: bool):
    return aaa_fit(noisy_system(rng, unstable), eps=1e-3)


def fits_of_kind(rng, count: int, stable: bool, attempts: int = 400):
    fits = []
    for _ in range(attempts):
        fit = noisy_fit(rng, unstable=not stable)
        report = classify_stability(fit.model)
        if fit.x_opt is not None and report.stable == stable and (report.cb > 0 or not stable):
            fits.append(fit)
        if len(fits) == count:
            break
    assert len(fits) == count
    return fits


def transformed(fit):
    return transform_denominator(build_denominator_realization(fit.model), fit.loewner_real, fit.x_opt)


class TestAaaProperties:
    def test_supports_are_interpolated(self):
        rng = np.random.default_rng(11)
        start = time.perf_counter()
        for _ in range(100):
            order = int(rng.integers(2, 21))
            poles_, residues_ = random_system(rng, order // 2, real_pole=bool(order % 2))
            ds = sampled_system(rng, poles_, residues_, int(rng.integers(200, 501)), noise=1e-6)
            m = aaa_fit(ds, eps=1e-6).model
            kept = np.abs(m.weights) > 1e-12 * np.linalg.norm(m.weights)
            assert np.all(np.abs(evaluate(m, 1j * m.support[kept]) - m.values[kept]) <= 1e-10)
            assert np.all(np.abs(evaluate(m, -1j * m.support[kept]) - m.values[kept].conj()) <= 1e-10)
        assert time.perf_counter() - start < 60.0

    def test_rational_data_is_recovered_exactly(self):
        rng = np.random.default_rng(12)
        recovered = 0
        for _ in range(100):
            pairs = int(rng.integers(1, 11))
            ds = sampled_system(rng, *random_system(rng, pairs), 300)
            fit = aaa_fit(ds, eps=1e-10)
            e_inf = float(np.max(np.abs(evaluate(fit.model, 1j * ds.freqs) - ds.values)))
            recovered += fit.k <= pairs + 2 and e_inf <= 1e-8
        assert recovered >= 95


class TestStabilizationProperties:
    def test_unstable_fits_come_back_stable_and_certified(self):
        rng = np.random.default_rng(13)
        checked = 0
        for _ in range(400):
            outcome = stabaaa_fit(noisy_system(rng, unstable=True), StabAaaConfig(eps=1e-3, m_max=0))
            if outcome.sdp_solution is None:
                continue
            report = classify_stability(outcome.model)
            assert report.stable and report.margin < 0
            assert outcome.relaxation.certified

            p = build_stability_sdp(transformed(outcome.aaa))
            y = p.pack(outcome.sdp_solution.Y, outcome.sdp_solution.g, outcome.sdp_solution.r)
            assert _margins_hold(p, p.normalized_Y(y), float(y[-2]))
            checked += 1
            if checked == 50:
                break
        assert checked == 50

    def test_stable_fits_keep_their_weights(self):
        rng = np.random.default_rng(14)
        for fit in fits_of_kind(rng, 20, stable=True):
            td = transformed(fit)
            solution = solve_sdp(build_stability_sdp(td))
            assert solution.polished
            weights = recover_weights(solution, td)
            assert np.linalg.norm(weights - fit.model.weights) <= 1e-5 * np.linalg.norm(fit.model.weights)

    def test_single_support_optimum_matches_a_direct_search(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            weight = complex(rng.standard_normal(), rng.standard_normal())
            p = build_stability_sdp(toy_denominator(weight))
            solution = solve_sdp(p)
            r_ipm = float(p.pack(solution.Y, solution.g, solution.r)[-1])
            r_search = smallest_schur_value(p.A_n, p.B_n, p.xbar_n)
            assert r_ipm == pytest.approx(r_search, abs=1e-4 * max(1.0, r_search))

    def test_dimension_62_solves_within_30_seconds(self):
        rng = np.random.default_rng(16)
        k = 31
        support = np.sort(rng.uniform(0.2, 20.0, k))
        model = BarycentricModel(
            support,
            rng.standard_normal(k) + 1j * rng.standard_normal(k),
            rng.standard_normal(k) + 1j * rng.standard_normal(k),
        )
        td = transform_denominator(
            build_denominator_realization(model), rng.standard_normal((200, 2 * k)), model.real_weights
        )
        start = time.perf_counter()
        solution = solve_sdp(build_stability_sdp(td))
        assert time.perf_counter() - start < 30.0
        assert solution.status in (STATUS_OPTIMAL, STATUS_MAX_ITERS)
        assert solution.Y is not None


class TestSprProperties:
    def test_stable_fits_have_a_certificate(self):
        rng = np.random.default_rng(17)
        for fit in fits_of_kind(rng, 20, stable=True):
            assert aspr_gain_sweep(build_denominator_realization(fit.model)) is not None

    def test_unstable_fits_have_none(self):
        rng = np.random.default_rng(18)
        for fit in fits_of_kind(rng, 20, stable=False):
            assert aspr_gain_sweep(build_denominator_realization(fit.model)) is None


def smallest_schur_value(A: np.ndarray, B: np.ndarray, x: np.ndarray) -> float:
    """Infimum of (B − Yx)ᵀY⁻¹(B − Yx) over 2×2 Y ≻ 0 with vᵀ(AY + YAᵀ)v < 0 for v ⊥ B.

    Y = [[eᵃ, tanh(t)·e^((a+c)/2)], [·, eᶜ]]; a coarse grid seeds Nelder-Mead.
    """
    v = np.array([-B[1], B[0]])
    w = A.T @ v

    def value(a, t, c):
        y11, y22 = np.exp(a), np.exp(c)
        y12 = np.tanh(t) * np.sqrt(y11 * y22)
        u0 = B[0] - (y11 * x[0] + y12 * x[1])
        u1 = B[1] - (y12 * x[0] + y22 * x[1])
        det = y11 * y22 - y12**2
        schur = (y22 * u0**2 - 2.0 * y12 * u0 * u1 + y11 * u1**2) / det
        stable = w[0] * (y11 * v[0] + y12 * v[1]) + w[1] * (y12 * v[0] + y22 * v[1]) < 0
        return np.where(stable & (det > 0), schur, 1e300)

    axis = np.linspace(-6.0, 6.0, 25)
    grid = np.meshgrid(axis, np.linspace(-3.0, 3.0, 25), axis, indexing="ij")
    values = value(*grid).ravel()
    starts = np.column_stack([g.ravel() for g in grid])[np.argsort(values)[:5]]
    best = float(values.min())
    for start in starts:
        result = scipy.optimize.minimize(
            lambda q: float(value(*q)),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000, "maxfev": 8000},
        )
        best = min(best, float(result.fun))
    return best
