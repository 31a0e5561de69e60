"""Numerical tolerances and defaults for the fitting pipeline.

This module contains the thresholds used by the barycentric, Loewner, AAA, stability and SDP
services. Values are shared so that every module classifies poles, ranks and margins the same way.
"""

from typing import Final, Tuple

# Rank and conditioning
RANK_TOL: Final[float] = 1e-14
LOEWNER_RANK_TOL: Final[float] = 1e-12
WEIGHT_ZERO_TOL: Final[float] = 1e-14
COND_LIMIT: Final[float] = 1e12

# Pencil classification
INFINITE_BETA_TOL: Final[float] = 1e-12
INFINITE_RATIO: Final[float] = 1e12
BORDERLINE_REAL_PART: Final[float] = 1e-10
CONJUGATE_TOL: Final[float] = 1e-8
POLE_SEPARATION_TOL: Final[float] = 1e-8

# SDP
SDP_MARGIN_SCALE: Final[float] = 1e-8
SDP_GAIN_BOUND: Final[float] = 1e8
SDP_GAP_TOL: Final[float] = 1e-8
SDP_FEAS_TOL: Final[float] = 1e-8
SDP_MAX_ITERS: Final[int] = 100
SDP_STEP_FRACTION: Final[float] = 0.98
SDP_INFEASIBILITY_TOL: Final[float] = 1e-8
SDP_GAIN_PENALTY: Final[float] = 1e-10
SDP_POLISH_GAIN_STEPS: Final[Tuple[float, ...]] = (0.0,) + tuple(10.0**e for e in range(-8, 3))
SDP_SCHUR_SHIFTS: Final[Tuple[float, ...]] = (1e-14, 1e-12, 1e-10, 1e-8)
SDP_REFINEMENT_STEPS: Final[int] = 2
SDP_BACKTRACK_FACTOR: Final[float] = 0.5
SDP_MIN_STEP: Final[float] = 1e-10
SDP_NEAR_OPTIMAL_FACTOR: Final[float] = 1e3
STABILIZABILITY_TOL: Final[float] = 1e-10

# KYP verification
SPR_EQUALITY_TOL: Final[float] = 1e-8
SPR_GAIN_GRID: Final[Tuple[float, ...]] = tuple(10.0**e for e in range(-2, 5))

# stabAAA outer loop
DEFAULT_THETA: Final[float] = 0.1
DEFAULT_M_MAX: Final[int] = 5