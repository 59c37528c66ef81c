"""Case classification and noisy-response generation with noise reuse.

A request for an already-registered query type is matched against the noise
scales previously recorded for that type on the same dataset:

* no history                      -> fresh answer (charged in full)
* a recorded scale equals sigma_m -> exact reuse (free, no dataset access)
* sigma_m below every recording   -> partial reuse of the smallest-scale
                                     record (charged for the tightening only)
* otherwise                       -> full reuse of the largest recording
                                     below sigma_m, plus a free noise top-up

The reuse fraction for partial reuse, ``(sigma_m / sigma_min)**2``, is the
cost-minimizing choice among all fractions ``r`` with
``sigma_m**2 - r**2 sigma_min**2 >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .dp_core import sample_gaussian
from .errors import CasePreconditionError, InvalidParameterError

# Relative tolerance for treating two noise scales as equal.  Requested
# scales arrive through floating-point (epsilon, delta) conversions, so exact
# equality would misclassify repeats as chains of full reuses.
SIGMA_MATCH_RTOL = 1e-9


class CaseKind(str, Enum):
    FRESH = "fresh"
    EXACT_REUSE = "exact_reuse"
    PARTIAL_REUSE = "partial_reuse"
    FULL_REUSE = "full_reuse"


@dataclass(frozen=True)
class CaseTag:
    """Outcome of classification; ``reuse_ref`` is the reused record's index."""

    kind: CaseKind
    reuse_ref: int | None = None


@dataclass(frozen=True)
class HistoryEntry:
    """One prior release of a query type: its scale, value and ledger index."""

    sigma: float
    noisy_value: float
    index: int


def sigmas_match(sigma_a: float, sigma_m: float) -> bool:
    """True when ``sigma_a`` equals the requested scale up to the match band."""
    return abs(sigma_a - sigma_m) <= SIGMA_MATCH_RTOL * sigma_m


def classify(sigma_m: float, history: Sequence[HistoryEntry]) -> CaseTag:
    """Decide how the requested scale relates to the recorded history.

    Ties (several equally small or equally large scales) resolve to the
    earliest record so that replays are deterministic.
    """
    if not history:
        return CaseTag(CaseKind.FRESH)
    for entry in history:
        if sigmas_match(entry.sigma, sigma_m):
            return CaseTag(CaseKind.EXACT_REUSE, entry.index)
    smallest = min(history, key=lambda e: (e.sigma, e.index))
    if sigma_m < smallest.sigma:
        return CaseTag(CaseKind.PARTIAL_REUSE, smallest.index)
    # No exact match and sigma_m above the minimum, so a strictly smaller
    # scale exists; max() keeps the earliest entry among ties.
    below = [e for e in history if e.sigma < sigma_m]
    largest_below = max(below, key=lambda e: e.sigma)
    return CaseTag(CaseKind.FULL_REUSE, largest_below.index)


def optimal_reuse_ratio(sigma_m: float, sigma_j: float) -> float:
    """Cost-minimizing fraction of the old noise to reuse.

    Returns 1 when ``sigma_m >= sigma_j`` (the old answer can be reused in
    full) and ``(sigma_m / sigma_j)**2`` otherwise.
    """
    if not (math.isfinite(sigma_m) and sigma_m > 0.0):
        raise InvalidParameterError(f"sigma_m must be positive, got {sigma_m}")
    if not (math.isfinite(sigma_j) and sigma_j > 0.0):
        raise InvalidParameterError(f"sigma_j must be positive, got {sigma_j}")
    if sigma_m >= sigma_j:
        return 1.0
    return (sigma_m / sigma_j) ** 2


def answer_fresh(true_value: float, sigma_m: float, rng: np.random.Generator) -> float:
    """Fresh noisy answer: ``true_value + N(0, sigma_m^2)``."""
    if not (math.isfinite(sigma_m) and sigma_m > 0.0):
        raise InvalidParameterError(f"sigma_m must be positive, got {sigma_m}")
    return true_value + sample_gaussian(0.0, sigma_m, rng)


def answer_exact(prev_noisy: float) -> float:
    """Exact reuse returns the stored answer unchanged; no dataset access."""
    return prev_noisy


def answer_partial(
    true_value: float,
    prev_noisy: float,
    sigma_m: float,
    sigma_min: float,
    rng: np.random.Generator,
) -> float:
    """Partial reuse: scale the stored noise down and top up with fresh noise.

    With ``r = (sigma_m / sigma_min)**2`` the result is
    ``true_value + r * (prev_noisy - true_value) + N(0, sigma_m^2 - sigma_m^4 / sigma_min^2)``,
    whose deviation from the true value is again Gaussian at scale sigma_m.
    Needs dataset access for ``true_value``.
    """
    if sigma_m >= sigma_min:
        raise CasePreconditionError(
            f"partial reuse requires sigma_m < sigma_min, got {sigma_m} >= {sigma_min}"
        )
    ratio = optimal_reuse_ratio(sigma_m, sigma_min)
    extra_var = max(sigma_m**2 - sigma_m**4 / sigma_min**2, 0.0)
    return (
        true_value
        + ratio * (prev_noisy - true_value)
        + sample_gaussian(0.0, math.sqrt(extra_var), rng)
    )


def answer_full(
    prev_noisy: float, sigma_l: float, sigma_m: float, rng: np.random.Generator
) -> float:
    """Full reuse: stored answer plus a fresh top-up to reach sigma_m.

    Returns ``prev_noisy + N(0, sigma_m^2 - sigma_l^2)``.  Free of charge and
    computed without dataset access.
    """
    if sigma_l >= sigma_m:
        raise CasePreconditionError(
            f"full reuse requires sigma_l < sigma_m, got {sigma_l} >= {sigma_m}"
        )
    return prev_noisy + sample_gaussian(
        0.0, math.sqrt(sigma_m**2 - sigma_l**2), rng
    )
