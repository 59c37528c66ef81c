"""Closed-form mathematics for Gaussian-noise privacy accounting.

Noise is calibrated with the classical Gaussian-mechanism rule
``sigma = sqrt(2 ln(1.25/delta)) * sensitivity / epsilon``.  Privacy spending
is denominated in epsilon-squared at one fixed reporting delta
(``delta_budget``), which makes the cost of successive releases add linearly:
the per-query (epsilon, delta) only determines the noise scale, and every
charge is the unique epsilon-squared amount that reproduces that scale at the
reporting delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import InvalidParameterError

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class PrivacyParams:
    """A per-query privacy requirement: epsilon > 0 and delta in (0, 1)."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise InvalidParameterError(
                f"epsilon must be positive and finite, got {self.epsilon}"
            )
        _check_delta(self.delta, "delta")


def _check_delta(delta: float, name: str) -> None:
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"{name} must be in (0, 1), got {delta}")


def _check_positive(value: float, name: str) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


def _log_term(delta: float) -> float:
    # 2 ln(1.25/delta); positive for every delta < 1
    return 2.0 * math.log(1.25 / delta)


def gaussian_sigma(sensitivity: float, params: PrivacyParams) -> float:
    """Noise standard deviation that answers a query under ``params``.

    Returns ``sqrt(2 ln(1.25/delta)) * sensitivity / epsilon``, the classical
    calibration of zero-mean Gaussian noise for a query with the given
    l2-sensitivity.
    """
    _check_positive(sensitivity, "sensitivity")
    return math.sqrt(_log_term(params.delta)) * sensitivity / params.epsilon


def epsilon_squared_cost_fresh(
    sensitivity: float, sigma_m: float, delta_budget: float
) -> float:
    """Budget charge for a fresh answer at noise scale ``sigma_m``.

    The charge is expressed in the epsilon-squared currency at
    ``delta_budget``: it is the unique ``cost`` with
    ``gaussian_sigma(sensitivity, (sqrt(cost), delta_budget)) == sigma_m``,
    i.e. ``2 ln(1.25/delta_budget) * sensitivity**2 / sigma_m**2``.
    """
    _check_positive(sensitivity, "sensitivity")
    _check_positive(sigma_m, "sigma_m")
    _check_delta(delta_budget, "delta_budget")
    return _log_term(delta_budget) * (sensitivity / sigma_m) ** 2


def epsilon_squared_cost_partial(
    sensitivity: float, sigma_m: float, sigma_min: float, delta_budget: float
) -> float:
    """Budget charge for tightening a stored answer from ``sigma_min`` to ``sigma_m``.

    Only the *increment* of released information is charged:
    ``2 ln(1.25/delta_budget) * sensitivity**2 * (1/sigma_m**2 - 1/sigma_min**2)``.
    The charge telescopes: partial(a, b) + fresh-at-b equals fresh-at-a.

    Raises :class:`CasePreconditionError` unless ``sigma_m < sigma_min``; the
    caller must already have classified the request as a partial reuse.
    """
    from .errors import CasePreconditionError

    _check_positive(sensitivity, "sensitivity")
    _check_positive(sigma_m, "sigma_m")
    _check_positive(sigma_min, "sigma_min")
    _check_delta(delta_budget, "delta_budget")
    if sigma_m >= sigma_min:
        raise CasePreconditionError(
            f"partial reuse requires sigma_m < sigma_min, got {sigma_m} >= {sigma_min}"
        )
    return _log_term(delta_budget) * sensitivity**2 * (
        1.0 / sigma_m**2 - 1.0 / sigma_min**2
    )


def epsilon_from_loss_variance(v: float, delta_budget: float) -> float:
    """Epsilon at ``delta_budget`` equivalent to a loss variance of ``v``.

    When the accumulated privacy loss is Gaussian with variance ``v`` (and
    mean ``v/2``), the release history satisfies (epsilon, delta_budget)
    privacy for ``epsilon = sqrt(2 ln(1.25/delta_budget) * v)``.  ``v = 0``
    means nothing was released and maps to epsilon 0.
    """
    _check_delta(delta_budget, "delta_budget")
    if not (math.isfinite(v) and v >= 0.0):
        raise InvalidParameterError(f"loss variance must be >= 0, got {v}")
    return math.sqrt(_log_term(delta_budget) * v)


def erf_inverse(x: float) -> float:
    """Inverse error function on (-1, 1), via the standard-normal quantile."""
    if not (-1.0 < x < 1.0):
        raise InvalidParameterError(f"erf_inverse domain is (-1, 1), got {x}")
    return _STD_NORMAL.inv_cdf((x + 1.0) / 2.0) / math.sqrt(2.0)


def utility_alpha(sigma: float, beta: float) -> float:
    """Half-width ``alpha`` with ``P(|N(0, sigma^2)| <= alpha) = 1 - beta``.

    ``alpha = sigma * sqrt(2) * erf_inverse(1 - beta)``; at ``beta = 0.05``
    this is just under two standard deviations.
    """
    _check_positive(sigma, "sigma")
    if not (0.0 < beta < 1.0):
        raise InvalidParameterError(f"beta must be in (0, 1), got {beta}")
    # grouped so that alpha is exactly linear in sigma
    return sigma * (math.sqrt(2.0) * erf_inverse(1.0 - beta))


def sample_gaussian(mean: float, sigma: float, rng: np.random.Generator) -> float:
    """One draw from N(mean, sigma^2); returns ``mean`` exactly when sigma is 0."""
    if not (math.isfinite(sigma) and sigma >= 0.0):
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return mean
    return mean + sigma * rng.standard_normal()
