"""Budget state transitions and ledger-replay privacy-loss audits.

The budget is a single epsilon-squared balance at a fixed ``delta_budget``.
Charges are check-then-commit: a request that would overdraw leaves the state
untouched.  Independently of the incremental charges, the total privacy loss
of a recorded history can be recomputed from the ledger alone: fresh answers
contribute ``sensitivity^2 / sigma^2`` each, and every partial-reuse chain of
a query type contributes the difference between its tightest scale and the
scale of the fresh answer that roots the chain.  Exact and full reuses
contribute nothing.  The incremental charges telescope to exactly this total,
which is what ``audit`` cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .dp_core import epsilon_from_loss_variance, _log_term
from .errors import (
    CorruptHistoryError,
    InsufficientBudgetError,
    InvalidParameterError,
)
from .ledger import NoiseRecord
from .reuse import CaseKind, HistoryEntry, classify, sigmas_match


@dataclass(frozen=True)
class BudgetState:
    """Remaining epsilon-squared balance plus the fixed reporting delta."""

    eps_squared_budget: float
    eps_squared_remaining: float
    delta_budget: float

    def __post_init__(self) -> None:
        if math.isnan(self.eps_squared_budget) or self.eps_squared_budget < 0.0:
            raise InvalidParameterError(
                f"eps_squared_budget must be >= 0, got {self.eps_squared_budget}"
            )
        if not 0.0 <= self.eps_squared_remaining <= self.eps_squared_budget:
            raise InvalidParameterError(
                "eps_squared_remaining must lie in [0, eps_squared_budget], got "
                f"{self.eps_squared_remaining} of {self.eps_squared_budget}"
            )
        if not (0.0 < self.delta_budget < 1.0):
            raise InvalidParameterError(
                f"delta_budget must be in (0, 1), got {self.delta_budget}"
            )


def initial_budget(epsilon_budget: float, delta_budget: float) -> BudgetState:
    if math.isnan(epsilon_budget) or epsilon_budget < 0.0:
        raise InvalidParameterError(
            f"epsilon_budget must be >= 0, got {epsilon_budget}"
        )
    squared = epsilon_budget**2
    return BudgetState(
        eps_squared_budget=squared,
        eps_squared_remaining=squared,
        delta_budget=delta_budget,
    )


def charge(state: BudgetState, cost: float) -> BudgetState:
    """Commit a non-negative charge, or raise without changing anything.

    The boundary is inclusive: a charge that lands the balance exactly on
    zero is accepted.
    """
    if math.isnan(cost) or cost < 0.0:
        raise InvalidParameterError(f"cost must be >= 0, got {cost}")
    remaining = state.eps_squared_remaining - cost
    if remaining < 0.0:
        raise InsufficientBudgetError(
            f"insufficient privacy budget: cost {cost} exceeds remaining "
            f"{state.eps_squared_remaining}",
            eps_squared_remaining=state.eps_squared_remaining,
        )
    return BudgetState(
        eps_squared_budget=state.eps_squared_budget,
        eps_squared_remaining=remaining,
        delta_budget=state.delta_budget,
    )


def replay_budget(
    records: Iterable[NoiseRecord], epsilon_budget: float, delta_budget: float
) -> BudgetState:
    """Budget state implied by a ledger; the ledger is the source of truth."""
    state = initial_budget(epsilon_budget, delta_budget)
    for record in records:
        state = charge(state, record.eps_squared_cost)
    return state


@dataclass
class _TypeState:
    history: list[HistoryEntry]
    fresh_sigma: float | None = None
    root_sigma: float | None = None  # scale of the record the first partial reused
    last_partial_sigma: float | None = None


def total_loss_variance_ours(
    records: Sequence[NoiseRecord], sensitivities: Mapping[str, float]
) -> float:
    """Recompute the loss variance of a recorded history by replaying it.

    Re-derives every record's case from the recorded scales and cross-checks
    it against the stored tag, so a ledger that could not have been produced
    by the answering path is rejected as corrupt.
    """
    datasets = {r.dataset_hash for r in records}
    if len(datasets) > 1:
        raise CorruptHistoryError("records span more than one dataset")

    by_index: dict[int, NoiseRecord] = {}
    states: dict[str, _TypeState] = {}
    for position, record in enumerate(records):
        if record.index in by_index or record.index != position:
            raise CorruptHistoryError(f"record index {record.index} out of sequence")
        if record.query_type not in sensitivities:
            raise CorruptHistoryError(
                f"no sensitivity registered for query type {record.query_type!r}"
            )
        state = states.setdefault(record.query_type, _TypeState(history=[]))
        derived = classify(record.sigma, state.history)
        if derived.kind != record.case_tag:
            raise CorruptHistoryError(
                f"record {record.index}: stored case {record.case_tag.value!r} "
                f"but history implies {derived.kind.value!r}"
            )
        if record.case_tag is CaseKind.FRESH:
            if record.reuse_ref is not None:
                raise CorruptHistoryError(
                    f"record {record.index}: fresh answer cannot reference a record"
                )
            state.fresh_sigma = record.sigma
        else:
            ref = record.reuse_ref
            if ref is None or ref not in by_index:
                raise CorruptHistoryError(
                    f"record {record.index}: reuse without a recorded predecessor"
                )
            referenced = by_index[ref]
            if referenced.query_type != record.query_type:
                raise CorruptHistoryError(
                    f"record {record.index}: reuses a different query type"
                )
            if record.case_tag is CaseKind.EXACT_REUSE and not sigmas_match(
                referenced.sigma, record.sigma
            ):
                raise CorruptHistoryError(
                    f"record {record.index}: exact reuse of a different scale"
                )
            if record.case_tag is CaseKind.FULL_REUSE and not (
                referenced.sigma < record.sigma
            ):
                raise CorruptHistoryError(
                    f"record {record.index}: full reuse of a non-smaller scale"
                )
            if record.case_tag is CaseKind.PARTIAL_REUSE:
                # Ties on the minimum may resolve to any of the equal records.
                derived_min = next(
                    e for e in state.history if e.index == derived.reuse_ref
                )
                if not sigmas_match(referenced.sigma, derived_min.sigma):
                    raise CorruptHistoryError(
                        f"record {record.index}: partial reuse of a non-minimal scale"
                    )
                if state.root_sigma is None:
                    state.root_sigma = referenced.sigma
                state.last_partial_sigma = record.sigma
        by_index[record.index] = record
        state.history.append(
            HistoryEntry(
                sigma=record.sigma, noisy_value=record.noisy_response, index=record.index
            )
        )

    total = 0.0
    for query_type, state in states.items():
        sensitivity = sensitivities[query_type]
        if state.fresh_sigma is None:
            raise CorruptHistoryError(
                f"query type {query_type!r} has releases but no fresh root"
            )
        total += (sensitivity / state.fresh_sigma) ** 2
        if state.last_partial_sigma is not None:
            total += (sensitivity / state.last_partial_sigma) ** 2
            total -= (sensitivity / state.root_sigma) ** 2
    return total


def total_loss_variance_naive(series: Iterable[tuple[float, float]]) -> float:
    """Loss variance when every (sensitivity, sigma) pair is answered fresh."""
    total = 0.0
    for sensitivity, sigma in series:
        if sigma <= 0.0:
            raise InvalidParameterError(f"sigma must be positive, got {sigma}")
        total += (sensitivity / sigma) ** 2
    return total


@dataclass(frozen=True)
class SpendPoint:
    """Cumulative spending after one record, for cost-curve plots."""

    index: int
    query_type: str
    case_tag: str
    eps_squared_cost: float
    cum_eps_squared_ours: float
    cum_eps_ours: float
    cum_eps_naive: float


@dataclass(frozen=True)
class SpendReport:
    eps_squared_spent_ours: float
    eps_ours: float
    eps_squared_naive: float
    eps_naive: float
    per_query: tuple[SpendPoint, ...]


def spend_report(
    records: Sequence[NoiseRecord],
    sensitivities: Mapping[str, float],
    delta_budget: float,
) -> SpendReport:
    """Compare the recorded spending against the answer-everything-fresh baseline.

    ``eps_ours`` comes from the independently recomputed loss variance, not
    from the stored charges, so a mismatch between the two is visible.
    """
    log_term = _log_term(delta_budget)
    points = []
    cum_cost = 0.0
    cum_naive_variance = 0.0
    for record in records:
        sensitivity = sensitivities[record.query_type]
        cum_cost += record.eps_squared_cost
        cum_naive_variance += (sensitivity / record.sigma) ** 2
        points.append(
            SpendPoint(
                index=record.index,
                query_type=record.query_type,
                case_tag=record.case_tag.value,
                eps_squared_cost=record.eps_squared_cost,
                cum_eps_squared_ours=cum_cost,
                cum_eps_ours=math.sqrt(cum_cost),
                cum_eps_naive=math.sqrt(log_term * cum_naive_variance),
            )
        )
    loss_ours = total_loss_variance_ours(records, sensitivities)
    return SpendReport(
        eps_squared_spent_ours=cum_cost,
        eps_ours=epsilon_from_loss_variance(loss_ours, delta_budget),
        eps_squared_naive=log_term * cum_naive_variance,
        eps_naive=epsilon_from_loss_variance(cum_naive_variance, delta_budget),
        per_query=tuple(points),
    )
