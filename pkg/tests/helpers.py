"""Shared fixtures: a unit-sensitivity service and the 13-query worked stream."""

from __future__ import annotations

import math

import numpy as np

from dpledger import (
    ColumnSpec,
    Ledger,
    QueryRegistry,
    QueryService,
    build_query_type,
    ingest_csv,
)

DELTA_BUDGET = 1e-4
# 2 ln(1.25 / delta_budget)
LOG_TERM = 2.0 * math.log(1.25 / DELTA_BUDGET)

UNIT_TYPES = ("alpha", "beta", "gamma")

# A mixed stream over three query types whose scales exercise every case:
# three fresh roots, exact repeats, partial tightenings and full reuses.
REFERENCE_STREAM = (
    ("alpha", 1.0),
    ("beta", 3.0),
    ("gamma", 2.0),
    ("alpha", 2.5),
    ("beta", 2.0),
    ("alpha", 0.5),
    ("gamma", 2.0),
    ("beta", 2.5),
    ("beta", 1.5),
    ("alpha", 0.25),
    ("beta", 1.0),
    ("alpha", 0.75),
    ("gamma", 1.5),
)

REFERENCE_CASES = (
    "fresh",
    "fresh",
    "fresh",
    "full_reuse",
    "partial_reuse",
    "partial_reuse",
    "exact_reuse",
    "full_reuse",
    "partial_reuse",
    "partial_reuse",
    "partial_reuse",
    "full_reuse",
    "partial_reuse",
)

# 1-based positions of the queries that need the true value (fresh + partial).
REFERENCE_ACCESS_POSITIONS = (1, 2, 3, 5, 6, 9, 10, 11, 13)

# Loss variance of the recorded stream at unit sensitivity:
# one term per type at its tightest scale: 1/0.25^2 + 1/1^2 + 1/1.5^2.
REFERENCE_LOSS_VARIANCE = 16.0 + 1.0 + 1.0 / 2.25
# Everything-fresh baseline: sum of 1/sigma_i^2 over all 13 requests.
REFERENCE_NAIVE_VARIANCE = 25.8477777777778


def unit_dataset(n: int = 4):
    """Tiny table whose column average has sensitivity (n-0)/n = 1."""
    schema = (ColumnSpec(name="v", kind="numeric", domain=(0.0, float(n))),)
    body = "\n".join(str(i % 2) for i in range(n))
    return ingest_csv(f"v\n{body}\n".encode(), schema)


def unit_registry(dataset, names=UNIT_TYPES) -> QueryRegistry:
    registry = QueryRegistry()
    for name in names:
        registry.add(
            build_query_type(
                name,
                dataset=dataset,
                kind="average",
                column="v",
                domain=(0.0, float(dataset.row_count)),
            )
        )
    return registry


def make_unit_service(
    *,
    ledger: Ledger | None = None,
    epsilon_budget: float = 30.0,
    seed: int = 0,
    n: int = 4,
    evaluator=None,
    reuse_enabled: bool = True,
) -> QueryService:
    dataset = unit_dataset(n)
    return QueryService(
        dataset=dataset,
        registry=unit_registry(dataset),
        ledger=ledger if ledger is not None else Ledger(),
        epsilon_budget=epsilon_budget,
        delta_budget=DELTA_BUDGET,
        evaluator=evaluator,
        rng=np.random.default_rng(seed),
        reuse_enabled=reuse_enabled,
    )


def epsilon_for_sigma(sigma: float) -> float:
    """Epsilon that reproduces ``sigma`` at unit sensitivity and delta_budget."""
    return math.sqrt(LOG_TERM) / sigma


def replay_reference_stream(service: QueryService):
    """Feed the worked stream through the service, supplying sigma directly."""
    responses = []
    for query_type, sigma in REFERENCE_STREAM:
        responses.append(
            service.handle_query(
                query_type, epsilon_for_sigma(sigma), DELTA_BUDGET, sigma
            )
        )
    return responses
