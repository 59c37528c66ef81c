"""Cost-and-accuracy experiment: reuse answering vs. the naive baseline.

One run samples a stream of (query type, epsilon, delta) requests and plays
the identical stream through two in-memory services: one answering with
noise reuse, one answering every query fresh and charging it fresh.  Each
query owns a per-index noise seed that both modes share, so cost and error
differences are attributable to the answering policy alone.

Budget exhaustion does not stop a run: both modes keep answering so the cost
curves stay complete, and rows past the point where the cumulative charge
exceeds the configured budget are flagged per mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .dataset import Dataset, QueryRegistry, evaluate
from .errors import InvalidParameterError
from .ledger import Ledger
from .service import (
    QueryService,
    ServiceConfig,
    build_registry,
    load_config,
    load_dataset,
)

# Floor for the relative-error denominator, so near-zero true values (rare
# frequencies) do not blow up the accuracy comparison.
REL_ERR_FLOOR = 1e-9


@dataclass(frozen=True)
class SimConfig:
    service: ServiceConfig
    epsilon_range: tuple[float, float]
    delta_range: tuple[float, float]
    num_queries: int
    seed: int
    epsilon_budget: float
    delta_budget: float
    query_type_weights: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if self.num_queries < 1:
            raise InvalidParameterError("num_queries must be >= 1")
        for name, (lo, hi) in (
            ("epsilon_range", self.epsilon_range),
            ("delta_range", self.delta_range),
        ):
            if not (0.0 < lo <= hi):
                raise InvalidParameterError(f"{name} must satisfy 0 < low <= high")


def load_sim_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise InvalidParameterError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidParameterError(f"config {path} must be a mapping")
    try:
        service_path = Path(doc["service_config"])
        if not service_path.is_absolute():
            service_path = path.parent / service_path
        service = load_config(service_path)
        eps_lo, eps_hi = doc["epsilon_range"]
        del_lo, del_hi = doc["delta_range"]
        num_queries = int(doc["num_queries"])
        seed = int(doc["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"config {path} is incomplete: {exc}") from exc
    budget = doc.get("budget") or {}
    weights = doc.get("query_type_weights")
    if weights is not None:
        weights = {str(k): float(v) for k, v in weights.items()}
    return SimConfig(
        service=service,
        epsilon_range=(float(eps_lo), float(eps_hi)),
        delta_range=(float(del_lo), float(del_hi)),
        num_queries=num_queries,
        seed=seed,
        epsilon_budget=float(budget.get("epsilon", service.epsilon_budget)),
        delta_budget=float(budget.get("delta", service.delta_budget)),
        query_type_weights=weights,
    )


@dataclass(frozen=True)
class SimRow:
    index: int
    query_type: str
    epsilon: float
    delta: float
    sigma: float
    case: str
    eps_squared_cost: float
    cum_eps_squared_ours: float
    cum_eps_ours: float
    cum_eps_naive: float
    rel_err_ours: float
    rel_err_naive: float
    ours_over_budget: bool
    naive_over_budget: bool


@dataclass(frozen=True)
class SimRunResult:
    seed: int
    rows: tuple[SimRow, ...]

    @property
    def final_eps_ours(self) -> float:
        return self.rows[-1].cum_eps_ours

    @property
    def final_eps_naive(self) -> float:
        return self.rows[-1].cum_eps_naive

    @property
    def savings(self) -> float:
        if self.final_eps_naive == 0.0:
            return 0.0
        return 1.0 - self.final_eps_ours / self.final_eps_naive

    @property
    def total_rel_err_ours(self) -> float:
        return sum(r.rel_err_ours for r in self.rows)

    @property
    def total_rel_err_naive(self) -> float:
        return sum(r.rel_err_naive for r in self.rows)


@dataclass(frozen=True)
class SimParts:
    """Dataset and registry shared across runs (both are immutable)."""

    dataset: Dataset
    registry: QueryRegistry


def prepare_parts(config: SimConfig) -> SimParts:
    dataset = load_dataset(config.service)
    registry = build_registry(config.service, dataset)
    return SimParts(dataset=dataset, registry=registry)


def _sample_stream(config: SimConfig, registry: QueryRegistry, seed: int):
    names = registry.names()
    if config.query_type_weights is None:
        probabilities = np.full(len(names), 1.0 / len(names))
    else:
        missing = set(config.query_type_weights) - set(names)
        if missing:
            raise InvalidParameterError(f"weights for unregistered types: {missing}")
        raw = np.array([config.query_type_weights.get(n, 0.0) for n in names])
        if raw.sum() <= 0:
            raise InvalidParameterError("query_type_weights must sum to > 0")
        probabilities = raw / raw.sum()
    root = np.random.SeedSequence(seed)
    children = root.spawn(config.num_queries + 1)
    param_rng = np.random.default_rng(children[0])
    types = param_rng.choice(names, size=config.num_queries, p=probabilities)
    epsilons = param_rng.uniform(*config.epsilon_range, size=config.num_queries)
    deltas = param_rng.uniform(*config.delta_range, size=config.num_queries)
    return list(zip(types.tolist(), epsilons.tolist(), deltas.tolist())), children[1:]


def run_simulation(config: SimConfig, parts: SimParts, seed: int) -> SimRunResult:
    """Play one sampled stream through both modes; deterministic per seed."""
    stream, noise_seeds = _sample_stream(config, parts.registry, seed)

    # Unbounded internal budget: rows past the configured budget are flagged
    # rather than rejected, so the curves stay complete.
    def make_service(reuse_enabled: bool) -> QueryService:
        return QueryService(
            dataset=parts.dataset,
            registry=parts.registry,
            ledger=Ledger(),
            epsilon_budget=math.inf,
            delta_budget=config.delta_budget,
            reuse_enabled=reuse_enabled,
        )

    ours = make_service(reuse_enabled=True)
    naive = make_service(reuse_enabled=False)
    true_values = {
        name: evaluate(parts.dataset, parts.registry.get(name))
        for name in parts.registry.names()
    }

    budget_squared = config.epsilon_budget**2
    rows = []
    cum_ours = 0.0
    cum_naive = 0.0
    for i, (query_type, epsilon, delta) in enumerate(stream):
        rng_ours = np.random.default_rng(noise_seeds[i])
        rng_naive = np.random.default_rng(noise_seeds[i])
        resp_ours = ours.handle_query(query_type, epsilon, delta, rng=rng_ours)
        resp_naive = naive.handle_query(query_type, epsilon, delta, rng=rng_naive)
        true_value = true_values[query_type]
        denom = max(abs(true_value), REL_ERR_FLOOR)
        cum_ours += resp_ours.eps_squared_cost
        cum_naive += resp_naive.eps_squared_cost
        rows.append(
            SimRow(
                index=i,
                query_type=query_type,
                epsilon=epsilon,
                delta=delta,
                sigma=resp_ours.sigma,
                case=resp_ours.case_tag.kind.value,
                eps_squared_cost=resp_ours.eps_squared_cost,
                cum_eps_squared_ours=cum_ours,
                cum_eps_ours=math.sqrt(cum_ours),
                cum_eps_naive=math.sqrt(cum_naive),
                rel_err_ours=abs(resp_ours.noisy_value - true_value) / denom,
                rel_err_naive=abs(resp_naive.noisy_value - true_value) / denom,
                ours_over_budget=cum_ours > budget_squared,
                naive_over_budget=cum_naive > budget_squared,
            )
        )
    return SimRunResult(seed=seed, rows=tuple(rows))


def run_experiment(config: SimConfig, runs: int, *, seed: int | None = None):
    """Run ``runs`` independent simulations with consecutive seeds."""
    parts = prepare_parts(config)
    first_seed = config.seed if seed is None else seed
    return [run_simulation(config, parts, first_seed + k) for k in range(runs)]


_CSV_COLUMNS = (
    "run_seed,index,query_type,epsilon,delta,sigma,case,eps_squared_cost,"
    "cum_eps_squared_ours,cum_eps_ours,cum_eps_naive,rel_err_ours,rel_err_naive,"
    "ours_over_budget,naive_over_budget"
)


def write_simulation_csv(results: Sequence[SimRunResult], path: str | Path) -> None:
    """Write per-query rows for all runs; identical inputs give identical bytes."""
    lines = [
        f"# relative error = |noisy - true| / max(|true|, {REL_ERR_FLOOR});"
        " over-budget flags compare cumulative charge to the configured budget",
        _CSV_COLUMNS,
    ]
    for result in results:
        for r in result.rows:
            lines.append(
                f"{result.seed},{r.index},{r.query_type},{r.epsilon!r},{r.delta!r},"
                f"{r.sigma!r},{r.case},{r.eps_squared_cost!r},"
                f"{r.cum_eps_squared_ours!r},{r.cum_eps_ours!r},{r.cum_eps_naive!r},"
                f"{r.rel_err_ours!r},{r.rel_err_naive!r},"
                f"{int(r.ours_over_budget)},{int(r.naive_over_budget)}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def summarize(results: Sequence[SimRunResult]) -> dict:
    savings = [r.savings for r in results]
    return {
        "runs": len(results),
        "mean_eps_ours": float(np.mean([r.final_eps_ours for r in results])),
        "mean_eps_naive": float(np.mean([r.final_eps_naive for r in results])),
        "mean_savings": float(np.mean(savings)),
        "min_savings": float(np.min(savings)),
        "max_savings": float(np.max(savings)),
        "mean_total_rel_err_ours": float(
            np.mean([r.total_rel_err_ours for r in results])
        ),
        "mean_total_rel_err_naive": float(
            np.mean([r.total_rel_err_naive for r in results])
        ),
    }


def utility_sweep_rows(
    specs, delta: float, eps_low: float, eps_high: float, steps: int
) -> tuple[list[str], list[list[float]]]:
    """Noise scale and two-sigma accuracy half-width per type across epsilon.

    Returns a header and rows ``[epsilon, sigma per type..., alpha per type...]``
    with ``alpha = 2 * sigma``.
    """
    from .dp_core import PrivacyParams, gaussian_sigma

    if steps < 2 or not (0.0 < eps_low < eps_high):
        raise InvalidParameterError("need eps_low < eps_high and steps >= 2")
    header = (
        ["epsilon"]
        + [f"sigma_{s.name}" for s in specs]
        + [f"alpha_{s.name}" for s in specs]
    )
    rows = []
    for k in range(steps):
        epsilon = eps_low + (eps_high - eps_low) * k / (steps - 1)
        sigmas = [
            gaussian_sigma(s.sensitivity, PrivacyParams(epsilon=epsilon, delta=delta))
            for s in specs
        ]
        rows.append([epsilon] + sigmas + [2.0 * s for s in sigmas])
    return header, rows


def write_utility_csv(header: list[str], rows: list[list[float]], path: str | Path) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
