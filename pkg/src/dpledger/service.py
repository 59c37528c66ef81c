"""Query service wiring the three roles into one process.

A client-side helper converts the requested (epsilon, delta) into a noise
scale; the ledger classifies the request against recorded history, charges
the budget and seals a record; the dataset evaluator is contacted only for
the cases that genuinely need a true value (fresh answers and partial
reuses).  The classify -> charge -> generate -> append sequence runs under a
single per-dataset lock, and the budget is never persisted separately: on
startup it is replayed from the ledger.

The evaluator is pluggable: in-process (default), behind a remote HTTP
endpoint to demonstrate that exact/full reuses need no dataset round-trip,
or disabled entirely (then only exact/full reuses can be answered).
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np
import yaml

from . import accountant, dp_core, reuse
from .dataset import (
    ColumnSpec,
    Dataset,
    QueryRegistry,
    build_query_type,
    evaluate,
    ingest_csv,
)
from .errors import (
    EvaluatorUnavailableError,
    InvalidParameterError,
    LedgerIntegrityError,
)
from .ledger import Ledger
from .reuse import CaseKind, CaseTag

# Relative agreement required between a client-supplied scale and the one
# recomputed from (epsilon, delta).
SIGMA_AGREEMENT_RTOL = 1e-9

ENV_LEDGER_PATH = "DPLEDGER_LEDGER_PATH"
ENV_LISTEN_ADDR = "DPLEDGER_LISTEN_ADDR"


@dataclass(frozen=True)
class QueryResponse:
    noisy_value: float
    sigma: float
    case_tag: CaseTag
    eps_squared_cost: float
    eps_squared_remaining: float
    record_index: int
    server_accessed: bool


class Evaluator(Protocol):
    """Computes noisy answers that require access to the true value."""

    def fresh(self, query_type: str, sigma: float, rng: np.random.Generator) -> float:
        ...

    def partial(
        self,
        query_type: str,
        sigma_m: float,
        prev_noisy: float,
        sigma_min: float,
        rng: np.random.Generator,
    ) -> float:
        ...


class InlineEvaluator:
    """Evaluates true values against the locally hosted dataset."""

    def __init__(self, dataset: Dataset, registry: QueryRegistry):
        self._dataset = dataset
        self._registry = registry

    def true_value(self, query_type: str) -> float:
        return evaluate(self._dataset, self._registry.get(query_type))

    def fresh(self, query_type: str, sigma: float, rng: np.random.Generator) -> float:
        return reuse.answer_fresh(self.true_value(query_type), sigma, rng)

    def partial(
        self,
        query_type: str,
        sigma_m: float,
        prev_noisy: float,
        sigma_min: float,
        rng: np.random.Generator,
    ) -> float:
        return reuse.answer_partial(
            self.true_value(query_type), prev_noisy, sigma_m, sigma_min, rng
        )


class RemoteEvaluator:
    """Forwards dataset-access cases to another service's /evaluate endpoint."""

    def __init__(self, url: str, client=None):
        import httpx

        self._url = url.rstrip("/")
        self._client = client or httpx.Client(timeout=10.0)

    def _post(self, payload: dict) -> float:
        import httpx

        try:
            response = self._client.post(f"{self._url}/evaluate", json=payload)
        except httpx.HTTPError as exc:
            raise EvaluatorUnavailableError(
                f"remote evaluator unreachable: {exc}"
            ) from exc
        if response.status_code != 200:
            raise EvaluatorUnavailableError(
                f"remote evaluator returned {response.status_code}: {response.text}"
            )
        return float(response.json()["noisy_value"])

    def fresh(self, query_type: str, sigma: float, rng: np.random.Generator) -> float:
        return self._post({"query_type": query_type, "sigma": sigma})

    def partial(
        self,
        query_type: str,
        sigma_m: float,
        prev_noisy: float,
        sigma_min: float,
        rng: np.random.Generator,
    ) -> float:
        return self._post(
            {
                "query_type": query_type,
                "sigma": sigma_m,
                "prev_noisy": prev_noisy,
                "sigma_min": sigma_min,
            }
        )


class DisabledEvaluator:
    """Refuses every dataset access; exact/full reuses still work without it."""

    def fresh(self, query_type: str, sigma: float, rng: np.random.Generator) -> float:
        raise EvaluatorUnavailableError("dataset evaluator is disabled")

    def partial(
        self,
        query_type: str,
        sigma_m: float,
        prev_noisy: float,
        sigma_min: float,
        rng: np.random.Generator,
    ) -> float:
        raise EvaluatorUnavailableError("dataset evaluator is disabled")


class QueryService:
    """One dataset, one budget, one ledger; single writer, many readers."""

    def __init__(
        self,
        *,
        dataset: Dataset,
        registry: QueryRegistry,
        ledger: Ledger,
        epsilon_budget: float,
        delta_budget: float,
        evaluator: Evaluator | None = None,
        rng: np.random.Generator | None = None,
        reuse_enabled: bool = True,
    ):
        self.dataset = dataset
        self.registry = registry
        self.ledger = ledger
        self.delta_budget = delta_budget
        self.evaluator = evaluator or InlineEvaluator(dataset, registry)
        self._rng = rng if rng is not None else np.random.default_rng()
        self._reuse_enabled = reuse_enabled
        self._lock = threading.Lock()

        if ledger.path is not None and len(ledger) > 0:
            verdict = ledger.verify_chain()
            if not verdict.ok:
                raise LedgerIntegrityError(
                    f"ledger failed verification at record {verdict.first_bad_index}"
                )
        own_records = [
            r for r in ledger if r.dataset_hash == dataset.content_hash
        ]
        self._budget = accountant.replay_budget(
            own_records, epsilon_budget, delta_budget
        )

    def handle_query(
        self,
        query_type: str,
        epsilon: float,
        delta: float,
        sigma: float | None = None,
        *,
        rng: np.random.Generator | None = None,
    ) -> QueryResponse:
        """Answer one query end to end, or fail without changing any state."""
        spec = self.registry.get(query_type)
        params = dp_core.PrivacyParams(epsilon=epsilon, delta=delta)
        sigma_client = dp_core.gaussian_sigma(spec.sensitivity, params)
        if sigma is not None:
            if not (math.isfinite(sigma) and sigma > 0.0):
                raise InvalidParameterError(f"sigma must be positive, got {sigma}")
            if abs(sigma - sigma_client) > SIGMA_AGREEMENT_RTOL * sigma_client:
                raise InvalidParameterError(
                    f"supplied sigma {sigma} disagrees with the value implied by "
                    f"(epsilon, delta): {sigma_client}"
                )
            sigma_m = sigma
        else:
            sigma_m = sigma_client
        generator = rng if rng is not None else self._rng

        with self._lock:
            history = self.ledger.history_for(self.dataset.content_hash, query_type)
            if self._reuse_enabled:
                tag = reuse.classify(sigma_m, history)
            else:
                tag = CaseTag(CaseKind.FRESH)

            if tag.kind is CaseKind.FRESH:
                cost = dp_core.epsilon_squared_cost_fresh(
                    spec.sensitivity, sigma_m, self.delta_budget
                )
            elif tag.kind is CaseKind.PARTIAL_REUSE:
                ref = self._entry(history, tag.reuse_ref)
                cost = dp_core.epsilon_squared_cost_partial(
                    spec.sensitivity, sigma_m, ref.sigma, self.delta_budget
                )
            else:
                cost = 0.0

            # Check-then-commit: rejection must leave the balance untouched,
            # so the new state is only adopted after the record is sealed.
            charged = accountant.charge(self._budget, cost)

            if tag.kind is CaseKind.FRESH:
                value = self.evaluator.fresh(query_type, sigma_m, generator)
                accessed = True
            elif tag.kind is CaseKind.PARTIAL_REUSE:
                ref = self._entry(history, tag.reuse_ref)
                value = self.evaluator.partial(
                    query_type, sigma_m, ref.noisy_value, ref.sigma, generator
                )
                accessed = True
            elif tag.kind is CaseKind.EXACT_REUSE:
                ref = self._entry(history, tag.reuse_ref)
                value = reuse.answer_exact(ref.noisy_value)
                accessed = False
            else:
                ref = self._entry(history, tag.reuse_ref)
                value = reuse.answer_full(ref.noisy_value, ref.sigma, sigma_m, generator)
                accessed = False

            record = self.ledger.append(
                dataset_hash=self.dataset.content_hash,
                query_type=query_type,
                epsilon=epsilon,
                delta=delta,
                sigma=sigma_m,
                noisy_response=value,
                eps_squared_cost=cost,
                case_tag=tag.kind,
                reuse_ref=tag.reuse_ref,
            )
            self._budget = charged

        return QueryResponse(
            noisy_value=value,
            sigma=sigma_m,
            case_tag=tag,
            eps_squared_cost=cost,
            eps_squared_remaining=charged.eps_squared_remaining,
            record_index=record.index,
            server_accessed=accessed,
        )

    @staticmethod
    def _entry(history, index):
        return next(e for e in history if e.index == index)

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def get_budget(self) -> accountant.BudgetState:
        return self._budget

    def sensitivities(self) -> Mapping[str, float]:
        return {spec.name: spec.sensitivity for spec in self.registry.specs()}

    def spend_report(self) -> accountant.SpendReport:
        own = [r for r in self.ledger if r.dataset_hash == self.dataset.content_hash]
        return accountant.spend_report(own, self.sensitivities(), self.delta_budget)


@dataclass(frozen=True)
class QueryTypeConfig:
    name: str
    kind: str
    column: str | None = None
    predicate: str | None = None
    domain: tuple[float, float] | None = None


@dataclass(frozen=True)
class ServiceConfig:
    dataset_csv: Path
    schema: tuple[ColumnSpec, ...]
    query_types: tuple[QueryTypeConfig, ...]
    epsilon_budget: float
    delta_budget: float
    ledger_path: Path | None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    evaluator_mode: str = "inline"  # inline | remote | disabled
    evaluator_url: str | None = None


def _parse_domain(raw) -> tuple[float, float]:
    lo, hi = raw
    return (float(lo), float(hi))


def load_config(path: str | Path) -> ServiceConfig:
    """Read the YAML service configuration, applying environment overrides."""
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
        dataset_doc = doc["dataset"]
        schema = tuple(
            ColumnSpec(
                name=str(col["name"]),
                kind=str(col["type"]),
                domain=_parse_domain(col["domain"]) if "domain" in col else None,
            )
            for col in dataset_doc["schema"]
        )
        query_types = tuple(
            QueryTypeConfig(
                name=str(qt["name"]),
                kind=str(qt["kind"]),
                column=qt.get("column"),
                predicate=qt.get("predicate"),
                domain=_parse_domain(qt["domain"]) if "domain" in qt else None,
            )
            for qt in doc["query_types"]
        )
        budget = doc["budget"]
        epsilon_budget = float(budget["epsilon"])
        delta_budget = float(budget["delta"])
        csv_path = Path(dataset_doc["csv_path"])
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"config {path} is incomplete: {exc}") from exc

    if not csv_path.is_absolute():
        csv_path = path.parent / csv_path

    ledger_raw = os.environ.get(ENV_LEDGER_PATH) or doc.get("ledger_path")
    ledger_path = None
    if ledger_raw:
        ledger_path = Path(ledger_raw)
        if not ledger_path.is_absolute():
            ledger_path = path.parent / ledger_path

    listen = doc.get("listen", {}) or {}
    host = str(listen.get("host", "127.0.0.1"))
    port = int(listen.get("port", 8080))
    addr_override = os.environ.get(ENV_LISTEN_ADDR)
    if addr_override:
        host, _, port_text = addr_override.rpartition(":")
        if not host or not port_text.isdigit():
            raise InvalidParameterError(
                f"{ENV_LISTEN_ADDR} must look like host:port, got {addr_override!r}"
            )
        port = int(port_text)

    evaluator_doc = doc.get("evaluator", "inline")
    if isinstance(evaluator_doc, str):
        evaluator_mode, evaluator_url = evaluator_doc, None
    else:
        evaluator_mode = str(evaluator_doc.get("mode", "inline"))
        evaluator_url = evaluator_doc.get("url")
    if evaluator_mode not in ("inline", "remote", "disabled"):
        raise InvalidParameterError(f"unknown evaluator mode {evaluator_mode!r}")
    if evaluator_mode == "remote" and not evaluator_url:
        raise InvalidParameterError("remote evaluator mode needs a url")

    return ServiceConfig(
        dataset_csv=csv_path,
        schema=schema,
        query_types=query_types,
        epsilon_budget=epsilon_budget,
        delta_budget=delta_budget,
        ledger_path=ledger_path,
        listen_host=host,
        listen_port=port,
        evaluator_mode=evaluator_mode,
        evaluator_url=evaluator_url,
    )


def load_dataset(config: ServiceConfig) -> Dataset:
    try:
        data = config.dataset_csv.read_bytes()
    except OSError as exc:
        raise InvalidParameterError(
            f"cannot read dataset CSV {config.dataset_csv}: {exc}"
        ) from exc
    return ingest_csv(data, config.schema)


def build_registry(config: ServiceConfig, dataset: Dataset) -> QueryRegistry:
    registry = QueryRegistry()
    for qt in config.query_types:
        registry.add(
            build_query_type(
                qt.name,
                dataset=dataset,
                kind=qt.kind,
                column=qt.column,
                predicate=qt.predicate,
                domain=qt.domain,
            )
        )
    return registry


def build_service(
    config: ServiceConfig, *, rng: np.random.Generator | None = None
) -> QueryService:
    dataset = load_dataset(config)
    registry = build_registry(config, dataset)
    ledger = Ledger(config.ledger_path)
    if config.evaluator_mode == "inline":
        evaluator: Evaluator = InlineEvaluator(dataset, registry)
    elif config.evaluator_mode == "remote":
        evaluator = RemoteEvaluator(config.evaluator_url)
    else:
        evaluator = DisabledEvaluator()
    return QueryService(
        dataset=dataset,
        registry=registry,
        ledger=ledger,
        epsilon_budget=config.epsilon_budget,
        delta_budget=config.delta_budget,
        evaluator=evaluator,
        rng=rng,
    )
