"""Dataset hosting: CSV ingestion, true query evaluation, sensitivities.

The hosted table is immutable after ingestion.  Supported queries are scalar:
the mean of a numeric column, or the fraction of rows matching a predicate
from a fixed grammar (``column op constant``).  Neighboring datasets are
taken to differ by modifying one entry in place (same row count), so the
sensitivity of a column average over a committed domain [lo, hi] is
``(hi - lo) / n`` and the sensitivity of any row-predicate frequency is
``1 / n``.  Numeric domains are an a-priori commitment: values outside them
are rejected at ingestion, never clamped.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import IngestionError, InvalidParameterError, UnknownQueryTypeError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

_COMPARISON_OPS = ("==", "<=", ">=", "<", ">")
_PREDICATE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(==|<=|>=|<|>)\s*(.+?)\s*$")


@dataclass(frozen=True)
class ColumnSpec:
    """Declared column: name, numeric|categorical, committed domain if numeric."""

    name: str
    kind: str
    domain: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise InvalidParameterError(f"unknown column kind {self.kind!r}")
        if self.kind == NUMERIC:
            if self.domain is None:
                raise InvalidParameterError(
                    f"numeric column {self.name!r} needs a committed domain"
                )
            lo, hi = self.domain
            if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                raise InvalidParameterError(
                    f"column {self.name!r} domain must satisfy lo < hi, got {self.domain}"
                )
        elif self.domain is not None:
            raise InvalidParameterError(
                f"categorical column {self.name!r} cannot declare a domain"
            )


@dataclass(frozen=True)
class Predicate:
    """One ``column op constant`` filter from the fixed grammar."""

    column: str
    op: str
    value: float | str
    text: str


@dataclass(frozen=True)
class AverageOfColumn:
    column: str
    domain_min: float
    domain_max: float


@dataclass(frozen=True)
class FrequencyOfPredicate:
    predicate: Predicate


@dataclass(frozen=True)
class QueryTypeSpec:
    name: str
    kind: AverageOfColumn | FrequencyOfPredicate
    sensitivity: float


@dataclass(frozen=True)
class Dataset:
    """Immutable ingested table with a content hash of its exact bytes."""

    schema: tuple[ColumnSpec, ...]
    columns: Mapping[str, np.ndarray]
    row_count: int
    content_hash: bytes

    def column_spec(self, name: str) -> ColumnSpec:
        for spec in self.schema:
            if spec.name == name:
                return spec
        raise InvalidParameterError(f"unknown column {name!r}")


def ingest_csv(data: bytes, schema: Sequence[ColumnSpec]) -> Dataset:
    """Parse and validate CSV bytes against the declared schema.

    The header must contain exactly the declared column names.  Every numeric
    cell must parse and lie inside the column's committed domain; the first
    offending cell is reported by row and column.
    """
    schema = tuple(schema)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestionError(f"CSV is not valid UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestionError("CSV is empty") from None
    declared = [spec.name for spec in schema]
    if sorted(header) != sorted(declared):
        raise IngestionError(
            f"header {header!r} does not match declared columns {declared!r}"
        )
    positions = {name: header.index(name) for name in declared}
    by_name = {spec.name: spec for spec in schema}

    raw_columns: dict[str, list] = {name: [] for name in declared}
    row_count = 0
    for row_idx, row in enumerate(reader):
        if len(row) != len(header):
            raise IngestionError(
                f"row {row_idx}: expected {len(header)} cells, got {len(row)}"
            )
        for name in declared:
            cell = row[positions[name]]
            spec = by_name[name]
            if spec.kind == NUMERIC:
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"row {row_idx}, column {name!r}: {cell!r} is not numeric"
                    ) from None
                if not math.isfinite(value):
                    raise IngestionError(
                        f"row {row_idx}, column {name!r}: {cell!r} is not finite"
                    )
                lo, hi = spec.domain
                if not (lo <= value <= hi):
                    raise IngestionError(
                        f"row {row_idx}, column {name!r}: {value} outside "
                        f"committed domain [{lo}, {hi}]"
                    )
                raw_columns[name].append(value)
            else:
                raw_columns[name].append(cell)
        row_count += 1
    if row_count == 0:
        raise IngestionError("CSV has a header but no data rows")

    columns: dict[str, np.ndarray] = {}
    for name in declared:
        if by_name[name].kind == NUMERIC:
            columns[name] = np.asarray(raw_columns[name], dtype=np.float64)
        else:
            columns[name] = np.asarray(raw_columns[name], dtype=object)
    return Dataset(
        schema=schema,
        columns=columns,
        row_count=row_count,
        content_hash=hashlib.sha256(data).digest(),
    )


def parse_predicate(text: str, schema: Sequence[ColumnSpec]) -> Predicate:
    """Parse ``column op constant``; thresholds on numeric columns, equality on
    categorical ones, with string literals in single or double quotes."""
    match = _PREDICATE_RE.match(text)
    if match is None:
        raise InvalidParameterError(f"cannot parse predicate {text!r}")
    column, op, literal = match.groups()
    spec = next((s for s in schema if s.name == column), None)
    if spec is None:
        raise InvalidParameterError(f"predicate references unknown column {column!r}")
    if spec.kind == CATEGORICAL:
        if op != "==":
            raise InvalidParameterError(
                f"categorical column {column!r} only supports '==', got {op!r}"
            )
        if len(literal) >= 2 and literal[0] == literal[-1] and literal[0] in "'\"":
            value: float | str = literal[1:-1]
        else:
            value = literal
        return Predicate(column=column, op=op, value=value, text=text)
    try:
        number = float(literal)
    except ValueError:
        raise InvalidParameterError(
            f"numeric column {column!r} needs a numeric constant, got {literal!r}"
        ) from None
    return Predicate(column=column, op=op, value=number, text=text)


def _predicate_mask(dataset: Dataset, predicate: Predicate) -> np.ndarray:
    column = dataset.columns.get(predicate.column)
    if column is None:
        raise InvalidParameterError(f"unknown column {predicate.column!r}")
    if predicate.op == "==":
        return column == predicate.value
    if predicate.op == "<":
        return column < predicate.value
    if predicate.op == "<=":
        return column <= predicate.value
    if predicate.op == ">":
        return column > predicate.value
    if predicate.op == ">=":
        return column >= predicate.value
    raise InvalidParameterError(f"unknown operator {predicate.op!r}")


def evaluate(dataset: Dataset, spec: QueryTypeSpec) -> float:
    """True (un-noised) value of a registered query on the hosted dataset."""
    if isinstance(spec.kind, AverageOfColumn):
        column = dataset.columns.get(spec.kind.column)
        if column is None:
            raise InvalidParameterError(f"unknown column {spec.kind.column!r}")
        return float(np.mean(column))
    mask = _predicate_mask(dataset, spec.kind.predicate)
    return float(np.count_nonzero(mask)) / dataset.row_count


def sensitivity_average(domain_min: float, domain_max: float, n: int) -> float:
    """Worst-case change of a column mean when one entry moves inside [lo, hi]."""
    if not (math.isfinite(domain_min) and math.isfinite(domain_max)):
        raise InvalidParameterError("domain bounds must be finite")
    if domain_max <= domain_min:
        raise InvalidParameterError(
            f"domain_max must exceed domain_min, got [{domain_min}, {domain_max}]"
        )
    if n < 1:
        raise InvalidParameterError(f"row count must be >= 1, got {n}")
    return (domain_max - domain_min) / n


def sensitivity_frequency(n: int) -> float:
    """Worst-case change of a row-fraction when one entry is modified."""
    if n < 1:
        raise InvalidParameterError(f"row count must be >= 1, got {n}")
    return 1.0 / n


def build_query_type(
    name: str,
    *,
    dataset: Dataset,
    kind: str,
    column: str | None = None,
    predicate: str | None = None,
    domain: tuple[float, float] | None = None,
) -> QueryTypeSpec:
    """Register one query type against a dataset, deriving its sensitivity.

    Averages commit to a domain (defaulting to the schema column's committed
    domain) and get sensitivity ``(hi - lo) / n``; frequencies get ``1 / n``.
    """
    if kind == "average":
        if column is None:
            raise InvalidParameterError(f"query type {name!r}: average needs a column")
        col_spec = dataset.column_spec(column)
        if col_spec.kind != NUMERIC:
            raise InvalidParameterError(
                f"query type {name!r}: column {column!r} is not numeric"
            )
        lo, hi = domain if domain is not None else col_spec.domain
        return QueryTypeSpec(
            name=name,
            kind=AverageOfColumn(column=column, domain_min=lo, domain_max=hi),
            sensitivity=sensitivity_average(lo, hi, dataset.row_count),
        )
    if kind == "frequency":
        if predicate is None:
            raise InvalidParameterError(
                f"query type {name!r}: frequency needs a predicate"
            )
        parsed = parse_predicate(predicate, dataset.schema)
        return QueryTypeSpec(
            name=name,
            kind=FrequencyOfPredicate(predicate=parsed),
            sensitivity=sensitivity_frequency(dataset.row_count),
        )
    raise InvalidParameterError(f"query type {name!r}: unknown kind {kind!r}")


class QueryRegistry:
    """Named, pre-registered query types for one dataset (dropdown model)."""

    def __init__(self, specs: Sequence[QueryTypeSpec] = ()):
        self._specs: dict[str, QueryTypeSpec] = {}
        for spec in specs:
            self.add(spec)

    def add(self, spec: QueryTypeSpec) -> None:
        if spec.name in self._specs:
            raise InvalidParameterError(f"duplicate query type {spec.name!r}")
        self._specs[spec.name] = spec

    def get(self, name: str) -> QueryTypeSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise UnknownQueryTypeError(f"unknown query type {name!r}") from None

    def names(self) -> list[str]:
        return list(self._specs)

    def specs(self) -> list[QueryTypeSpec]:
        return list(self._specs.values())

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def __len__(self) -> int:
        return len(self._specs)
