"""Append-only, hash-chained record of every released noisy answer.

Each record seals the full release tuple (query type, privacy parameters,
noise scale, noisy response, charged cost, case tag) plus a link to its
predecessor.  Hashes are SHA-256 over a canonical binary serialization --
fields in declaration order, floats as 8-byte big-endian IEEE-754 bit
patterns, integers as 8-byte big-endian two's complement, strings as
4-byte-length-prefixed UTF-8 -- so verification is bit-exact across
implementations.  Storage is one self-describing JSON object per line.
"""

from __future__ import annotations

import json
import os
import struct
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import StorageError
from .reuse import CaseKind, HistoryEntry

GENESIS_HASH = bytes(32)

_FILE_KEYS = (
    "index",
    "dataset_hash",
    "query_type",
    "epsilon",
    "delta",
    "sigma",
    "noisy_response",
    "eps_squared_cost",
    "case_tag",
    "reuse_ref",
    "timestamp",
    "prev_hash",
    "record_hash",
)


@dataclass(frozen=True)
class NoiseRecord:
    index: int
    dataset_hash: bytes
    query_type: str
    epsilon: float
    delta: float
    sigma: float
    noisy_response: float
    eps_squared_cost: float
    case_tag: CaseKind
    reuse_ref: int | None
    timestamp: int  # UTC milliseconds
    prev_hash: bytes
    record_hash: bytes

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "dataset_hash": self.dataset_hash.hex(),
            "query_type": self.query_type,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "sigma": self.sigma,
            "noisy_response": self.noisy_response,
            "eps_squared_cost": self.eps_squared_cost,
            "case_tag": self.case_tag.value,
            "reuse_ref": self.reuse_ref,
            "timestamp": self.timestamp,
            "prev_hash": self.prev_hash.hex(),
            "record_hash": self.record_hash.hex(),
        }


@dataclass(frozen=True)
class ChainVerdict:
    ok: bool
    first_bad_index: int | None = None


def _complete_lines(raw: str) -> list[str]:
    # A trailing fragment without a newline is an interrupted append: the
    # record never became visible, so loading and verification both drop it.
    lines = raw.split("\n")
    lines.pop()  # empty when the file ends with a newline, fragment otherwise
    return lines


def _lp_utf8(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack(">I", len(raw)) + raw


def canonical_bytes(
    index: int,
    dataset_hash: bytes,
    query_type: str,
    epsilon: float,
    delta: float,
    sigma: float,
    noisy_response: float,
    eps_squared_cost: float,
    case_tag: str,
    reuse_ref: int | None,
    timestamp: int,
    prev_hash: bytes,
) -> bytes:
    """Serialize all hashed fields, in declaration order, to their bit-exact form."""
    out = bytearray()
    out += struct.pack(">q", index)
    out += dataset_hash
    out += _lp_utf8(query_type)
    for value in (epsilon, delta, sigma, noisy_response, eps_squared_cost):
        out += struct.pack(">d", value)
    out += _lp_utf8(case_tag)
    if reuse_ref is None:
        out += b"\x00"
    else:
        out += b"\x01" + struct.pack(">q", reuse_ref)
    out += struct.pack(">q", timestamp)
    out += prev_hash
    return bytes(out)


def _compute_hash(data: bytes) -> bytes:
    import hashlib

    return hashlib.sha256(data).digest()


def _record_from_json(obj: dict) -> NoiseRecord:
    return NoiseRecord(
        index=int(obj["index"]),
        dataset_hash=bytes.fromhex(obj["dataset_hash"]),
        query_type=str(obj["query_type"]),
        epsilon=float(obj["epsilon"]),
        delta=float(obj["delta"]),
        sigma=float(obj["sigma"]),
        noisy_response=float(obj["noisy_response"]),
        eps_squared_cost=float(obj["eps_squared_cost"]),
        case_tag=CaseKind(obj["case_tag"]),
        reuse_ref=None if obj["reuse_ref"] is None else int(obj["reuse_ref"]),
        timestamp=int(obj["timestamp"]),
        prev_hash=bytes.fromhex(obj["prev_hash"]),
        record_hash=bytes.fromhex(obj["record_hash"]),
    )


def _check_record(record: NoiseRecord, position: int, prev_hash: bytes) -> bool:
    """True when the record sits at `position` and its hashes are consistent."""
    if record.index != position:
        return False
    if record.prev_hash != prev_hash:
        return False
    expected = _compute_hash(
        canonical_bytes(
            record.index,
            record.dataset_hash,
            record.query_type,
            record.epsilon,
            record.delta,
            record.sigma,
            record.noisy_response,
            record.eps_squared_cost,
            record.case_tag.value,
            record.reuse_ref,
            record.timestamp,
            record.prev_hash,
        )
    )
    return expected == record.record_hash


def verify_records(records: list[NoiseRecord]) -> ChainVerdict:
    prev = GENESIS_HASH
    for position, record in enumerate(records):
        if not _check_record(record, position, prev):
            return ChainVerdict(ok=False, first_bad_index=position)
        prev = record.record_hash
    return ChainVerdict(ok=True)


class Ledger:
    """Single-writer record chain, optionally persisted one JSON line per record.

    With a path, every append is flushed and fsynced before it returns and the
    whole file is loaded at construction.  Without a path the chain lives in
    memory only (used by simulations and tests).
    """

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None
        self._records: list[NoiseRecord] = []
        self._fh = None
        if self._path is not None:
            self._load()
            try:
                self._fh = open(self._path, "a", encoding="utf-8")
            except OSError as exc:
                raise StorageError(f"cannot open ledger file {self._path}: {exc}") from exc

    def _load(self) -> None:
        if not self._path.exists():
            return
        try:
            raw = self._path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot read ledger file {self._path}: {exc}") from exc
        for lineno, line in enumerate(_complete_lines(raw)):
            if not line:
                continue
            try:
                self._records.append(_record_from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise StorageError(
                    f"malformed ledger line {lineno} in {self._path}: {exc}"
                ) from exc

    @property
    def path(self) -> Path | None:
        return self._path

    @property
    def records(self) -> list[NoiseRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def last_hash(self) -> bytes:
        return self._records[-1].record_hash if self._records else GENESIS_HASH

    def append(
        self,
        *,
        dataset_hash: bytes,
        query_type: str,
        epsilon: float,
        delta: float,
        sigma: float,
        noisy_response: float,
        eps_squared_cost: float,
        case_tag: CaseKind,
        reuse_ref: int | None = None,
        timestamp: int | None = None,
    ) -> NoiseRecord:
        """Seal and persist the next record; nothing is visible on failure."""
        index = len(self._records)
        prev_hash = self.last_hash()
        ts = int(time.time() * 1000) if timestamp is None else timestamp
        payload = canonical_bytes(
            index,
            dataset_hash,
            query_type,
            epsilon,
            delta,
            sigma,
            noisy_response,
            eps_squared_cost,
            case_tag.value,
            reuse_ref,
            ts,
            prev_hash,
        )
        record = NoiseRecord(
            index=index,
            dataset_hash=dataset_hash,
            query_type=query_type,
            epsilon=epsilon,
            delta=delta,
            sigma=sigma,
            noisy_response=noisy_response,
            eps_squared_cost=eps_squared_cost,
            case_tag=case_tag,
            reuse_ref=reuse_ref,
            timestamp=ts,
            prev_hash=prev_hash,
            record_hash=_compute_hash(payload),
        )
        if self._fh is not None:
            try:
                self._fh.write(json.dumps(record.to_json_dict()) + "\n")
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageError(f"ledger append failed: {exc}") from exc
        self._records.append(record)
        return record

    def page(self, offset: int, limit: int) -> list[NoiseRecord]:
        """Stable slice of the committed prefix; out-of-range offsets are empty."""
        if offset < 0 or limit < 0:
            return []
        return self._records[offset : offset + limit]

    def history_for(self, dataset_hash: bytes, query_type: str) -> list[HistoryEntry]:
        """All releases of one (dataset, type) pair, in append order."""
        return [
            HistoryEntry(sigma=r.sigma, noisy_value=r.noisy_response, index=r.index)
            for r in self._records
            if r.dataset_hash == dataset_hash and r.query_type == query_type
        ]

    def verify_chain(self) -> ChainVerdict:
        """Recompute every hash and link; file-backed ledgers re-read the disk.

        Reading back from disk means tampering after load is still caught.
        """
        if self._path is None:
            return verify_records(self._records)
        return verify_file(self._path)


def verify_file(path: str | Path) -> ChainVerdict:
    path = Path(path)
    if not path.exists():
        return ChainVerdict(ok=True)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read ledger file {path}: {exc}") from exc
    prev = GENESIS_HASH
    position = 0
    for line in _complete_lines(raw):
        if not line:
            continue
        try:
            record = _record_from_json(json.loads(line))
        except (ValueError, KeyError, TypeError):
            return ChainVerdict(ok=False, first_bad_index=position)
        if not _check_record(record, position, prev):
            return ChainVerdict(ok=False, first_bad_index=position)
        prev = record.record_hash
        position += 1
    return ChainVerdict(ok=True)
