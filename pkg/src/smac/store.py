"""Sharded, deduplicating corpus store.

Artifacts live under two-hex-character shard directories
(`<hh>/<0xaddress>.{sol,abi,bytecode}`); per-contract metadata documents
are JSON files under `meta/`. Duplicate sources (exact byte equality,
detected by content digest) are stored once: the duplicate's document
points at the canonical address via `duplicateOf` and no artifact files
are written for it.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from .metrics import IntrinsicMetrics, analyze

DIGEST_ALGORITHM = "sha256"
ARTIFACT_EXTENSIONS = ("sol", "abi", "bytecode")

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")


class StoreError(Exception):
    pass


class BadAddress(StoreError):
    """Text is not a 0x-prefixed 40-hex-digit contract address."""


class DuplicateAddress(StoreError):
    """The address is already stored."""


class NotFound(StoreError):
    """No document for the requested address."""


class StorageFailure(StoreError):
    """A write could not be completed atomically."""


def normalize_address(text: str) -> str:
    """Canonicalize to `0x` + 40 lowercase hex characters."""
    text = text.strip()
    if not _ADDRESS_RE.match(text):
        raise BadAddress(f"not a contract address: {text!r}")
    return text.lower()


@dataclass(frozen=True)
class ContractArtifacts:
    source: str
    abi: str = ""
    bytecode: str = ""


@dataclass(frozen=True)
class ExtrinsicMetrics:
    transactions: int = 0
    balance: int = 0  # wei
    etherValue: float = 0.0  # USD, pass-through from the explorer
    token: list = field(default_factory=list)  # (symbol, value) pairs
    firstSeen: int = 0  # UTC epoch seconds
    lastSeen: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["token"] = [list(t) for t in self.token]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExtrinsicMetrics":
        kwargs = {f: data[f] for f in cls.__dataclass_fields__}
        kwargs["token"] = [tuple(t) for t in kwargs["token"]]
        return cls(**kwargs)


@dataclass(frozen=True)
class ContractDocument:
    address: str
    sourceHash: str
    duplicateOf: Optional[str]
    intrinsic: IntrinsicMetrics
    extrinsic: ExtrinsicMetrics
    retrievedAt: int  # UTC epoch seconds

    def to_dict(self) -> dict:
        return {
            "address": self.address,
            "sourceHash": self.sourceHash,
            "duplicateOf": self.duplicateOf,
            "intrinsic": self.intrinsic.to_dict(),
            "extrinsic": self.extrinsic.to_dict(),
            "retrievedAt": self.retrievedAt,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContractDocument":
        return cls(
            address=data["address"],
            sourceHash=data["sourceHash"],
            duplicateOf=data.get("duplicateOf"),
            intrinsic=IntrinsicMetrics.from_dict(data["intrinsic"]),
            extrinsic=ExtrinsicMetrics.from_dict(data["extrinsic"]),
            retrievedAt=data["retrievedAt"],
        )

    def field_value(self, name: str):
        """Flat field access for querying (document + both metric vectors)."""
        if name == "address":
            return self.address
        if name in IntrinsicMetrics.__dataclass_fields__:
            return getattr(self.intrinsic, name)
        if name in ExtrinsicMetrics.__dataclass_fields__:
            return getattr(self.extrinsic, name)
        raise KeyError(name)


def shard_path(address: str, extension: str) -> str:
    """Relative artifact path: first two post-prefix hex chars shard the tree."""
    if extension not in ARTIFACT_EXTENSIONS:
        raise ValueError(f"unknown artifact extension: {extension}")
    address = normalize_address(address)
    return f"{address[2:4]}/{address}.{extension}"


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class CorpusStore:
    """One directory of artifacts plus JSON metadata documents.

    An in-memory index (address -> document, sourceHash -> canonical
    address) is rebuilt on open. Many concurrent readers are fine; puts
    are serialized by an internal lock.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.meta_dir = self.root / "meta"
        self.meta_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._docs: dict[str, ContractDocument] = {}
        self._canonical_by_hash: dict[str, str] = {}
        self._load_config()
        self._rebuild_index()

    def _load_config(self) -> None:
        config_path = self.root / "config.json"
        if config_path.exists():
            config = json.loads(config_path.read_text())
            if config.get("digest") != DIGEST_ALGORITHM:
                raise StorageFailure(
                    f"store uses digest {config.get('digest')!r}, "
                    f"expected {DIGEST_ALGORITHM!r}"
                )
        else:
            _atomic_write(config_path,
                          json.dumps({"digest": DIGEST_ALGORITHM}).encode())

    def _rebuild_index(self) -> None:
        for meta_file in sorted(self.meta_dir.glob("*.json")):
            doc = ContractDocument.from_dict(json.loads(meta_file.read_text()))
            self._docs[doc.address] = doc
            if doc.duplicateOf is None:
                self._canonical_by_hash[doc.sourceHash] = doc.address

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, address: str) -> bool:
        try:
            return normalize_address(address) in self._docs
        except BadAddress:
            return False

    def put(self, address: str, artifacts: ContractArtifacts,
            extrinsic: ExtrinsicMetrics, retrieved_at: int) -> ContractDocument:
        """Store one contract, deduplicating by exact source bytes.

        A put whose source hash matches an existing canonical entry
        stores only a document (duplicateOf set, intrinsic vector copied
        from the canonical); artifact files are written once per distinct
        source. Document and files commit together or not at all.
        """
        address = normalize_address(address)
        if not artifacts.source:
            raise StorageFailure("canonical contracts must have non-empty source")
        with self._lock:
            if address in self._docs:
                raise DuplicateAddress(address)
            source_bytes = artifacts.source.encode("utf-8")
            digest = hashlib.new(DIGEST_ALGORITHM, source_bytes).hexdigest()
            canonical = self._canonical_by_hash.get(digest)
            if canonical is not None:
                doc = ContractDocument(
                    address=address,
                    sourceHash=digest,
                    duplicateOf=canonical,
                    intrinsic=self._docs[canonical].intrinsic,
                    extrinsic=extrinsic,
                    retrievedAt=int(retrieved_at),
                )
                self._write_doc(doc)
                self._docs[address] = doc
                return doc
            doc = ContractDocument(
                address=address,
                sourceHash=digest,
                duplicateOf=None,
                intrinsic=analyze(artifacts.source),
                extrinsic=extrinsic,
                retrievedAt=int(retrieved_at),
            )
            written: list[Path] = []
            try:
                for ext, data in (("sol", source_bytes),
                                  ("abi", artifacts.abi.encode("utf-8")),
                                  ("bytecode", artifacts.bytecode.encode("utf-8"))):
                    path = self.root / shard_path(address, ext)
                    _atomic_write(path, data)
                    written.append(path)
                self._write_doc(doc)
            except OSError as exc:
                for path in written:
                    path.unlink(missing_ok=True)
                raise StorageFailure(str(exc)) from exc
            self._docs[address] = doc
            self._canonical_by_hash[digest] = address
            return doc

    def _write_doc(self, doc: ContractDocument) -> None:
        try:
            _atomic_write(self.meta_dir / f"{doc.address}.json",
                          json.dumps(doc.to_dict(), indent=2).encode("utf-8"))
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc

    def get_document(self, address: str) -> ContractDocument:
        address = normalize_address(address)
        doc = self._docs.get(address)
        if doc is None:
            raise NotFound(address)
        return doc

    def get(self, address: str) -> tuple[ContractDocument, ContractArtifacts]:
        """Fetch a document and its artifacts, resolving duplicates."""
        doc = self.get_document(address)
        canonical = doc.duplicateOf or doc.address
        try:
            artifacts = ContractArtifacts(
                source=(self.root / shard_path(canonical, "sol")).read_text("utf-8"),
                abi=(self.root / shard_path(canonical, "abi")).read_text("utf-8"),
                bytecode=(self.root / shard_path(canonical, "bytecode")).read_text("utf-8"),
            )
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc
        return doc, artifacts

    def scan(self, predicate: Callable[[ContractDocument], bool] = lambda d: True
             ) -> list[ContractDocument]:
        """All documents satisfying the predicate, address ascending."""
        with self._lock:
            docs = list(self._docs.values())
        return sorted((d for d in docs if predicate(d)), key=lambda d: d.address)

    def daily_counts(self) -> list[tuple[str, int]]:
        """Per-UTC-date ingest counts, dates ascending, zero days omitted."""
        counts: dict[str, int] = {}
        for doc in self._docs.values():
            day = datetime.fromtimestamp(doc.retrievedAt, tz=timezone.utc).date().isoformat()
            counts[day] = counts.get(day, 0) + 1
        return sorted(counts.items())

    def addresses(self) -> Iterable[str]:
        return sorted(self._docs)
