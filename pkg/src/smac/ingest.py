"""Block-walking ingestion: explorer clients, HTML extraction, throttling.

The explorer is behind a small interface so the pipeline can run against
a committed fixture directory (blocks/<n>.json, pages/<address>.html,
extrinsic/<address>.json) or a live HTTP service exposing the same three
path shapes.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Optional

import requests

from .store import (ContractArtifacts, CorpusStore, DuplicateAddress,
                    ExtrinsicMetrics, StorageFailure, normalize_address)

SECONDS_PER_DAY = 86400


class ExtractionFailure(Exception):
    """A configured container element is missing or empty (page drift)."""


class ExplorerError(Exception):
    """The explorer client failed for one request."""


@dataclass(frozen=True)
class BlockTransaction:
    from_address: str
    to_address: str  # the created contract address when is_contract_creation
    is_contract_creation: bool


class ExplorerClient:
    """Read-only view of a block explorer."""

    def list_block_transactions(self, block: int) -> list[BlockTransaction]:
        raise NotImplementedError

    def fetch_contract_page(self, address: str) -> Optional[str]:
        """Verified-source HTML page, or None when the contract is unverified."""
        raise NotImplementedError

    def fetch_extrinsic(self, address: str) -> ExtrinsicMetrics:
        raise NotImplementedError


def _parse_transactions(raw) -> list[BlockTransaction]:
    return [
        BlockTransaction(
            from_address=tx.get("from", ""),
            to_address=tx.get("to", ""),
            is_contract_creation=bool(tx.get("isContractCreation", False)),
        )
        for tx in raw
    ]


class FixtureExplorer(ExplorerClient):
    """Serves committed fixture files from a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def list_block_transactions(self, block: int) -> list[BlockTransaction]:
        path = self.root / "blocks" / f"{block}.json"
        if not path.exists():
            return []
        return _parse_transactions(json.loads(path.read_text()))

    def fetch_contract_page(self, address: str) -> Optional[str]:
        path = self.root / "pages" / f"{normalize_address(address)}.html"
        if not path.exists():
            return None
        return path.read_text("utf-8")

    def fetch_extrinsic(self, address: str) -> ExtrinsicMetrics:
        path = self.root / "extrinsic" / f"{normalize_address(address)}.json"
        try:
            return ExtrinsicMetrics.from_dict(json.loads(path.read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise ExplorerError(f"extrinsic fetch failed: {exc}") from exc


class HttpExplorer(ExplorerClient):
    """Live client speaking HTTP GET with the fixture path shapes."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _get(self, path: str) -> Optional[requests.Response]:
        try:
            resp = self._session.get(f"{self.base_url}/{path}", timeout=self.timeout)
        except requests.RequestException as exc:
            raise ExplorerError(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code != 200:
            raise ExplorerError(f"GET {path}: HTTP {resp.status_code}")
        return resp

    def list_block_transactions(self, block: int) -> list[BlockTransaction]:
        resp = self._get(f"blocks/{block}.json")
        if resp is None:
            return []
        return _parse_transactions(resp.json())

    def fetch_contract_page(self, address: str) -> Optional[str]:
        resp = self._get(f"pages/{normalize_address(address)}.html")
        return None if resp is None else resp.text

    def fetch_extrinsic(self, address: str) -> ExtrinsicMetrics:
        resp = self._get(f"extrinsic/{normalize_address(address)}.json")
        if resp is None:
            raise ExplorerError(f"no extrinsic data for {address}")
        return ExtrinsicMetrics.from_dict(resp.json())


@dataclass(frozen=True)
class ExtractionRule:
    """Element ids of the page containers holding each artifact."""
    source_id: str = "contract-source"
    abi_id: str = "contract-abi"
    bytecode_id: str = "contract-bytecode"


_VOID_TAGS = {"area", "base", "br", "col", "embed", "hr", "img", "input",
              "link", "meta", "source", "track", "wbr"}


class _ContainerTextParser(HTMLParser):
    """Collects the tag-stripped, entity-decoded text of id-tagged elements."""

    def __init__(self, wanted_ids: set[str]):
        super().__init__(convert_charrefs=True)
        self.wanted_ids = wanted_ids
        self.texts: dict[str, list[str]] = {}
        self._active: list[tuple[str, int]] = []  # (element id, depth at open)
        self._depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _VOID_TAGS:
            return
        self._depth += 1
        element_id = dict(attrs).get("id")
        if element_id in self.wanted_ids:
            self.texts.setdefault(element_id, [])
            self._active.append((element_id, self._depth))

    def handle_endtag(self, tag):
        if tag in _VOID_TAGS:
            return
        if self._active and self._active[-1][1] == self._depth:
            self._active.pop()
        self._depth = max(0, self._depth - 1)

    def handle_data(self, data):
        for element_id, _ in self._active:
            self.texts[element_id].append(data)


def extract_source(html: str, rule: ExtractionRule = ExtractionRule()
                   ) -> tuple[str, str, str]:
    """Recover (source, abi, bytecode) text from a verified-contract page."""
    parser = _ContainerTextParser({rule.source_id, rule.abi_id, rule.bytecode_id})
    parser.feed(html)
    parser.close()
    parts = []
    for element_id in (rule.source_id, rule.abi_id, rule.bytecode_id):
        if element_id not in parser.texts:
            raise ExtractionFailure(f"container #{element_id} not found")
        parts.append("".join(parser.texts[element_id]))
    source, abi, bytecode = parts
    if not source:
        raise ExtractionFailure(f"container #{rule.source_id} is empty")
    return source, abi, bytecode


@dataclass
class RateLimit:
    max_requests_per_second: float
    max_requests_per_day: Optional[int] = None


class Throttle:
    """Sliding-window admission control shared by all client calls of a run.

    In any 1-second window at most ceil(max_requests_per_second) requests
    are admitted; with a daily cap, request N+1 of a UTC day is delayed to
    the next day. Requests are delayed, never dropped. Clock and sleep are
    injectable for deterministic tests; admission times are kept in `log`
    for replay checking.
    """

    def __init__(self, limit: RateLimit,
                 clock: Callable[[], float] = time.time,
                 sleep: Callable[[float], None] = time.sleep):
        if limit.max_requests_per_second <= 0:
            raise ValueError("max_requests_per_second must be positive")
        if limit.max_requests_per_day is not None and limit.max_requests_per_day < 1:
            raise ValueError("max_requests_per_day must be positive")
        self.limit = limit
        self.burst = math.ceil(limit.max_requests_per_second)
        self._clock = clock
        self._sleep = sleep
        self._recent: deque[float] = deque()
        self._day: Optional[int] = None
        self._day_count = 0
        self.log: list[float] = []

    def acquire(self) -> float:
        """Block until one request may proceed; returns the admission time."""
        while True:
            now = self._clock()
            if self.limit.max_requests_per_day is not None:
                day = int(now // SECONDS_PER_DAY)
                if day != self._day:
                    self._day = day
                    self._day_count = 0
                if self._day_count >= self.limit.max_requests_per_day:
                    self._sleep((day + 1) * SECONDS_PER_DAY - now)
                    continue
            while self._recent and self._recent[0] <= now - 1.0:
                self._recent.popleft()
            if len(self._recent) >= self.burst:
                self._sleep(self._recent[0] + 1.0 - now)
                continue
            self._recent.append(now)
            self._day_count += 1
            self.log.append(now)
            return now


@dataclass
class IngestReport:
    blocksScanned: int = 0
    addressesSeen: int = 0
    verifiedFetched: int = 0
    duplicates: int = 0
    failures: list = field(default_factory=list)  # (address, reason) pairs

    def to_dict(self) -> dict:
        return {
            "blocksScanned": self.blocksScanned,
            "addressesSeen": self.addressesSeen,
            "verifiedFetched": self.verifiedFetched,
            "duplicates": self.duplicates,
            "failures": [list(f) for f in self.failures],
        }


def scan_blocks(client: ExplorerClient, from_block: int, to_block: int,
                throttle: Throttle, store: CorpusStore,
                rule: ExtractionRule = ExtractionRule(),
                clock: Callable[[], float] = time.time) -> IngestReport:
    """Walk blocks, fetch verified contract pages, and feed the store.

    Already-stored addresses are never re-fetched, so re-running a range
    is a no-op. Per-address failures are recorded and the scan continues;
    only StorageFailure aborts.
    """
    if from_block > to_block:
        raise ValueError("from_block must not exceed to_block")
    report = IngestReport()
    seen_this_run: set[str] = set()
    for block in range(from_block, to_block + 1):
        report.blocksScanned += 1
        try:
            throttle.acquire()
            transactions = client.list_block_transactions(block)
        except ExplorerError as exc:
            report.failures.append((f"block:{block}", str(exc)))
            continue
        for tx in transactions:
            if not tx.is_contract_creation:
                continue
            try:
                address = normalize_address(tx.to_address)
            except Exception as exc:
                report.failures.append((tx.to_address, str(exc)))
                continue
            if address in seen_this_run:
                continue
            seen_this_run.add(address)
            report.addressesSeen += 1
            if address in store:
                continue
            try:
                throttle.acquire()
                page = client.fetch_contract_page(address)
                if page is None:
                    continue
                source, abi, bytecode = extract_source(page, rule)
                throttle.acquire()
                extrinsic = client.fetch_extrinsic(address)
            except (ExplorerError, ExtractionFailure) as exc:
                report.failures.append((address, str(exc)))
                continue
            try:
                doc = store.put(address,
                                ContractArtifacts(source, abi, bytecode),
                                extrinsic, int(clock()))
            except DuplicateAddress:
                continue
            except StorageFailure:
                raise
            report.verifiedFetched += 1
            if doc.duplicateOf is not None:
                report.duplicates += 1
    return report
