import pathlib

import pytest

from smac.store import ContractArtifacts, CorpusStore, ExtrinsicMetrics

from helpers import make_seed_source

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
SOL_DIR = FIXTURES / "sol"
CHAIN_DIR = FIXTURES / "chain"

# Golden corpus used by the appendix query tests: three documents with
# known intrinsic vectors plus one looked up by address for its
# extrinsic metrics (transactions 639, balance 0).
GOLDEN_INTRINSIC = [
    ("0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad",
     dict(events=7, functions=27, modifiers=1, payable=1)),
    ("0x755cebe8cc53c7cb1e1bb641026a17d37d4aea91",
     dict(events=4, functions=31, modifiers=1, payable=4)),
    ("0xb92aa4a864daf0d6a509e73a9364feba44384965",
     dict(events=3, functions=24, modifiers=1, payable=1)),
]
EXTRINSIC_ADDRESS = "0x536c7efeebff067a69393133b1c87a163a6b0598"


class FakeClock:
    """Deterministic clock + sleep pair for throttle tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += max(seconds, 0.0)


def seed_golden_store(root) -> CorpusStore:
    store = CorpusStore(root)
    for i, (address, counts) in enumerate(GOLDEN_INTRINSIC):
        store.put(address,
                  ContractArtifacts(source=make_seed_source(address, **counts),
                                    abi="[]", bytecode="0x60"),
                  ExtrinsicMetrics(transactions=10 + i, balance=0,
                                   firstSeen=1_600_000_000,
                                   lastSeen=1_600_100_000),
                  retrieved_at=1_600_200_000 + i)
    store.put(EXTRINSIC_ADDRESS,
              ContractArtifacts(source=make_seed_source(EXTRINSIC_ADDRESS,
                                                        functions=2),
                                abi="[]", bytecode="0x60"),
              ExtrinsicMetrics(transactions=639, balance=0,
                               firstSeen=1_600_000_000,
                               lastSeen=1_600_100_000),
              retrieved_at=1_600_200_100)
    return store


@pytest.fixture
def golden_store(tmp_path):
    return seed_golden_store(tmp_path / "store")


@pytest.fixture
def fake_clock():
    return FakeClock()
