import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from smac.store import (BadAddress, ContractArtifacts, CorpusStore,
                        DuplicateAddress, ExtrinsicMetrics, NotFound,
                        StorageFailure, normalize_address, shard_path)

A1 = "0x" + "aa" * 19 + "01"
A2 = "0x" + "bb" * 19 + "02"
A3 = "0x" + "cc" * 19 + "03"

EXT = ExtrinsicMetrics(transactions=1, balance=10, firstSeen=100, lastSeen=200)


def make_store(tmp_path):
    return CorpusStore(tmp_path / "store")


def put(store, address, source, retrieved_at=1_600_000_000, ext=EXT):
    return store.put(address, ContractArtifacts(source, "[]", "0x00"),
                     ext, retrieved_at)


def test_normalize_address_mixed_case():
    assert normalize_address("0xB7F4C286851cbf0cbf2fe8ebf40412b196c0e8AD") == \
        "0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad"


@pytest.mark.parametrize("bad", ["", "0x123", "b7f4", "0x" + "zz" * 20,
                                 "0x" + "ab" * 21])
def test_normalize_address_rejects(bad):
    with pytest.raises(BadAddress):
        normalize_address(bad)


def test_shard_path_examples():
    assert shard_path("0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad", "sol") == \
        "b7/0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad.sol"
    assert shard_path("0x" + "00" * 20, "abi") == \
        "00/0x" + "00" * 20 + ".abi"
    assert shard_path("0x536c7efeebff067a69393133b1c87a163a6b0598", "bytecode") == \
        "53/0x536c7efeebff067a69393133b1c87a163a6b0598.bytecode"


def test_shard_path_injective_over_samples():
    rng = random.Random(7)
    seen = set()
    for _ in range(200):
        addr = f"0x{rng.getrandbits(160):040x}"
        for ext in ("sol", "abi", "bytecode"):
            path = shard_path(addr, ext)
            assert path not in seen
            seen.add(path)


def test_put_canonical_writes_files(tmp_path):
    store = make_store(tmp_path)
    doc = put(store, A1, "contract A {}")
    assert doc.duplicateOf is None
    for ext in ("sol", "abi", "bytecode"):
        assert (tmp_path / "store" / shard_path(A1, ext)).exists()
    assert (tmp_path / "store" / "meta" / f"{A1}.json").exists()


def test_put_duplicate_source_stores_no_files(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "contract A {}")
    doc = put(store, A2, "contract A {}")
    assert doc.duplicateOf == A1
    assert doc.intrinsic == store.get_document(A1).intrinsic
    assert not (tmp_path / "store" / shard_path(A2, "sol")).exists()


def test_put_one_byte_difference_is_canonical(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "contract A {}")
    doc = put(store, A3, "contract A {} ")
    assert doc.duplicateOf is None


def test_put_same_address_twice_rejected(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "contract A {}")
    with pytest.raises(DuplicateAddress):
        put(store, A1, "contract B {}")


def test_put_empty_source_rejected(tmp_path):
    store = make_store(tmp_path)
    with pytest.raises(StorageFailure):
        put(store, A1, "")


def test_get_round_trip(tmp_path):
    store = make_store(tmp_path)
    source = "pragma solidity ^0.8.0;\ncontract R { /* é */ }\n"
    store.put(A1, ContractArtifacts(source, '[{"x":1}]', "0xdeadbeef"),
              EXT, 1_600_000_000)
    doc, artifacts = store.get(A1)
    assert artifacts.source == source
    assert artifacts.abi == '[{"x":1}]'
    assert artifacts.bytecode == "0xdeadbeef"
    assert doc.extrinsic == EXT


def test_get_duplicate_resolves_canonical_bytes(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "contract A {}")
    put(store, A2, "contract A {}")
    doc, artifacts = store.get(A2)
    assert doc.address == A2 and doc.duplicateOf == A1
    assert artifacts.source == "contract A {}"


def test_get_unknown_raises(tmp_path):
    with pytest.raises(NotFound):
        make_store(tmp_path).get(A1)


def test_scan_orders_by_address(tmp_path):
    store = make_store(tmp_path)
    put(store, A2, "contract B {}")
    put(store, A1, "contract A {}")
    docs = store.scan()
    assert [d.address for d in docs] == [A1, A2]
    assert store.scan(lambda d: False) == []


def test_index_rebuilt_on_reopen(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "contract A {}")
    put(store, A2, "contract A {}")
    reopened = CorpusStore(tmp_path / "store")
    assert len(reopened) == 2
    assert reopened.get_document(A2).duplicateOf == A1
    # dedup index survives: a new put of the same bytes is a duplicate
    doc = put(reopened, A3, "contract A {}")
    assert doc.duplicateOf == A1


def test_daily_counts(tmp_path):
    store = make_store(tmp_path)
    day = 86400
    put(store, A1, "contract A {}", retrieved_at=5 * day + 10)
    put(store, A2, "contract B {}", retrieved_at=5 * day + 20)
    put(store, A3, "contract C {}", retrieved_at=9 * day)
    counts = store.daily_counts()
    assert counts == [("1970-01-06", 2), ("1970-01-10", 1)]
    assert sum(c for _, c in counts) == len(store)


def test_daily_counts_empty(tmp_path):
    assert make_store(tmp_path).daily_counts() == []


def test_daily_counts_matches_group_by_oracle(tmp_path):
    import datetime

    store = make_store(tmp_path)
    rng = random.Random(11)
    stamps = [rng.randrange(0, 50 * 86400) for _ in range(30)]
    for i, ts in enumerate(stamps):
        put(store, f"0x{i:040x}", f"contract T{i} {{}}", retrieved_at=ts)
    oracle = {}
    for ts in stamps:
        key = datetime.datetime.fromtimestamp(
            ts, tz=datetime.timezone.utc).date().isoformat()
        oracle[key] = oracle.get(key, 0) + 1
    assert store.daily_counts() == sorted(oracle.items())


def test_meta_document_schema(tmp_path):
    store = make_store(tmp_path)
    put(store, A1, "pragma solidity ^0.8.0;\ncontract A {}\n")
    data = json.loads(
        (tmp_path / "store" / "meta" / f"{A1}.json").read_text())
    assert set(data) == {"address", "sourceHash", "duplicateOf",
                         "intrinsic", "extrinsic", "retrievedAt"}
    assert set(data["intrinsic"]) == {"pragma", "sloc", "functions", "events",
                                      "modifiers", "payable", "mapping",
                                      "addressVars"}
    assert set(data["extrinsic"]) == {"transactions", "balance", "etherValue",
                                      "token", "firstSeen", "lastSeen"}
    assert len(data["sourceHash"]) == 64


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=0, max_size=25))
def test_dedup_idempotence_property(tmp_path_factory, picks):
    root = tmp_path_factory.mktemp("dedup")
    store = CorpusStore(root)
    sources = [f"contract S{k} {{}}\n" for k in range(5)]
    for i, pick in enumerate(picks):
        put(store, f"0x{i:040x}", sources[pick])
    canonical = store.scan(lambda d: d.duplicateOf is None)
    assert len(canonical) == len({sources[p] for p in picks})
    for doc in store.scan(lambda d: d.duplicateOf is not None):
        target = store.get_document(doc.duplicateOf)
        assert target.duplicateOf is None
