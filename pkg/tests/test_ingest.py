import math

import pytest

from smac.ingest import (ExtractionFailure, ExtractionRule, FixtureExplorer,
                         RateLimit, Throttle, extract_source, scan_blocks)
from smac.store import CorpusStore

from conftest import CHAIN_DIR, FakeClock
from helpers import render_page

ADDR_A = "0x" + "aa" * 19 + "01"
ADDR_B = "0x" + "bb" * 19 + "02"
ADDR_C = "0x" + "cc" * 19 + "03"  # duplicate of A's source
ADDR_D = "0x" + "dd" * 19 + "04"  # unverified
ADDR_E = "0x" + "ee" * 19 + "05"


# --- extraction -----------------------------------------------------------

def test_extraction_inverts_page_template_for_all_fixture_pairs():
    for page_file in sorted((CHAIN_DIR / "pages").glob("*.html")):
        source_file = CHAIN_DIR / "sources" / (page_file.stem + ".sol")
        source, abi, bytecode = extract_source(page_file.read_text())
        assert source == source_file.read_text(), page_file.name
        assert abi and bytecode


def test_extraction_decodes_entities():
    page = render_page("0x" + "11" * 20, 'if (a < b && c > "x") { y("<b>"); }',
                       "[]", "0x00")
    source, _, _ = extract_source(page)
    assert source == 'if (a < b && c > "x") { y("<b>"); }'


def test_extraction_missing_container_fails():
    with pytest.raises(ExtractionFailure):
        extract_source("<html><body><div id='other'>x</div></body></html>")


def test_extraction_empty_source_fails():
    page = render_page("0x" + "11" * 20, "", "[]", "0x00")
    with pytest.raises(ExtractionFailure):
        extract_source(page)


def test_extraction_rule_is_configurable():
    html = ('<div id="s">src</div><div id="a">abi</div>'
            '<div id="b">code</div>')
    rule = ExtractionRule(source_id="s", abi_id="a", bytecode_id="b")
    assert extract_source(html, rule) == ("src", "abi", "code")


# --- throttle -------------------------------------------------------------

def window_violations(log, per_second):
    """Brute-force sliding-window check over an admission log."""
    burst = math.ceil(per_second)
    log = sorted(log)
    return [
        (log[i], log[i + burst])
        for i in range(len(log) - burst)
        if log[i + burst] - log[i] < 1.0
    ]


def test_throttle_spreads_instantaneous_burst(fake_clock):
    throttle = Throttle(RateLimit(2.0), clock=fake_clock,
                        sleep=fake_clock.sleep)
    for _ in range(10):
        throttle.acquire()
    assert len(throttle.log) == 10
    assert window_violations(throttle.log, 2.0) == []


def test_throttle_fractional_rate(fake_clock):
    throttle = Throttle(RateLimit(0.5), clock=fake_clock,
                        sleep=fake_clock.sleep)
    for _ in range(4):
        throttle.acquire()
    assert window_violations(throttle.log, 0.5) == []


def test_throttle_daily_cap_delays_to_next_utc_day(fake_clock):
    fake_clock.now = 86400 * 100.0  # midnight UTC
    throttle = Throttle(RateLimit(1000.0, max_requests_per_day=100),
                        clock=fake_clock, sleep=fake_clock.sleep)
    for _ in range(101):
        throttle.acquire()
    assert throttle.log[99] < 86400 * 101
    assert throttle.log[100] >= 86400 * 101  # pushed past the day boundary


def test_throttle_randomized_schedule_replay(fake_clock):
    import random

    rng = random.Random(3)
    throttle = Throttle(RateLimit(3.0), clock=fake_clock,
                        sleep=fake_clock.sleep)
    for _ in range(60):
        fake_clock.now += rng.random() * 0.3
        throttle.acquire()
    assert window_violations(throttle.log, 3.0) == []


def test_throttle_rejects_bad_limits(fake_clock):
    with pytest.raises(ValueError):
        Throttle(RateLimit(0.0))
    with pytest.raises(ValueError):
        Throttle(RateLimit(1.0, max_requests_per_day=0))


# --- scan_blocks ----------------------------------------------------------

def run_scan(store, clock=None):
    clock = clock or FakeClock()
    throttle = Throttle(RateLimit(1000.0), clock=clock, sleep=clock.sleep)
    return scan_blocks(FixtureExplorer(CHAIN_DIR), 100, 102, throttle, store,
                       clock=clock)


def test_scan_empty_range_on_empty_blocks(tmp_path):
    store = CorpusStore(tmp_path / "store")
    clock = FakeClock()
    throttle = Throttle(RateLimit(1000.0), clock=clock, sleep=clock.sleep)
    report = scan_blocks(FixtureExplorer(CHAIN_DIR), 1, 3, throttle, store,
                         clock=clock)
    assert (report.addressesSeen, report.verifiedFetched,
            report.duplicates) == (0, 0, 0)
    assert report.blocksScanned == 3


def test_scan_fixture_chain(tmp_path):
    store = CorpusStore(tmp_path / "store")
    report = run_scan(store)
    assert report.blocksScanned == 3
    assert report.addressesSeen == 5
    assert report.verifiedFetched == 4  # D is unverified
    assert report.duplicates == 1  # C shares A's source
    assert report.failures == []
    assert store.get_document(ADDR_C).duplicateOf == ADDR_A
    assert ADDR_D not in store
    # extrinsic metrics are pass-through per address
    assert store.get_document(ADDR_E).extrinsic.transactions == 77


def test_scan_is_resumable(tmp_path):
    store = CorpusStore(tmp_path / "store")
    run_scan(store)
    second = run_scan(store)
    assert second.verifiedFetched == 0
    assert second.duplicates == 0
    assert len(store) == 4


def test_scan_split_ranges_equal_single_scan(tmp_path):
    clock = FakeClock()
    whole = CorpusStore(tmp_path / "whole")
    scan_blocks(FixtureExplorer(CHAIN_DIR), 100, 102,
                Throttle(RateLimit(1000.0), clock=clock, sleep=clock.sleep),
                whole, clock=clock)
    split = CorpusStore(tmp_path / "split")
    for lo, hi in ((100, 101), (102, 102)):
        scan_blocks(FixtureExplorer(CHAIN_DIR), lo, hi,
                    Throttle(RateLimit(1000.0), clock=clock,
                             sleep=clock.sleep),
                    split, clock=clock)
    whole_docs = {(d.address, d.sourceHash, d.duplicateOf)
                  for d in whole.scan()}
    split_docs = {(d.address, d.sourceHash, d.duplicateOf)
                  for d in split.scan()}
    assert whole_docs == split_docs


def test_scan_bad_range_rejected(tmp_path):
    store = CorpusStore(tmp_path / "store")
    clock = FakeClock()
    throttle = Throttle(RateLimit(1000.0), clock=clock, sleep=clock.sleep)
    with pytest.raises(ValueError):
        scan_blocks(FixtureExplorer(CHAIN_DIR), 102, 100, throttle, store)


def test_scan_isolates_failing_address(tmp_path, monkeypatch):
    from smac.ingest import ExplorerError

    client = FixtureExplorer(CHAIN_DIR)
    original = FixtureExplorer.fetch_extrinsic

    def flaky(self, address):
        if address == ADDR_B:
            raise ExplorerError("boom")
        return original(self, address)

    monkeypatch.setattr(FixtureExplorer, "fetch_extrinsic", flaky)
    store = CorpusStore(tmp_path / "store")
    clock = FakeClock()
    throttle = Throttle(RateLimit(1000.0), clock=clock, sleep=clock.sleep)
    report = scan_blocks(client, 100, 102, throttle, store, clock=clock)
    assert [a for a, _ in report.failures] == [ADDR_B]
    assert report.verifiedFetched == 3
    assert ADDR_A in store and ADDR_E in store and ADDR_B not in store
