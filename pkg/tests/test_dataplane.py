import pytest
from hypothesis import given, strategies as st

from features.crypto import SymKey
from features.dataplane import (
    Fib,
    HeaderStore,
    Lcg,
    clock_check,
    dest_receive,
    encapsulate,
    icv_for,
    slot_mac_for,
    source_send,
    strip_fair,
    transit_forward,
)
from features.tokenbucket import TokenBucket
from features.wire import AsSlot, FairHeader, to_address
from lib.constants import FAIR_PROTOCOL, FIB_ENTRY_SIZE_V6, SEQNO_MOD, UDP_PROTOCOL
from lib.enums import ClockCheck, DropReason, Framing, PoliceResult
from lib.errors import UnroutableError
from lib.utils import low16
from tests.conftest import CBS, CIR, START, TRANSITS, make_net, make_record

KEY = SymKey(bytes(range(16)))


@pytest.fixture
def fib(channels):
    source, _ = channels
    fib = Fib()
    fib.add("2001:db8:1::/48", port=2, k_sd=source.k_sd, n_slots=len(TRANSITS))
    return fib


def test_longest_prefix_wins():
    fib = Fib()
    fib.add("2001:db8::/32", port=1, k_sd=KEY)
    fib.add("2001:db8:1::/48", port=2, k_sd=KEY)
    assert fib.lookup(to_address("2001:db8:1::5")).port == 2
    assert fib.lookup(to_address("2001:db8:2::1")).port == 1
    with pytest.raises(UnroutableError):
        fib.lookup(to_address("2001:db9::1"))


def test_ipv4_prefixes_share_the_table():
    fib = Fib()
    fib.add("10.1.0.0/16", port=4, k_sd=KEY)
    fib.add("::/0", port=9, k_sd=KEY)
    assert fib.lookup(to_address("10.1.2.3")).port == 4
    assert fib.lookup(to_address("10.2.0.1")).port == 9
    assert len(fib) == 2 and fib.memory_bytes() == 2 * FIB_ENTRY_SIZE_V6 == 72


def test_fib_counter_wraps():
    entry = Fib().add("2001:db8::/32", port=1, k_sd=KEY, seq_counter=SEQNO_MOD - 1)
    assert entry.next_seqno() == SEQNO_MOD - 1
    assert entry.next_seqno() == 0


def test_lcg_is_deterministic():
    assert Lcg(0).next() == 1013904223
    a, b = Lcg(42), Lcg(42)
    nonces = [a.nonce() for _ in range(100)]
    assert nonces == [b.nonce() for _ in range(100)]
    assert all(0 <= nonce < 16 for nonce in nonces) and len(set(nonces)) > 8


@pytest.mark.parametrize(
    "ts16, now, expected",
    [
        (100, 100.9, ClockCheck.PASS),
        (100, 103.5, ClockCheck.PASS),
        (100, 104.0, ClockCheck.DROP),
        (104, 100.0, ClockCheck.DROP),
        (65535, 65536 * 10 + 1, ClockCheck.PASS),
        (2, 65536 * 10 - 1, ClockCheck.PASS),
        (65530, 65536 * 10 + 1, ClockCheck.DROP),
    ],
)
def test_clock_check_handles_wraparound(ts16, now, expected):
    assert clock_check(ts16, now) is expected


@given(st.integers(0, 2**40), st.integers(-3, 3))
def test_timestamps_within_tolerance_pass(now, offset):
    assert clock_check(low16(now + offset), now) is ClockCheck.PASS


def test_ipv6_encapsulation_round_trip():
    net = make_net(400)
    outer = encapsulate(net, 3)
    assert outer.payload_len == 400 + 9 + 3 and outer.next_header == FAIR_PROTOCOL
    fair = FairHeader(slots=[AsSlot()] * 3, upper_protocol=UDP_PROTOCOL)
    assert strip_fair(outer, fair) == net


def test_ipv4_uses_the_raw_shim():
    net = make_net(400, version=4)
    outer = encapsulate(net, 2)
    assert outer.payload_len == 400 + 7 + 2 and outer.next_header == net.next_header
    assert strip_fair(outer, FairHeader(slots=[AsSlot()] * 2)) == net
    with pytest.raises(ValueError):
        encapsulate(net, 2, Framing.IPV6_EH)
    with pytest.raises(ValueError):
        encapsulate(make_net(), 2, Framing.RAW)


def test_source_marks_and_counts(fib, channels):
    source, _ = channels
    now = START + 0.5
    outer, fair = source_send(fib, make_net(400), now)
    assert fair.src_timestamp == low16(now) and fair.seqno == 0
    assert fair.slots == [AsSlot()] * 3 and fair.as_index == 0
    assert fair.icv == icv_for(source.k_sd, outer.payload_len, fair.src_timestamp, 0)
    _, second = source_send(fib, make_net(400), now)
    assert second.seqno == 1


def test_source_needs_a_route(fib):
    with pytest.raises(UnroutableError):
        source_send(fib, make_net(dst="2001:db8:2::1"), START)


def test_packet_crosses_the_path_and_is_accepted(fib, channels, keyrings):
    _, dest = channels
    now = START + 0.5
    net, fair = source_send(fib, make_net(400), now)
    for position, asn in enumerate(TRANSITS):
        key = keyrings[asn].data_key(now)
        result = transit_forward(key, Lcg(asn), net, fair, now)
        assert not result.dropped and result.fair.as_index == position + 1
        slot = result.fair.slots[position]
        assert slot.mac == slot_mac_for(key, net.payload_len, fair.src_timestamp, fair.seqno, slot.nonce)
        assert fair.slots[position] == AsSlot()
        fair = result.fair

    store = HeaderStore()
    received = dest_receive(dest, net, fair, now + 0.1, store, TokenBucket(cir=CIR, cbs=CBS))
    assert received.accepted and received.stored and received.police is PoliceResult.CONFORM
    assert store.records(dest.channel_id)[0].fair == fair
    assert received.delivered == make_net(400)


def test_transit_drops_stale_and_malformed_packets(fib):
    net, fair = source_send(fib, make_net(), START)
    assert transit_forward(KEY, Lcg(), net, fair, START + 10).drop is DropReason.CLOCK
    fair.as_index = 3
    assert transit_forward(KEY, Lcg(), net, fair, START).drop is DropReason.MALFORMED


def test_destination_stores_packets_with_a_bad_icv(fib, channels):
    _, dest = channels
    net, fair = source_send(fib, make_net(), START)
    fair.icv ^= 1
    store = HeaderStore()
    received = dest_receive(dest, net, fair, START, store, TokenBucket(cir=CIR, cbs=CBS))
    assert not received.accepted and received.drop is DropReason.ICV
    assert received.delivered is None
    assert received.stored and len(store) == 1


def test_destination_drops_stale_packets_without_storing(fib, channels):
    _, dest = channels
    net, fair = source_send(fib, make_net(), START)
    store = HeaderStore()
    received = dest_receive(dest, net, fair, START + 30, store, TokenBucket(cir=CIR, cbs=CBS))
    assert received.drop is DropReason.CLOCK and not received.stored and len(store) == 0


def test_destination_polices_the_channel(fib, channels):
    _, dest = channels
    policer = TokenBucket(cir=1000, cbs=1000)
    outcomes = []
    for _ in range(3):
        net, fair = source_send(fib, make_net(400), START)
        outcomes.append(dest_receive(dest, net, fair, START, HeaderStore(), policer).police)
    # 452 bytes each on the wire
    assert outcomes == [PoliceResult.CONFORM, PoliceResult.CONFORM, PoliceResult.VIOLATE]


def test_store_prunes_after_the_retention_period():
    store = HeaderStore(retention=100)
    store.append(b"a", make_record(START, 0, arrival=0.0))
    store.append(b"a", make_record(START, 1, arrival=200.0))
    store.append(b"b", make_record(START, 2, arrival=150.0))
    assert store.prune(250.0) == 1
    assert [record.fair.seqno for record in store.records(b"a")] == [1]
    assert store.channels() == [b"a", b"b"]


def test_store_persists_evidence(tmp_path):
    store = HeaderStore()
    records = [make_record(START + i, i, arrival=i + 0.25, slots=[AsSlot(i % 16, 3)]) for i in range(5)]
    for record in records:
        store.append(b"c", record)
    path = store.persist(b"c", tmp_path / "evidence.fairdump")
    restored = HeaderStore()
    assert restored.load(b"c", path) == 5
    assert restored.records(b"c") == records
    assert restored.records(b"unknown") == []
