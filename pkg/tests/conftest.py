from pathlib import Path

import pytest

from features.crypto import AsKeyring, KeyPair, KeyRegistry
from features.policy import establish_channel, negotiate_policy
from features.wire import AsSlot, FairHeader, NetHeader, PacketRecord, to_address
from lib.constants import UDP_PROTOCOL

GOLDEN = Path(__file__).parent / "golden"

SRC, DST = 64500, 64599
TRANSITS = [64501, 64502, 64503]
START = 1_700_000_000
CIR = 125_000
CBS = 125_000


def golden_bytes(name: str) -> bytes:
    """Read a hex fixture, ignoring comments and whitespace."""
    lines = [line.split("#", 1)[0] for line in (GOLDEN / name).read_text().splitlines()]
    return bytes.fromhex("".join("".join(lines).split()))


def make_net(payload_len: int = 400, version: int = 6, src: str | None = None, dst: str | None = None) -> NetHeader:
    if version == 6:
        src, dst = src or "2001:db8::1", dst or "2001:db8:1::1"
    else:
        src, dst = src or "10.0.0.1", dst or "10.1.0.1"
    return NetHeader(version=version, src_addr=to_address(src), dst_addr=to_address(dst), payload_len=payload_len, next_header=UDP_PROTOCOL)


def make_record(ts: int, seqno: int, arrival: float | None = None, payload_len: int = 400, slots=None) -> PacketRecord:
    """Return a record stamped with the low 16 bits of ts (a full Unix second)."""
    fair = FairHeader(src_timestamp=ts % 65536, seqno=seqno, slots=list(slots or []), next_as=len(slots or []))
    return PacketRecord(make_net(payload_len), fair, float(ts) + 0.2 if arrival is None else arrival)


@pytest.fixture(scope="session")
def registry() -> KeyRegistry:
    registry = KeyRegistry()
    for asn in [SRC, *TRANSITS, DST]:
        registry.register(asn, KeyPair.from_seed(f"test|{asn}".encode()))
    return registry


@pytest.fixture
def keyrings() -> dict[int, AsKeyring]:
    return {asn: AsKeyring(seed=f"test|{asn}".encode()) for asn in TRANSITS}


@pytest.fixture
def policy(registry, keyrings):
    control = {asn: ring.control_key(START) for asn, ring in keyrings.items()}
    return negotiate_policy(registry, SRC, DST, TRANSITS, START, START + 60, CIR, CBS, control)


@pytest.fixture
def channels(registry, policy):
    """Return the (source, destination) views of the channel."""
    return establish_channel(SRC, DST, registry, policy), establish_channel(SRC, DST, registry, policy, endpoint=DST)


@pytest.fixture
def blank_slots():
    return [AsSlot() for _ in TRANSITS]
