"""
Per-packet FAIR processing at the source, transit and destination border routers.

    source       stamps timestamp, sequence number and ICV, and pre-allocates one slot per
                 cooperating transit so the packet never grows en route
    transit      drops stale packets, draws a nonce and writes a 4-bit MAC into its slot
    destination  drops stale packets, checks the ICV, polices the channel and stores the
                 headers as potential evidence

Transit routers keep no per-packet or per-flow state.
"""
import logging
from dataclasses import dataclass, replace

from features.crypto import SymKey, mac_fields
from features.dataplane.fib import Fib
from features.dataplane.lcg import Lcg
from features.dataplane.store import HeaderStore
from features.policy import Channel
from features.tokenbucket import TokenBucket
from features.wire import AsSlot, FairHeader, NetHeader, PacketRecord, fair_length, framing_for
from lib.constants import CLOCK_TOLERANCE, FAIR_PROTOCOL, ICV_BITS, SLOT_MAC_BITS, TIMESTAMP_MOD
from lib.enums import ClockCheck, DropReason, Framing, PoliceResult
from lib.utils import low16

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class ForwardResult:
    """Outcome of transit processing: the rewritten header or the reason for dropping."""
    fair: FairHeader | None
    drop: DropReason | None = None

    @property
    def dropped(self) -> bool:
        return self.drop is not None


@dataclass(slots=True)
class ReceiveResult:
    """Outcome of destination processing."""
    accepted: bool
    drop: DropReason | None = None
    police: PoliceResult | None = None
    stored: bool = False
    # Network header handed to the intra-AS network once FAIR is stripped
    delivered: NetHeader | None = None


def icv_for(k_sd: SymKey, payload_len: int, timestamp: int, seqno: int) -> int:
    """Return the 8-bit ICV over payload length, timestamp and sequence number."""
    return mac_fields(k_sd, ICV_BITS, (payload_len, 2), (timestamp, 2), (seqno, 3))


def slot_mac_for(k_i: SymKey, payload_len: int, timestamp: int, seqno: int, nonce: int) -> int:
    """Return the 4-bit slot MAC over payload length, timestamp, sequence number and nonce."""
    return mac_fields(k_i, SLOT_MAC_BITS, (payload_len, 2), (timestamp, 2), (seqno, 3), (nonce, 1))


def clock_check(ts16: int, now: float, tolerance: int = CLOCK_TOLERANCE) -> ClockCheck:
    """
    Check a 16-bit timestamp against the local clock.

    The distance is taken in 16-bit space, so timestamps on either side of the wraparound
    compare correctly.

    :param ts16: The timestamp in the FAIR header.
    :param now: Local time in Unix seconds.
    :param tolerance: Accepted deviation in seconds.

    returns: PASS or DROP.
    """
    diff = abs(ts16 - low16(now))
    if tolerance < diff < TIMESTAMP_MOD - tolerance:
        return ClockCheck.DROP
    return ClockCheck.PASS


def _check_framing(version: int, framing: Framing | None) -> Framing:
    if framing is None:
        return framing_for(version)
    if version == 4 and framing is not Framing.RAW:
        raise ValueError("IPv4 packets carry the FAIR header as a raw shim.")
    if version == 6 and framing is Framing.RAW:
        raise ValueError("IPv6 packets carry the FAIR header as an extension header.")
    return framing


def encapsulate(net: NetHeader, n_slots: int, framing: Framing | None = None) -> NetHeader:
    """
    Return the network header of a packet once a FAIR header with n slots is inserted.

    For IPv6 the next-header field points to the FAIR extension header (whose own
    next-header byte carries the previous value); for IPv4 the protocol field is kept.
    """
    framing = _check_framing(net.version, framing)
    added = fair_length(n_slots, framing)
    if net.version == 6:
        return replace(net, payload_len=net.payload_len + added, next_header=FAIR_PROTOCOL)
    return replace(net, payload_len=net.payload_len + added)


def strip_fair(net: NetHeader, fair: FairHeader, framing: Framing | None = None) -> NetHeader:
    """
    Return the network header after the destination removed the FAIR header.

    :param net: The received network header.
    :param fair: The received FAIR header.
    :param framing: The framing the packet was received with.

    returns: The header handed to the intra-AS network.
    """
    framing = _check_framing(net.version, framing)
    payload_len = net.payload_len - fair_length(len(fair.slots), framing)
    if payload_len < 0:
        raise ValueError("Payload length is shorter than the FAIR header.")
    if net.version == 6:
        return replace(net, payload_len=payload_len, next_header=fair.upper_protocol)
    return replace(net, payload_len=payload_len)


def source_send(fib: Fib, net: NetHeader, now: float, framing: Framing | None = None) -> tuple[NetHeader, FairHeader]:
    """
    Mark an outbound packet at the source AS.

    Traffic is expected to have passed the channel's shaper already.

    :param fib: The extended FIB; the matching entry's counter advances.
    :param net: The network header of the packet without FAIR header.
    :param now: Local time in Unix seconds.
    :param framing: FAIR framing (derived from the IP version by default).

    returns: The network header with FAIR inserted and the FAIR header.

    :raises UnroutableError: If no FIB entry covers the destination.
    """
    entry = fib.lookup(net.dst_addr)
    outer = encapsulate(net, entry.n_slots, framing)
    timestamp = low16(now)
    seqno = entry.next_seqno()
    fair = FairHeader(
        src_timestamp=timestamp,
        seqno=seqno,
        icv=icv_for(entry.k_sd, outer.payload_len, timestamp, seqno),
        next_as=0,
        slots=[AsSlot() for _ in range(entry.n_slots)],
        upper_protocol=net.next_header,
    )
    return outer, fair


def transit_forward(k_i: SymKey, rng: Lcg, net: NetHeader, fair: FairHeader, now: float, tolerance: int = CLOCK_TOLERANCE) -> ForwardResult:
    """
    Mark a packet at a cooperating transit AS.

    :param k_i: The local data-plane key of the current epoch.
    :param rng: The nonce generator of this router.
    :param net: The network header (read only).
    :param fair: The received FAIR header (not modified).
    :param now: Local time in Unix seconds.
    :param tolerance: Clock tolerance in seconds.

    returns: The rewritten header, or the drop reason.
    """
    if clock_check(fair.src_timestamp, now, tolerance) is ClockCheck.DROP:
        logger.debug("stale timestamp %s at %.3f", fair.src_timestamp, now)
        return ForwardResult(None, DropReason.CLOCK)
    index = fair.as_index
    if index >= len(fair.slots):
        logger.debug("AS index %s beyond %s slots", index, len(fair.slots))
        return ForwardResult(None, DropReason.MALFORMED)
    nonce = rng.nonce()
    out = fair.copy()
    out.slots[index] = AsSlot(nonce, slot_mac_for(k_i, net.payload_len, fair.src_timestamp, fair.seqno, nonce))
    out.as_index = index + 1
    return ForwardResult(out)


def dest_receive(
    channel: Channel,
    net: NetHeader,
    fair: FairHeader,
    now: float,
    store: HeaderStore,
    policer: TokenBucket,
    police_time: float | None = None,
    tolerance: int = CLOCK_TOLERANCE,
    framing: Framing | None = None,
) -> ReceiveResult:
    """
    Process an inbound packet at the destination AS.

    Every packet passing the clock check is stored and policed, ICV failures included:
    injected packets are evidence too. Only packets with a valid ICV are delivered,
    stripped of the FAIR header.

    :param channel: The destination's view of the channel.
    :param net: The received network header.
    :param fair: The received FAIR header.
    :param now: Local time in Unix seconds (stored as arrival time).
    :param store: The header store of the destination.
    :param policer: The channel's live policer.
    :param police_time: Time fed to the policer; defaults to seconds since the channel start.
    :param tolerance: Clock tolerance in seconds.
    :param framing: The framing the packet was received with.

    returns: The receive result.
    """
    if clock_check(fair.src_timestamp, now, tolerance) is ClockCheck.DROP:
        return ReceiveResult(accepted=False, drop=DropReason.CLOCK)
    store.append(channel.channel_id, PacketRecord(net, fair.copy(), now))
    police = policer.police(net.policed_len, now - channel.start if police_time is None else police_time)
    if icv_for(channel.k_sd, net.payload_len, fair.src_timestamp, fair.seqno) != fair.icv:
        logger.debug("ICV mismatch for seqno %s", fair.seqno)
        return ReceiveResult(accepted=False, drop=DropReason.ICV, police=police, stored=True)
    return ReceiveResult(accepted=True, police=police, stored=True, delivered=strip_fair(net, fair, framing))

