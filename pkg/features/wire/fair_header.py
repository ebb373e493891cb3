"""
Encoding of the FAIR header.

Raw layout (7 + n bytes, big-endian):

    timestamp (2) | seqno (3) | icv (1) | next_as (1) | slot_1 ... slot_n

Each slot byte holds the nonce in the high nibble and the MAC in the low nibble.
The IPv6 extension-header framing prepends a next-header byte and a header-length byte.
In the default framing the length byte is the total extension-header length in bytes
(9 + n). The strict framing pads to a multiple of 8 octets: the length byte holds the
octets-of-8 minus 1, and the last padding byte holds the number of padding bytes.

References:
- RFC 8200. (2017). Internet Protocol, Version 6 (IPv6) Specification. Section 4.
"""
import struct

from features.wire.models import AsSlot, FairHeader
from lib.constants import (
    EH_EXTRA_LEN,
    FAIR_FIXED_LEN,
    ICV_BITS,
    MAX_SLOTS,
    SEQNO_MOD,
    TIMESTAMP_MOD,
)
from lib.enums import Framing
from lib.errors import HeaderInvariantError, HeaderLengthError, TruncatedBufferError

_PACK_STR = "!HBHBB"  # timestamp, seqno high byte, seqno low 16 bits, icv, next_as
_EH_MIN_LEN = FAIR_FIXED_LEN + EH_EXTRA_LEN


def validate_fair(h: FairHeader):
    """
    Check the header invariants.

    :raises HeaderInvariantError: If any field is out of range.
    """
    n = len(h.slots)
    if n > MAX_SLOTS:
        raise HeaderInvariantError(f"{n} slots exceed the maximum of {MAX_SLOTS}.")
    if not 0 <= h.src_timestamp < TIMESTAMP_MOD:
        raise HeaderInvariantError("Timestamp does not fit into 16 bits.")
    if not 0 <= h.seqno < SEQNO_MOD:
        raise HeaderInvariantError("Sequence number does not fit into 24 bits.")
    if not 0 <= h.icv < (1 << ICV_BITS):
        raise HeaderInvariantError("ICV does not fit into 8 bits.")
    if not 0 <= h.next_as < 256:
        raise HeaderInvariantError("next_as does not fit into 8 bits.")
    if h.as_index > n:
        raise HeaderInvariantError(f"AS index {h.as_index} points beyond {n} slots.")
    if not 0 <= h.upper_protocol < 256:
        raise HeaderInvariantError("Upper-layer protocol does not fit into 8 bits.")
    for slot in h.slots:
        if not (0 <= slot.nonce < 16 and 0 <= slot.mac < 16):
            raise HeaderInvariantError("Slot nonce and MAC must fit into 4 bits each.")


def fair_length(n_slots: int, framing: Framing = Framing.RAW) -> int:
    """
    Return the encoded length of a FAIR header with n slots.

    :param n_slots: Number of allocated slots.
    :param framing: The framing mode.
    """
    if framing is Framing.RAW:
        return FAIR_FIXED_LEN + n_slots
    if framing is Framing.IPV6_EH:
        return _EH_MIN_LEN + n_slots
    # Strict framing always carries at least the pad-length byte
    return -(-(_EH_MIN_LEN + n_slots + 1) // 8) * 8


def _encode_raw(h: FairHeader) -> bytes:
    fixed = struct.pack(_PACK_STR, h.src_timestamp, h.seqno >> 16, h.seqno & 0xFFFF, h.icv, h.next_as)
    return fixed + bytes(slot.to_byte() for slot in h.slots)


def encode_fair(h: FairHeader, framing: Framing = Framing.RAW) -> bytes:
    """
    Encode a FAIR header.

    :param h: The header.
    :param framing: RAW (7 + n bytes), IPV6_EH (9 + n bytes) or IPV6_EH_STRICT (padded to 8 octets).

    returns: The encoded bytes.

    :raises HeaderInvariantError: If the header violates its invariants (e.g. n > 127).
    """
    validate_fair(h)
    raw = _encode_raw(h)
    if framing is Framing.RAW:
        return raw
    if framing is Framing.IPV6_EH:
        return bytes([h.upper_protocol, len(raw) + EH_EXTRA_LEN]) + raw
    total = fair_length(len(h.slots), framing)
    pad = total - EH_EXTRA_LEN - len(raw)
    return bytes([h.upper_protocol, total // 8 - 1]) + raw + b"\x00" * (pad - 1) + bytes([pad])


def _decode_raw(buf: bytes, upper_protocol: int | None = None) -> FairHeader:
    if len(buf) < FAIR_FIXED_LEN:
        raise TruncatedBufferError(f"A FAIR header needs at least {FAIR_FIXED_LEN} bytes, got {len(buf)}.")
    n = len(buf) - FAIR_FIXED_LEN
    if n > MAX_SLOTS:
        raise HeaderLengthError(f"{n} slots exceed the maximum of {MAX_SLOTS}.")
    ts, seq_hi, seq_lo, icv, next_as = struct.unpack_from(_PACK_STR, buf)
    h = FairHeader(
        src_timestamp=ts,
        seqno=(seq_hi << 16) | seq_lo,
        icv=icv,
        next_as=next_as,
        slots=[AsSlot.from_byte(b) for b in buf[FAIR_FIXED_LEN:]],
    )
    if upper_protocol is not None:
        h.upper_protocol = upper_protocol
    if h.as_index > n:
        raise HeaderInvariantError(f"AS index {h.as_index} points beyond {n} slots.")
    return h


def eh_length(buf: bytes, framing: Framing) -> int:
    """
    Return the length an extension-header buffer declares for itself.

    :raises TruncatedBufferError: If the buffer is shorter than the fixed part.
    :raises HeaderLengthError: If the declared length is inconsistent with the buffer.
    """
    if len(buf) < _EH_MIN_LEN:
        raise TruncatedBufferError(f"A FAIR extension header needs at least {_EH_MIN_LEN} bytes, got {len(buf)}.")
    declared = buf[1] if framing is Framing.IPV6_EH else (buf[1] + 1) * 8
    if declared < _EH_MIN_LEN:
        raise HeaderLengthError(f"Declared length {declared} is below the minimum of {_EH_MIN_LEN}.")
    if declared > len(buf):
        raise HeaderLengthError(f"Declared length {declared} exceeds the {len(buf)} available bytes.")
    return declared


def decode_fair(buf: bytes, framing: Framing = Framing.RAW) -> FairHeader:
    """
    Decode a FAIR header.

    In RAW framing the slot count is the remaining buffer length; in the extension-header
    framings it follows from the declared header length and trailing bytes are ignored.

    :param buf: The bytes to decode.
    :param framing: The framing mode used by encode_fair.

    returns: The header.

    :raises TruncatedBufferError: If the buffer is too short.
    :raises HeaderLengthError: If the header-length byte is inconsistent with the buffer.
    """
    buf = bytes(buf)
    if framing is Framing.RAW:
        return _decode_raw(buf)
    declared = eh_length(buf, framing)
    body = buf[EH_EXTRA_LEN:declared]
    if framing is Framing.IPV6_EH_STRICT:
        pad = buf[declared - 1]
        if not 1 <= pad <= 8 or declared - pad < _EH_MIN_LEN:
            raise HeaderLengthError(f"Invalid pad length {pad}.")
        body = buf[EH_EXTRA_LEN:declared - pad]
    return _decode_raw(body, upper_protocol=buf[0])
