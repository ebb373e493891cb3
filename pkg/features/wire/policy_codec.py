"""
Canonical byte encoding of policy packets.

    packet      = version (1) | record count (1) | record*
    source      = 0x01 | asn (4) | time (8) | path count (1) | asn (4)* | sig length (2) | sig
    transit     = 0x02 | asn (4) | mac (16)
    destination = 0x03 | asn (4) | expiration (8) | cir (8) | cbs (8) | sig length (2) | sig

All integers are big-endian. Signature and MAC inputs are built from the same encoding,
so re-encoding a decoded policy reproduces the signed bytes exactly.
"""
import struct

from pydantic import ValidationError

from features.wire.models import DestRecord, PolicyPacket, SourceRecord, TransitRecord
from lib.errors import PolicyFormatError

POLICY_VERSION = 1
SOURCE_TAG, TRANSIT_TAG, DEST_TAG = 0x01, 0x02, 0x03


def source_body(asn: int, time: int, path: list[int]) -> bytes:
    """Return the signed part of P[0]: asn || time || path."""
    return struct.pack("!IQB", asn, time, len(path)) + b"".join(struct.pack("!I", hop) for hop in path)


def dest_body(asn: int, expiration: int, cir: int, cbs: int) -> bytes:
    """Return the destination's own fields: asn || expiration || CIR || CBS."""
    return struct.pack("!IQQQ", asn, expiration, cir, cbs)


def encode_record(record) -> bytes:
    """
    Encode a single policy record.

    :param record: A SourceRecord, TransitRecord or DestRecord.
    """
    if isinstance(record, SourceRecord):
        body = source_body(record.asn, record.time, record.path)
        return bytes([SOURCE_TAG]) + body + struct.pack("!H", len(record.sig)) + record.sig
    if isinstance(record, TransitRecord):
        return bytes([TRANSIT_TAG]) + struct.pack("!I", record.asn) + record.mac
    if isinstance(record, DestRecord):
        body = dest_body(record.asn, record.expiration, record.cir, record.cbs)
        return bytes([DEST_TAG]) + body + struct.pack("!H", len(record.sig)) + record.sig
    raise TypeError("Please provide a policy record.")


def encode_records(records) -> bytes:
    """Concatenate the encodings of a record prefix P[0] || ... || P[k]."""
    return b"".join(encode_record(record) for record in records)


def transit_mac_input(previous, asn: int) -> bytes:
    """Return P[0] || ... || P[i-1] || asn_i, the input hashed for a transit MAC."""
    return encode_records(previous) + struct.pack("!I", asn)


def dest_sign_input(previous, asn: int, expiration: int, cir: int, cbs: int) -> bytes:
    """Return P[0] || ... || P[n-1] || asn_n || expiration || CIR || CBS, the destination's signed input."""
    return encode_records(previous) + dest_body(asn, expiration, cir, cbs)


def encode_policy(policy: PolicyPacket) -> bytes:
    """
    Encode a (partial or final) policy packet.

    :param policy: The policy.

    returns: The canonical encoding.
    """
    records = policy.records
    return bytes([POLICY_VERSION, len(records)]) + encode_records(records)


class _Reader:
    """Cursor over a byte buffer that raises PolicyFormatError on truncation."""
    def __init__(self, buf: bytes):
        self.buf = buf
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.buf):
            raise PolicyFormatError("Policy packet is truncated.")
        chunk = self.buf[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_policy(buf: bytes) -> PolicyPacket:
    """
    Decode a policy packet.

    :param buf: The canonical encoding.

    returns: The policy.

    :raises PolicyFormatError: If the buffer is truncated, has trailing bytes, or the records
        are not ordered source, transits, destination.
    """
    reader = _Reader(bytes(buf))
    version, count = reader.unpack("!BB")
    if version != POLICY_VERSION:
        raise PolicyFormatError(f"Unsupported policy version {version}.")
    source, transits, dest = None, [], None
    try:
        for position in range(count):
            (tag,) = reader.unpack("!B")
            if dest is not None:
                raise PolicyFormatError("Records follow the destination record.")
            if tag == SOURCE_TAG:
                if position != 0:
                    raise PolicyFormatError("The source record must come first.")
                asn, time, hops = reader.unpack("!IQB")
                path = [reader.unpack("!I")[0] for _ in range(hops)]
                (sig_len,) = reader.unpack("!H")
                source = SourceRecord(asn=asn, time=time, path=path, sig=reader.take(sig_len))
            elif tag == TRANSIT_TAG:
                if source is None:
                    raise PolicyFormatError("The source record must come first.")
                (asn,) = reader.unpack("!I")
                transits.append(TransitRecord(asn=asn, mac=reader.take(16)))
            elif tag == DEST_TAG:
                if source is None:
                    raise PolicyFormatError("The source record must come first.")
                asn, expiration, cir, cbs = reader.unpack("!IQQQ")
                (sig_len,) = reader.unpack("!H")
                dest = DestRecord(asn=asn, expiration=expiration, cir=cir, cbs=cbs, sig=reader.take(sig_len))
            else:
                raise PolicyFormatError(f"Unknown record tag {tag:#04x}.")
    except ValidationError as exc:
        raise PolicyFormatError(f"Invalid policy record: {exc}") from exc
    if source is None:
        raise PolicyFormatError("A policy needs a source record.")
    if reader.offset != len(reader.buf):
        raise PolicyFormatError("Trailing bytes after the last record.")
    return PolicyPacket(source=source, transits=transits, dest=dest)
