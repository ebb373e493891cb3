"""
FAIRDUMP evidence files.

    file   = "FAIRDUMP" | version (1) | record*
    record = arrival time in nanoseconds (8) | record length (2) | network header | FAIR header

IPv6 records carry the FAIR header in extension-header framing, IPv4 records in raw
(shim) framing. The record length covers both headers.
"""
import logging
import struct
from pathlib import Path

from features.wire.fair_header import decode_fair, encode_fair
from features.wire.models import PacketRecord
from features.wire.net_header import decode_net, encode_net
from lib.constants import DUMP_MAGIC, DUMP_VERSION
from lib.enums import Framing
from lib.errors import DumpFormatError, WireFormatError

logger = logging.getLogger(__name__)

_RECORD_PREFIX = "!QH"
_PREFIX_LEN = struct.calcsize(_RECORD_PREFIX)


def framing_for(version: int) -> Framing:
    """Return the FAIR framing used with a network-layer version."""
    return Framing.IPV6_EH if version == 6 else Framing.RAW


def encode_dump(records) -> bytes:
    """
    Encode packet records into a FAIRDUMP byte string.

    :param records: Iterable of PacketRecord.

    returns: The dump bytes.
    """
    chunks = [DUMP_MAGIC, bytes([DUMP_VERSION])]
    for record in records:
        body = encode_net(record.net) + encode_fair(record.fair, framing_for(record.net.version))
        arrival_ns = round(record.arrival_time * 1e9)
        if not 0 <= arrival_ns < (1 << 64):
            raise DumpFormatError("Arrival time does not fit into 64 bits of nanoseconds.")
        chunks.append(struct.pack(_RECORD_PREFIX, arrival_ns, len(body)) + body)
    return b"".join(chunks)


def decode_dump(buf: bytes) -> list[PacketRecord]:
    """
    Decode a FAIRDUMP byte string.

    :param buf: The dump bytes.

    returns: The packet records in file order.

    :raises DumpFormatError: If the magic, version or any record is corrupt.
    """
    buf = bytes(buf)
    header_len = len(DUMP_MAGIC) + 1
    if len(buf) < header_len or not buf.startswith(DUMP_MAGIC):
        raise DumpFormatError("Not a FAIRDUMP file.")
    if buf[len(DUMP_MAGIC)] != DUMP_VERSION:
        raise DumpFormatError(f"Unsupported FAIRDUMP version {buf[len(DUMP_MAGIC)]}.")
    records = []
    offset = header_len
    while offset < len(buf):
        if offset + _PREFIX_LEN > len(buf):
            raise DumpFormatError(f"Truncated record prefix at offset {offset}.")
        arrival_ns, length = struct.unpack_from(_RECORD_PREFIX, buf, offset)
        offset += _PREFIX_LEN
        body = buf[offset:offset + length]
        if len(body) != length:
            raise DumpFormatError(f"Truncated record at offset {offset}.")
        offset += length
        try:
            net = decode_net(body)
            fair = decode_fair(body[net.header_len:], framing_for(net.version))
        except WireFormatError as exc:
            raise DumpFormatError(f"Corrupt record at offset {offset - length}: {exc}") from exc
        records.append(PacketRecord(net=net, fair=fair, arrival_time=arrival_ns / 1e9))
    return records


def write_dump(path: str | Path, records) -> Path:
    """Write records to a FAIRDUMP file and return its path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_dump(records))
    logger.info("wrote evidence dump %s", path)
    return path


def read_dump(path: str | Path) -> list[PacketRecord]:
    """Read a FAIRDUMP file."""
    return decode_dump(Path(path).read_bytes())
