"""
Encoding of the network-layer header in front of the FAIR header.

IPv6 headers are 40 bytes; IPv4 headers (the "shim" placement, FAIR right after the
20-byte IPv4 header) carry IPv4-mapped addresses internally. Checksums are left zero.

References:
- RFC 791. (1981). Internet Protocol.
- RFC 8200. (2017). Internet Protocol, Version 6 (IPv6) Specification.
"""
import ipaddress
import struct

from features.wire.models import NetHeader
from lib.constants import IPV4_HEADER_LEN, IPV6_HEADER_LEN
from lib.errors import HeaderInvariantError, TruncatedBufferError, WireFormatError

_V6_PACK_STR = "!IHBB16s16s"
_V4_PACK_STR = "!BBHHHBBH4s4s"
_V4_MAPPED_PREFIX = b"\x00" * 10 + b"\xff\xff"
HOP_LIMIT = 64


def to_address(text: str) -> bytes:
    """
    Convert a textual IPv4 or IPv6 address to the 16-byte internal form.

    :param text: e.g. "2001:db8::1" or "10.0.0.1".

    returns: 16 bytes (IPv4 addresses are IPv4-mapped).
    """
    address = ipaddress.ip_address(text)
    if address.version == 4:
        return _V4_MAPPED_PREFIX + address.packed
    return address.packed


def from_address(raw: bytes) -> ipaddress.IPv4Address | ipaddress.IPv6Address:
    """Convert the 16-byte internal form back to an address object."""
    address = ipaddress.IPv6Address(raw)
    return address.ipv4_mapped or address


def encode_net(net: NetHeader) -> bytes:
    """
    Encode the network header.

    :param net: The header.

    returns: 40 bytes for IPv6, 20 bytes for IPv4.

    :raises HeaderInvariantError: If a field does not fit.
    """
    if len(net.src_addr) != 16 or len(net.dst_addr) != 16:
        raise HeaderInvariantError("Addresses must be 16 bytes.")
    if net.version == 6:
        if not 0 <= net.payload_len <= 0xFFFF:
            raise HeaderInvariantError("IPv6 payload length does not fit into 16 bits.")
        return struct.pack(_V6_PACK_STR, 6 << 28, net.payload_len, net.next_header, HOP_LIMIT, net.src_addr, net.dst_addr)
    if net.version == 4:
        total = IPV4_HEADER_LEN + net.payload_len
        if not 0 <= total <= 0xFFFF:
            raise HeaderInvariantError("IPv4 total length does not fit into 16 bits.")
        return struct.pack(
            _V4_PACK_STR, 0x45, 0, total, 0, 0, HOP_LIMIT, net.next_header, 0, net.src_addr[12:], net.dst_addr[12:]
        )
    raise HeaderInvariantError(f"Unsupported IP version {net.version}.")


def decode_net(buf: bytes) -> NetHeader:
    """
    Decode a network header from the start of a buffer.

    :param buf: Bytes starting with an IPv4 or IPv6 header.

    returns: The header.

    :raises TruncatedBufferError: If the buffer is shorter than the header.
    :raises WireFormatError: If the version is neither 4 nor 6.
    """
    if not buf:
        raise TruncatedBufferError("Empty buffer.")
    version = buf[0] >> 4
    if version == 6:
        if len(buf) < IPV6_HEADER_LEN:
            raise TruncatedBufferError(f"An IPv6 header needs {IPV6_HEADER_LEN} bytes, got {len(buf)}.")
        _, plen, nxt, _, src, dst = struct.unpack_from(_V6_PACK_STR, buf)
        return NetHeader(version=6, src_addr=src, dst_addr=dst, payload_len=plen, next_header=nxt)
    if version == 4:
        if len(buf) < IPV4_HEADER_LEN:
            raise TruncatedBufferError(f"An IPv4 header needs {IPV4_HEADER_LEN} bytes, got {len(buf)}.")
        _, _, total, _, _, _, proto, _, src, dst = struct.unpack_from(_V4_PACK_STR, buf)
        return NetHeader(
            version=4,
            src_addr=_V4_MAPPED_PREFIX + src,
            dst_addr=_V4_MAPPED_PREFIX + dst,
            payload_len=total - IPV4_HEADER_LEN,
            next_header=proto,
        )
    raise WireFormatError(f"Unsupported IP version {version}.")
