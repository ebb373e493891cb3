"""Bit-exact wire formats.

FAIR header (raw and IPv6 extension-header framing), network headers, canonical policy
encoding and FAIRDUMP evidence files.
"""
from .dump import decode_dump, encode_dump, framing_for, read_dump, write_dump
from .fair_header import decode_fair, encode_fair, fair_length, validate_fair
from .models import (
    AsSlot,
    DestRecord,
    FairHeader,
    NetHeader,
    PacketRecord,
    PolicyPacket,
    SourceRecord,
    TransitRecord,
)
from .net_header import decode_net, encode_net, from_address, to_address
from .policy_codec import (
    decode_policy,
    dest_body,
    dest_sign_input,
    encode_policy,
    encode_record,
    encode_records,
    source_body,
    transit_mac_input,
)

__all__ = [
    "AsSlot",
    "DestRecord",
    "FairHeader",
    "NetHeader",
    "PacketRecord",
    "PolicyPacket",
    "SourceRecord",
    "TransitRecord",
    "decode_dump",
    "decode_fair",
    "decode_net",
    "decode_policy",
    "dest_body",
    "dest_sign_input",
    "encode_dump",
    "encode_fair",
    "encode_net",
    "encode_policy",
    "encode_record",
    "encode_records",
    "fair_length",
    "framing_for",
    "from_address",
    "read_dump",
    "source_body",
    "to_address",
    "transit_mac_input",
    "validate_fair",
    "write_dump",
]
