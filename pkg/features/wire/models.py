# Source: Pydantic. (n.d.). Documentation for version: v2.9. https://docs.pydantic.dev/latest
"""
Packet and policy structures.

Per-packet headers are slotted dataclasses because one instance is created per packet and
hop; the policy records are pydantic models, validated once per channel.
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from lib.constants import (
    AS_INDEX_MASK,
    IPV4_HEADER_LEN,
    IPV6_HEADER_LEN,
    SUSPICIOUS_BIT,
    UDP_PROTOCOL,
)

U32 = (1 << 32) - 1
U64 = (1 << 64) - 1


@dataclass(frozen=True, slots=True)
class AsSlot:
    """The byte a cooperating transit AS writes: 4-bit nonce and 4-bit MAC."""
    nonce: int = 0
    mac: int = 0

    def to_byte(self) -> int:
        """Return the packed byte (nonce in the high nibble)."""
        return (self.nonce << 4) | self.mac

    @classmethod
    def from_byte(cls, value: int) -> "AsSlot":
        """Unpack a slot byte."""
        return cls(nonce=value >> 4, mac=value & 0x0F)


@dataclass(slots=True)
class FairHeader:
    """
    The FAIR marking block.

    `next_as` is the raw pointer byte: its MSB is the suspicious bit and the 7 LSBs index
    the slot of the next cooperating AS. `upper_protocol` is only carried by the IPv6
    extension-header framing.
    """
    src_timestamp: int = 0
    seqno: int = 0
    icv: int = 0
    next_as: int = 0
    slots: List[AsSlot] = field(default_factory=list)
    upper_protocol: int = UDP_PROTOCOL

    @property
    def suspicious_bit(self) -> bool:
        """Return the suspicious bit."""
        return bool(self.next_as & SUSPICIOUS_BIT)

    @suspicious_bit.setter
    def suspicious_bit(self, value: bool):
        self.next_as = (self.next_as & AS_INDEX_MASK) | (SUSPICIOUS_BIT if value else 0)

    @property
    def as_index(self) -> int:
        """Return the index of the next cooperating AS."""
        return self.next_as & AS_INDEX_MASK

    @as_index.setter
    def as_index(self, value: int):
        self.next_as = (self.next_as & SUSPICIOUS_BIT) | (value & AS_INDEX_MASK)

    def copy(self) -> "FairHeader":
        """Return an independent copy (slots are immutable, the list is not)."""
        return replace(self, slots=list(self.slots))


@dataclass(frozen=True, slots=True)
class NetHeader:
    """
    The fields of the network-layer header FAIR relies on.

    Addresses are 16 bytes; IPv4 addresses are stored IPv4-mapped. `payload_len` covers
    everything after the fixed network header, the FAIR header included.
    """
    version: int
    src_addr: bytes
    dst_addr: bytes
    payload_len: int
    next_header: int

    @property
    def header_len(self) -> int:
        """Return the length of the fixed network header on the wire."""
        return IPV6_HEADER_LEN if self.version == 6 else IPV4_HEADER_LEN

    @property
    def policed_len(self) -> int:
        """Return the on-wire length charged against the sending policy."""
        return self.header_len + self.payload_len


@dataclass(slots=True)
class PacketRecord:
    """Headers of one received packet as stored by the destination (never the payload)."""
    net: NetHeader
    fair: FairHeader
    arrival_time: float

    @property
    def replay_key(self) -> tuple[int, int]:
        """Return the (timestamp, seqno) pair that identifies a packet within a second."""
        return self.fair.src_timestamp, self.fair.seqno


class SourceRecord(BaseModel):
    """P[0]: inserted and signed by the source AS."""
    model_config = ConfigDict(frozen=True)

    asn: int = Field(ge=0, le=U32)
    time: int = Field(ge=0, le=U64)
    path: List[int] = Field(default_factory=list, max_length=255)
    sig: bytes = b""


class TransitRecord(BaseModel):
    """P[i]: inserted by a cooperating transit AS, MAC under its long-term key."""
    model_config = ConfigDict(frozen=True)

    asn: int = Field(ge=0, le=U32)
    mac: bytes = Field(min_length=16, max_length=16)


class DestRecord(BaseModel):
    """P[n]: inserted and signed by the destination AS."""
    model_config = ConfigDict(frozen=True)

    asn: int = Field(ge=0, le=U32)
    expiration: int = Field(ge=0, le=U64)
    cir: int = Field(gt=0, le=U64)
    cbs: int = Field(gt=0, le=U64)
    sig: bytes = b""


class PolicyPacket(BaseModel):
    """The sending policy P: source record, transit records in path order, destination record."""
    model_config = ConfigDict(frozen=True)

    source: SourceRecord
    transits: List[TransitRecord] = Field(default_factory=list)
    dest: Optional[DestRecord] = None

    @property
    def records(self) -> list:
        """Return P[0..n] in order."""
        records = [self.source, *self.transits]
        if self.dest is not None:
            records.append(self.dest)
        return records

    @property
    def is_final(self) -> bool:
        """Return True once the destination has completed the policy."""
        return self.dest is not None

    @property
    def tc(self) -> float:
        """Return the burst interval T_c = CBS / CIR."""
        if self.dest is None:
            raise ValueError("The policy has no token bucket parameters yet.")
        return self.dest.cbs / self.dest.cir
