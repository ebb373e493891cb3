from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from features.wire import PacketRecord, PolicyPacket
from lib.enums import Decision, Outcome
from lib.utils import canonical_json, expand_timestamp


def record_time(record: PacketRecord) -> int:
    """Return the record's source timestamp expanded to full seconds via its arrival time."""
    return expand_timestamp(record.fair.src_timestamp, record.arrival_time)


def record_sort_key(record: PacketRecord) -> tuple:
    """Deterministic evidence order: timestamp, sequence number, slot bytes."""
    return record_time(record), record.fair.seqno, bytes(slot.to_byte() for slot in record.fair.slots)


@dataclass
class EvidenceBundle:
    """
    A proof of misbehavior: the policy plus the stored headers of one channel.

    Attributes:
        policy (PolicyPacket): The final sending policy.
        records (list[PacketRecord]): Headers in deterministic evidence order.
        complaint_time (float): When the destination filed the complaint.
        channel_id (bytes): The channel the records belong to.
    """
    policy: PolicyPacket
    records: List[PacketRecord]
    complaint_time: float
    channel_id: bytes = b""
    window: Tuple[int, int] | None = field(default=None)

    @property
    def coop_path(self) -> list[int]:
        return list(self.policy.source.path)

    @property
    def as_chain(self) -> list[int]:
        """Return [source, cooperating transits..., destination]; positions are AS indices."""
        return [self.policy.source.asn, *self.policy.source.path, self.policy.dest.asn]


class ComplaintResponse(BaseModel):
    """The signed answer of a cooperating transit AS to a complaint."""
    model_config = ConfigDict(frozen=True)

    asn: int
    decision: Decision
    mac_failures: int = 0
    mac_checked: int = 0
    tb_violations: int = 0
    reason: Optional[str] = None
    channel_id: str = ""
    sig: bytes = b""

    @property
    def failure_fraction(self) -> float:
        return self.mac_failures / self.mac_checked if self.mac_checked else 0.0

    def body(self) -> bytes:
        """Return the signed encoding (every field but the signature)."""
        return canonical_json(self.model_dump(mode="json", exclude={"sig"}))


class Verdict(BaseModel):
    """
    Classification of the second protest round.

    `interval` holds the AS numbers of the two adjacent cooperating ASes (source and
    destination included) between which the adversary sits; `interval_index` holds
    their positions on the AS chain.
    """
    outcome: Outcome
    admitting: List[int] = []
    interval: Optional[Tuple[int, int]] = None
    interval_index: Optional[Tuple[int, int]] = None
    replay_groups: int = 0
    mac_failure_fraction: Dict[int, float] = {}
    reason: str = ""

    def implicates_source(self) -> bool:
        return self.outcome is Outcome.SOURCE_GUILTY
