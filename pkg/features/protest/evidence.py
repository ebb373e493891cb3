"""
Evidence assembly and offline policing.

Evidence is policed on the embedded source timestamps rather than on arrival times: the
timestamp has one-second granularity, so every record is evaluated at the start of its
second, in (timestamp, sequence number) order.
"""
import logging
import math
from typing import Iterable, Sequence

from features.dataplane import HeaderStore
from features.policy import Channel
from features.protest.models import EvidenceBundle, record_sort_key, record_time
from features.tokenbucket import TokenBucket
from features.wire import PacketRecord, PolicyPacket
from lib.config import get_settings
from lib.enums import PoliceResult
from lib.errors import EmptyWindowError, StaleEvidenceError

logger = logging.getLogger(__name__)


def police_records(records: Sequence[PacketRecord], policy: PolicyPacket, slack: float = 0.0) -> list[tuple[PacketRecord, PoliceResult]]:
    """
    Run the policy's token bucket as a policer over stored records.

    :param records: The records (any order).
    :param policy: The final policy carrying CIR and CBS.
    :param slack: Extra burst tolerance in seconds of CIR added to CBS.

    returns: (record, result) pairs in policing order.
    """
    dest = policy.dest
    ordered = sorted(records, key=lambda record: (record_time(record), record.fair.seqno))
    if not ordered:
        return []
    origin = min(policy.source.time, record_time(ordered[0]))
    bucket = TokenBucket(cir=dest.cir, cbs=dest.cbs + slack * dest.cir)
    return [(record, bucket.police(record.net.policed_len, record_time(record) - origin)) for record in ordered]


def count_violations(records: Sequence[PacketRecord], policy: PolicyPacket, slack: float = 0.0) -> int:
    """Return the number of records the policer flags."""
    return sum(result is PoliceResult.VIOLATE for _, result in police_records(records, policy, slack))


def violated_seconds(records: Sequence[PacketRecord], policy: PolicyPacket, slack: float = 0.0) -> list[int]:
    """Return the sorted expanded timestamps of seconds holding at least one violation."""
    return sorted({record_time(record) for record, result in police_records(records, policy, slack) if result is PoliceResult.VIOLATE})


def _in_violation_window(ts: int, seconds: Iterable[int], lead: int) -> bool:
    return any(second - lead <= ts <= second for second in seconds)


def assemble_evidence(
    store: HeaderStore,
    channel: Channel,
    window: str | tuple[int, int] = "full",
    complaint_time: float | None = None,
    slack: float = 0.0,
) -> EvidenceBundle:
    """
    Build the proof of misbehavior of a channel.

    :param store: The destination's header store.
    :param channel: The channel.
    :param window: "full" (whole channel), "violations" (violated seconds and the T_c
        seconds before each), or an explicit (start, end) range of expanded timestamps.
    :param complaint_time: When the complaint is filed (defaults to the last arrival).
    :param slack: Burst slack used to find violated seconds.

    returns: The bundle, records in (timestamp, seqno, slots) order.

    :raises EmptyWindowError: If no record falls into the window.
    :raises StaleEvidenceError: If the newest record is older than T_m at complaint time.
    """
    records = store.records(channel.channel_id)
    # Packets stamped after the policy expired are not covered by it
    records = [record for record in records if record_time(record) <= channel.expiration]

    if window == "violations":
        seconds = violated_seconds(records, channel.policy, slack)
        lead = math.ceil(channel.policy.tc)
        records = [record for record in records if _in_violation_window(record_time(record), seconds, lead)]
        bounds = (seconds[0] - lead, seconds[-1]) if seconds else None
    elif window == "full":
        bounds = None
    else:
        start, end = window
        records = [record for record in records if start <= record_time(record) <= end]
        bounds = (start, end)

    if not records:
        raise EmptyWindowError(f"No records of channel {channel.channel_id.hex()[:12]} in window {window}.")
    records.sort(key=record_sort_key)
    if complaint_time is None:
        complaint_time = max(record.arrival_time for record in records)
    newest = max(record_time(record) for record in records)
    if complaint_time - newest > get_settings().protest_margin_seconds:
        raise StaleEvidenceError("The evidence window ended more than the protest margin before the complaint.")

    logger.info("assembled evidence with %s records (window %s)", len(records), window)
    return EvidenceBundle(
        policy=channel.policy,
        records=records,
        complaint_time=complaint_time,
        channel_id=channel.channel_id,
        window=bounds,
    )
