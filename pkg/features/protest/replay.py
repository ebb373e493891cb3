"""
Replay detection and localization.

Within one second a sequence number is used once, so repeated (timestamp, seqno) pairs
reveal a replay. Cooperating ASes upstream of the replayer marked the packet once, so
their nonces repeat across the copies; ASes downstream marked every copy separately and
drew fresh nonces. The length of the repeated prefix therefore places the replayer.
"""
import logging
from collections import defaultdict
from typing import Iterable, Sequence

from features.protest.models import record_sort_key, record_time
from features.wire import PacketRecord
from lib.errors import ReplayGroupError

logger = logging.getLogger(__name__)


def detect_replay(records: Iterable[PacketRecord]) -> list[list[PacketRecord]]:
    """
    Group records sharing (timestamp, sequence number).

    :param records: Evidence records.

    returns: Groups of size >= 2 in timestamp order; empty if nothing repeats.
    """
    groups = defaultdict(list)
    for record in records:
        groups[(record_time(record), record.fair.seqno)].append(record)
    duplicates = [sorted(group, key=record_sort_key) for key, group in sorted(groups.items()) if len(group) > 1]
    if duplicates:
        logger.info("found %s duplicate groups", len(duplicates))
    return duplicates


def repeated_prefix(group: Sequence[PacketRecord]) -> int:
    """Return how many leading slots carry the same nonce in every record of the group."""
    if len(group) < 2:
        raise ReplayGroupError("A duplicate group needs at least two records.")
    slots = [record.fair.slots for record in group]
    length = min(len(s) for s in slots)
    j = 0
    while j < length and len({s[j].nonce for s in slots}) == 1:
        j += 1
    return j


def localize_adversary(group: Sequence[PacketRecord]) -> tuple[int, int]:
    """
    Localize the replayer of one duplicate group.

    Positions count along the AS chain: 0 is the source, 1..k the cooperating transits and
    k + 1 the destination. A replayer that re-randomizes its own nonce looks like its
    predecessor, so the interval is never narrower than two adjacent positions.

    :param group: Records sharing (timestamp, seqno).

    returns: The interval (j, j + 1).

    :raises ReplayGroupError: If the group has fewer than two records.
    """
    j = repeated_prefix(group)
    return j, j + 1


def localize(groups: Sequence[Sequence[PacketRecord]]) -> tuple[int, int]:
    """
    Localize the replayer over several duplicate groups.

    Nonces of downstream ASes coincide by chance with probability 2^-4 per group, which
    can only lengthen a group's repeated prefix; the shortest one is kept.
    """
    if not groups:
        raise ReplayGroupError("No duplicate groups to localize.")
    j = min(repeated_prefix(group) for group in groups)
    return j, j + 1


def dedupe_records(records: Iterable[PacketRecord]) -> list[PacketRecord]:
    """Keep the first record of every (timestamp, seqno) pair."""
    seen = set()
    unique = []
    for record in records:
        key = (record_time(record), record.fair.seqno)
        if key not in seen:
            seen.add(key)
            unique.append(record)
    return unique
