"""
The destination's evidence store.

Only headers are kept (never payloads). Records stay available for at least the protest
margin T_m after their arrival.
"""
import logging
from collections import defaultdict
from pathlib import Path

from features.wire import PacketRecord, read_dump, write_dump
from lib.config import get_settings

logger = logging.getLogger(__name__)


class HeaderStore:
    """Append-only per-channel lists of PacketRecord."""

    def __init__(self, retention: float | None = None):
        self.retention = get_settings().protest_margin_seconds if retention is None else retention
        self.__records = defaultdict(list)

    def append(self, channel_id: bytes, record: PacketRecord):
        """Store the headers of a received packet."""
        self.__records[channel_id].append(record)

    def records(self, channel_id: bytes) -> list[PacketRecord]:
        """Return the records of a channel in arrival order."""
        return list(self.__records.get(channel_id, ()))

    def channels(self) -> list[bytes]:
        return list(self.__records)

    def __len__(self) -> int:
        return sum(len(records) for records in self.__records.values())

    def prune(self, now: float) -> int:
        """
        Drop records whose arrival lies more than the retention period before now.

        returns: Number of records removed.
        """
        removed = 0
        for channel_id, records in self.__records.items():
            kept = [record for record in records if now - record.arrival_time <= self.retention]
            removed += len(records) - len(kept)
            self.__records[channel_id] = kept
        if removed:
            logger.info("pruned %s expired header records", removed)
        return removed

    def persist(self, channel_id: bytes, path: str | Path) -> Path:
        """Write a channel's records to a FAIRDUMP file."""
        return write_dump(path, self.__records.get(channel_id, ()))

    def load(self, channel_id: bytes, path: str | Path) -> int:
        """
        Append the records of a FAIRDUMP file to a channel.

        returns: Number of records loaded.
        """
        records = read_dump(path)
        self.__records[channel_id].extend(records)
        logger.info("loaded %s records from %s", len(records), path)
        return len(records)
