"""
The extended forwarding table of a source AS border router.

Besides the egress port, every destination prefix carries the shared key K_SD of the
channel and the sequence counter of the next packet.
"""
import ipaddress
import logging
from dataclasses import dataclass, field

from features.crypto import SymKey
from lib.constants import FIB_ENTRY_SIZE_V6, SEQNO_MOD
from lib.errors import UnroutableError

logger = logging.getLogger(__name__)

_V4_MAPPED_BASE = int(ipaddress.IPv6Address("::ffff:0.0.0.0"))


def to_network(prefix: str | ipaddress.IPv4Network | ipaddress.IPv6Network) -> ipaddress.IPv6Network:
    """
    Normalize a prefix to the IPv6 form used for lookups.

    IPv4 prefixes become IPv4-mapped IPv6 prefixes (::ffff:a.b.c.d/96+len) so that both
    address families share one table keyed by 16-byte addresses.
    """
    network = ipaddress.ip_network(prefix) if isinstance(prefix, str) else prefix
    if network.version == 4:
        return ipaddress.IPv6Network((_V4_MAPPED_BASE | int(network.network_address), 96 + network.prefixlen))
    return network


@dataclass
class FibEntry:
    """
    One destination prefix of the extended FIB.

    Attributes:
        prefix (IPv6Network): The destination prefix (IPv4 prefixes stored mapped).
        port (int): The egress interface.
        k_sd (SymKey): Shared key with the destination AS.
        seq_counter (int): Sequence number of the next packet, 24-bit wrapping.
        n_slots (int): Number of cooperating transits on the channel's path.
    """
    prefix: ipaddress.IPv6Network
    port: int
    k_sd: SymKey
    seq_counter: int = 0
    n_slots: int = 0

    def next_seqno(self) -> int:
        """Return the sequence number for the current packet and advance the counter."""
        seqno = self.seq_counter
        self.seq_counter = (seqno + 1) % SEQNO_MOD
        return seqno


@dataclass
class Fib:
    """A longest-prefix-match table of FibEntry objects."""
    _tables: dict = field(default_factory=dict, repr=False)

    def add(self, prefix, port: int, k_sd: SymKey, n_slots: int = 0, seq_counter: int = 0) -> FibEntry:
        """
        Install or replace the entry of a destination prefix.

        :param prefix: The prefix as text or network object.
        :param port: Egress interface.
        :param k_sd: Shared key of the channel towards the prefix.
        :param n_slots: Slots to allocate in every FAIR header.
        :param seq_counter: Initial sequence counter.

        returns: The installed entry.
        """
        network = to_network(prefix)
        entry = FibEntry(prefix=network, port=port, k_sd=k_sd, seq_counter=seq_counter % SEQNO_MOD, n_slots=n_slots)
        self._tables.setdefault(network.prefixlen, {})[int(network.network_address)] = entry
        logger.debug("installed FIB entry %s -> port %s", network, port)
        return entry

    def lookup(self, dst_addr: bytes) -> FibEntry:
        """
        Find the entry with the longest prefix covering an address.

        :param dst_addr: The 16-byte destination address.

        returns: The matching entry.

        :raises UnroutableError: If no prefix covers the address.
        """
        address = int.from_bytes(dst_addr, "big")
        for length in sorted(self._tables, reverse=True):
            mask = ((1 << length) - 1) << (128 - length) if length else 0
            entry = self._tables[length].get(address & mask)
            if entry is not None:
                return entry
        raise UnroutableError(f"No FIB entry for {ipaddress.IPv6Address(dst_addr)}.")

    def __len__(self) -> int:
        return sum(len(table) for table in self._tables.values())

    def memory_bytes(self) -> int:
        """Return the table size with the packed 36-byte IPv6 entry layout."""
        return len(self) * FIB_ENTRY_SIZE_V6
