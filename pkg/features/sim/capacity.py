"""
Sequence-number capacity of a channel.

Within the window the clock check accepts, a (timestamp, seqno) pair is unique only while
the channel sends fewer packets than the counter can number. Above that rate the source has
to reuse sequence numbers and genuine packets look replayed.
"""
import logging

import numpy as np

from lib.constants import SEQNO_BITS

logger = logging.getLogger(__name__)


def replay_capacity_gbps(mean_pkt: float, seq_bits: int = SEQNO_BITS, window: float = 3, decimal: bool = False) -> float:
    """
    Return the rate at which sequence numbers must repeat within the window.

    :param mean_pkt: Mean packet size in bytes.
    :param seq_bits: Width of the sequence number.
    :param window: Seconds during which a (timestamp, seqno) pair must stay unique.
    :param decimal: Count a 24-bit space as 16·10^6 instead of 2^24, the rounding behind the
        commonly quoted 17 Gbps.

    returns: The rate in Gbps.
    """
    space = 16e6 * 2 ** (seq_bits - 24) if decimal else 2 ** seq_bits
    return space * mean_pkt * 8 / window / 1e9


CHUNK = 1 << 20


def _stream_total(rng: np.random.Generator, mean_pkt: float, count: int) -> float:
    """Return the bytes of `count` more packets of the stream, drawn in chunks."""
    total = 0.0
    while count > 0:
        size = min(count, CHUNK)
        total += float(rng.exponential(mean_pkt, size=size).sum())
        count -= size
    return total


def seqno_reuse_onset(mean_pkt: float, seq_bits: int = SEQNO_BITS, window: float = 3, seed: int = 0, shifts: int = 4096) -> float:
    """
    Simulate a channel's packet stream and find the rate at which a sequence number comes back
    within the window.

    Packet sizes are exponential around the mean. Packet i and packet i + 2^bits carry the same
    sequence number, so the bytes sent in between fix the lowest rate at which the second one
    leaves less than `window` seconds after the first. The smallest such gap over the first
    `shifts` packets gives the onset.

    :param mean_pkt: Mean packet size in bytes.
    :param seq_bits: Width of the sequence number (small widths keep tests fast).
    :param window: Seconds during which a (timestamp, seqno) pair must stay unique.
    :param seed: Seeds the packet sizes.
    :param shifts: Starting packets whose next use of the same sequence number is checked.

    returns: The onset rate in Gbps.
    """
    space = 1 << seq_bits
    rng = np.random.default_rng(seed)
    head = rng.exponential(mean_pkt, size=min(shifts, space))
    first_cycle = float(head.sum()) + _stream_total(rng, mean_pkt, space - len(head))
    tail = rng.exponential(mean_pkt, size=len(head))
    # Bytes from packet i up to (excluding) packet i + space
    gaps = first_cycle + np.concatenate(([0.0], np.cumsum(tail)[:-1])) - np.concatenate(([0.0], np.cumsum(head)[:-1]))
    onset = float(gaps.min()) * 8 / window / 1e9
    logger.info("sequence numbers repeat from %.3f Gbps (%s-bit counter, %s s window)", onset, seq_bits, window)
    return onset
