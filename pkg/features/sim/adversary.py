"""
Scripted adversaries.

Adversaries do not hold the keys of other ASes: every MAC or ICV they fabricate is drawn
uniformly at random.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from features.crypto import SymKey
from features.dataplane import Lcg, icv_for, transit_forward
from features.wire import AsSlot, FairHeader, NetHeader, PacketRecord
from lib.constants import SEQNO_MOD, TIMESTAMP_MOD
from lib.utils import low16

logger = logging.getLogger(__name__)


def random_slots(count: int, rng: np.random.Generator) -> list[AsSlot]:
    """Return slots with random nonces and MACs."""
    values = rng.integers(0, 256, size=count)
    return [AsSlot.from_byte(int(value)) for value in values]


def corrupt_upstream(fair: FairHeader, own_index: int, rng: np.random.Generator) -> FairHeader:
    """
    Replace the MACs of every cooperating AS before own_index with random values.

    The nonces are kept so the packet does not look replayed.
    """
    out = fair.copy()
    macs = rng.integers(0, 16, size=own_index)
    for i in range(own_index):
        out.slots[i] = AsSlot(out.slots[i].nonce, int(macs[i]))
    return out


def replay_copies(
    k_i: SymKey,
    nonces: Lcg,
    net: NetHeader,
    received: FairHeader,
    marked: FairHeader,
    factor: int,
    rerandomize: bool,
    now: float,
    tolerance: int,
) -> list[FairHeader]:
    """
    Return the copies a replaying transit forwards instead of the single marked packet.

    Without re-randomization every copy carries the replayer's nonce; with it, each copy
    is marked again with a fresh nonce, which shifts the suspicion upstream.
    """
    if not rerandomize:
        return [marked.copy() for _ in range(factor)]
    copies = [marked]
    for _ in range(factor - 1):
        result = transit_forward(k_i, nonces, net, received, now, tolerance)
        copies.append(result.fair)
    return copies


@dataclass
class Injector:
    """
    Crafts packets on behalf of the source at a transit AS.

    Sequence numbers come from the upper half of the space, away from the source's counter,
    so the injected packets do not collide with genuine ones.
    """
    own_index: int
    n_slots: int
    rng: np.random.Generator
    next_seqno: int = field(default=SEQNO_MOD // 2)

    def craft(self, now_abs: float) -> FairHeader:
        """Return an injected header stamped with the injector's local time."""
        seqno = self.next_seqno
        self.next_seqno = SEQNO_MOD // 2 + (seqno + 1 - SEQNO_MOD // 2) % (SEQNO_MOD // 2)
        slots = random_slots(self.own_index, self.rng) + [AsSlot() for _ in range(self.n_slots - self.own_index)]
        return FairHeader(
            src_timestamp=low16(now_abs),
            seqno=seqno,
            icv=int(self.rng.integers(0, 256)),
            next_as=self.own_index,
            slots=slots,
        )


@dataclass
class TimestampShifter:
    """
    A source stamping the next second on packets beyond the current second's budget.

    Each packet is shifted at most once, by exactly one second.
    """
    budget: float
    second: int | None = None
    spent: float = 0.0

    def shift(self, second: int, nbytes: float) -> bool:
        """Account a packet sent during `second`; return True if it should carry second + 1."""
        if second != self.second:
            self.second, self.spent = second, 0.0
        self.spent += nbytes
        return self.spent > self.budget


def restamp(fair: FairHeader, k_sd: SymKey, payload_len: int, timestamp: int) -> FairHeader:
    """Return the header with a new timestamp and a matching ICV (the source holds K_SD)."""
    out = fair.copy()
    out.src_timestamp = timestamp % TIMESTAMP_MOD
    out.icv = icv_for(k_sd, payload_len, out.src_timestamp, out.seqno)
    return out


def frame_evidence(records: list[PacketRecord], copies: int) -> list[PacketRecord]:
    """Return the evidence with every record submitted `copies` times."""
    logger.debug("submitting %s records %s times each", len(records), copies)
    return [record for record in records for _ in range(copies)]
