"""
This module implements the TokenBucket class used both as a shaper (source AS) and as a
policer (destination AS and transit ASes examining evidence).

References:
- RFC 2697. (1999). A Single Rate Three Color Marker (CIR/CBS terminology).
- Sawtooth Core. (2016). token_bucket.py. Hyperledger.
"""
from dataclasses import dataclass, replace

from lib.enums import PoliceResult
from lib.errors import ClockRegressionError, PacketTooLargeError

# Tolerance for float rounding in tokens + cir * dt; far below one byte
EPSILON = 1e-3

@dataclass
class TokenBucket:
    """
    A token bucket with continuous (fluid) refill.

    Attributes:
        cir (float): Committed Information Rate in bytes per second.
        cbs (float): Committed Burst Size in bytes.
        tokens (float): Current fill in bytes, 0 <= tokens <= cbs.
        last_update (float): Time of the last refill in seconds.
    """
    cir: float
    cbs: float
    tokens: float | None = None
    last_update: float = 0.0

    def __post_init__(self):
        if self.cir <= 0 or self.cbs <= 0:
            raise ValueError("CIR and CBS must be positive.")
        # A new channel starts with a full bucket
        if self.tokens is None:
            self.tokens = float(self.cbs)
        if not 0 <= self.tokens <= self.cbs:
            raise ValueError("Tokens must lie between 0 and CBS.")

    @property
    def tc(self) -> float:
        """Return the burst interval T_c = CBS / CIR."""
        return self.cbs / self.cir

    def copy(self) -> "TokenBucket":
        """Return an independent copy of the bucket state."""
        return replace(self)

    def refill(self, now: float) -> "TokenBucket":
        """
        Add the tokens accumulated since the last update.

        :param now: Current time in seconds.

        returns: The bucket itself.

        :raises ClockRegressionError: If now lies before the last update.
        """
        elapsed = now - self.last_update
        if elapsed < 0:
            raise ClockRegressionError(f"Time went backwards from {self.last_update} to {now}.")
        self.tokens = min(self.cbs, self.tokens + self.cir * elapsed)
        self.last_update = now
        return self

    def police(self, pkt_len: float, now: float) -> PoliceResult:
        """
        Police a packet.

        :param pkt_len: Packet length in bytes (> 0).
        :param now: Arrival time in seconds.

        returns: CONFORM (tokens debited) or VIOLATE (tokens unchanged).
        """
        if pkt_len <= 0:
            raise ValueError("Packet length must be positive.")
        self.refill(now)
        if self.tokens + EPSILON >= pkt_len:
            self.tokens = max(0.0, self.tokens - pkt_len)
            return PoliceResult.CONFORM
        return PoliceResult.VIOLATE

    def shape(self, pkt_len: float, now: float) -> float:
        """
        Schedule a packet through the shaper.

        Packets queue behind each other: a packet offered before the previous release is
        considered from that release on.

        :param pkt_len: Packet length in bytes.
        :param now: Time the packet is offered.

        returns: The earliest release time at which enough tokens are available.

        :raises PacketTooLargeError: If the packet exceeds CBS and could never be sent.
        """
        if pkt_len > self.cbs:
            raise PacketTooLargeError(f"A {pkt_len}-byte packet exceeds the burst size of {self.cbs} bytes.")
        self.refill(max(now, self.last_update))
        release = self.last_update
        missing = pkt_len - self.tokens
        if missing > EPSILON:
            release += missing / self.cir
            self.refill(release)
        self.tokens = max(0.0, self.tokens - pkt_len)
        return release
