"""
Communication channels.

A channel is identified by the full AS path, not by the source-destination pair: two paths
between the same endpoints are two channels with two policies.
"""
import logging
import struct
from dataclasses import dataclass
from typing import Mapping

from features.crypto import KeyRegistry, SymKey, derive_shared_key, hash_message
from features.policy.policy import negotiate_policy, verify_policy
from features.wire import PolicyPacket
from lib.config import get_settings
from lib.constants import SEQNO_MOD
from lib.errors import PolicyError, SignatureRejectedError

logger = logging.getLogger(__name__)


def channel_id_for(src_asn: int, path: list[int], dst_asn: int) -> bytes:
    """Return H(ASN_0 || path || ASN_n)."""
    return hash_message(struct.pack(f"!IB{len(path)}II", src_asn, len(path), *path, dst_asn))


@dataclass
class Channel:
    """
    One endpoint's view of a communication channel.

    Attributes:
        channel_id (bytes): Hash of source ASN, cooperating path and destination ASN.
        k_sd (SymKey): The source-destination shared key.
        policy (PolicyPacket): The final sending policy.
        seq_counter (int): Sequence number of the next packet (24-bit, wraps).
        retain_until (float): Time until which the policy must be kept for protests.
    """
    channel_id: bytes
    k_sd: SymKey
    policy: PolicyPacket
    seq_counter: int = 0
    retain_until: float = 0.0

    @property
    def src_asn(self) -> int:
        return self.policy.source.asn

    @property
    def dst_asn(self) -> int:
        return self.policy.dest.asn

    @property
    def path(self) -> list[int]:
        return list(self.policy.source.path)

    @property
    def start(self) -> int:
        return self.policy.source.time

    @property
    def expiration(self) -> int:
        return self.policy.dest.expiration

    def next_seqno(self) -> int:
        """Return the current sequence number and advance the counter modulo 2^24."""
        seqno = self.seq_counter
        self.seq_counter = (self.seq_counter + 1) % SEQNO_MOD
        return seqno

    def is_expired(self, now: float) -> bool:
        """Return True once the policy's expiration has passed."""
        return now > self.expiration


def establish_channel(src_asn: int, dst_asn: int, registry: KeyRegistry, policy: PolicyPacket, endpoint: int | None = None) -> Channel:
    """
    Establish the channel of a final policy.

    Both endpoints derive K_SD with a non-interactive Diffie-Hellman exchange; the result is
    the same whichever side calls this function.

    :param src_asn: The source AS number.
    :param dst_asn: The destination AS number.
    :param registry: The key registry.
    :param policy: The final policy.
    :param endpoint: The endpoint whose private key is used (defaults to the source).

    returns: The channel as seen by the endpoint.

    :raises SignatureRejectedError: If a policy signature does not verify.
    :raises PolicyError: If the policy does not belong to these endpoints or its path is inconsistent.
    """
    if not policy.is_final:
        raise PolicyError("The policy has not been completed by the destination.")
    if policy.source.asn != src_asn or policy.dest.asn != dst_asn:
        raise PolicyError(f"The policy does not belong to the channel AS{src_asn} -> AS{dst_asn}.")
    report = verify_policy(policy, registry)
    if not (report.source_sig_valid and report.dest_sig_valid):
        raise SignatureRejectedError("Policy signatures do not verify.")
    if not report.path_consistent:
        raise PolicyError(f"Transit records do not match the declared path (missing {report.missing_transits}).")

    endpoint = src_asn if endpoint is None else endpoint
    if endpoint not in (src_asn, dst_asn):
        raise ValueError("The endpoint must be the source or the destination AS.")
    peer = dst_asn if endpoint == src_asn else src_asn
    k_sd = derive_shared_key(registry.keypair(endpoint), registry.public_key(peer))

    margin = get_settings().protest_margin_seconds
    channel = Channel(
        channel_id=channel_id_for(src_asn, policy.source.path, dst_asn),
        k_sd=k_sd,
        policy=policy,
        retain_until=max(policy.dest.expiration, policy.source.time) + margin,
    )
    logger.info("AS%s established channel %s", endpoint, channel.channel_id.hex()[:12])
    return channel


def renegotiate(
    channel: Channel,
    registry: KeyRegistry,
    now: float,
    expiration: float,
    cir: float,
    cbs: float,
    control_keys: Mapping[int, SymKey],
    endpoint: int | None = None,
) -> Channel:
    """
    Replace a channel's policy with a freshly negotiated one over the same path.

    The new channel restarts its sequence counter at 0; the old one stays valid evidence
    context until its `retain_until`.

    returns: The new channel.
    """
    policy = negotiate_policy(registry, channel.src_asn, channel.dst_asn, channel.path, now, expiration, cir, cbs, control_keys)
    logger.info("renegotiated channel AS%s -> AS%s: CIR %s -> %s", channel.src_asn, channel.dst_asn, channel.policy.dest.cir, cir)
    return establish_channel(channel.src_asn, channel.dst_asn, registry, policy, endpoint=endpoint)
