"""
Sending-policy setup.

The policy packet travels from the source AS along the cooperating path to the destination
AS: the source signs its record, every cooperating transit appends its ASN and a MAC under
its long-term key over everything before it, and the destination appends the token bucket
parameters and signs the whole packet.
"""
import logging
from typing import Iterable, List, Mapping, Optional

from pydantic import BaseModel

from features.crypto import KeyRegistry, SymKey, cbc_mac, hash_message, sign, verify
from features.wire import (
    DestRecord,
    PolicyPacket,
    SourceRecord,
    TransitRecord,
    dest_sign_input,
    source_body,
    transit_mac_input,
)
from lib.config import get_settings
from lib.errors import EndorsementRefusedError, PolicyError, PolicyTimeError, SignatureRejectedError

logger = logging.getLogger(__name__)


class PolicyReport(BaseModel):
    """Findings of a policy verification."""
    source_sig_valid: bool
    dest_sig_valid: bool
    own_mac_valid: Optional[bool] = None
    path_consistent: bool
    missing_transits: List[int] = []
    unexpected_transits: List[int] = []

    @property
    def ok(self) -> bool:
        """Return True if every check that could be performed passed."""
        return (
            self.source_sig_valid
            and self.dest_sig_valid
            and self.path_consistent
            and self.own_mac_valid is not False
        )


class DefaultPolicy(BaseModel):
    """The unsigned default sending policy a destination advertises before negotiation."""
    asn: int
    cir: float
    cbs: float


def default_policy_for(dest_asn: int) -> DefaultPolicy:
    """
    Return the default sending policy of a destination AS.

    :param dest_asn: The destination AS number.
    """
    settings = get_settings()
    return DefaultPolicy(asn=dest_asn, cir=settings.default_cir, cbs=settings.default_cbs)


def create_policy(src_asn: int, now: float, coop_path: Iterable[int], registry: KeyRegistry) -> PolicyPacket:
    """
    Create the partial policy with the signed source record P[0].

    :param src_asn: The source AS number.
    :param now: Start of the channel (Unix seconds).
    :param coop_path: Cooperating transit ASes in path order (may be empty).
    :param registry: The key registry holding the source's key pair.

    returns: The partial policy.

    :raises UnknownAsnError: If the source is not registered.
    """
    keypair = registry.keypair(src_asn)
    path = list(coop_path)
    time = int(now)
    sig = sign(keypair, source_body(src_asn, time, path))
    logger.info("AS%s created policy over path %s", src_asn, path)
    return PolicyPacket(source=SourceRecord(asn=src_asn, time=time, path=path, sig=sig))


def transit_mac(records, asn: int, key: SymKey) -> bytes:
    """Return MAC_{K̂_i}(H(P[0] || ... || P[i-1] || asn_i)) as a full 128-bit tag."""
    return cbc_mac(key, hash_message(transit_mac_input(records, asn)))


def transit_endorse(policy: PolicyPacket, asn: int, key: SymKey) -> PolicyPacket:
    """
    Append the transit record of a cooperating AS.

    The transit keeps no state about the policy.

    :param policy: The partial policy received from upstream.
    :param asn: The endorsing AS number.
    :param key: The AS's long-term control-plane key K̂_i.

    returns: The policy with the new transit record appended.

    :raises EndorsementRefusedError: If the AS is not on the declared cooperating path.
    """
    if policy.is_final:
        raise PolicyError("The policy has already been completed by the destination.")
    if asn not in policy.source.path:
        raise EndorsementRefusedError(f"AS{asn} is not on the declared cooperating path.")
    record = TransitRecord(asn=asn, mac=transit_mac(policy.records, asn, key))
    return policy.model_copy(update={"transits": [*policy.transits, record]})


def dest_complete(policy: PolicyPacket, asn: int, expiration: float, cir: float, cbs: float, registry: KeyRegistry) -> PolicyPacket:
    """
    Complete the policy at the destination.

    :param policy: The endorsed partial policy.
    :param asn: The destination AS number.
    :param expiration: End of the channel (Unix seconds).
    :param cir: Committed Information Rate in bytes per second.
    :param cbs: Committed Burst Size in bytes.
    :param registry: The key registry.

    returns: The final policy.

    :raises SignatureRejectedError: If the source signature does not verify.
    :raises PolicyTimeError: If the expiration lies before the start time.
    """
    if policy.is_final:
        raise PolicyError("The policy has already been completed.")
    source = policy.source
    if not verify(registry.public_key(source.asn), source_body(source.asn, source.time, source.path), source.sig):
        raise SignatureRejectedError(f"Source signature of AS{source.asn} does not verify.")
    if expiration < source.time:
        raise PolicyTimeError("Expiration lies before the start of the channel.")
    expiration, cir, cbs = int(expiration), int(cir), int(cbs)
    sig = sign(registry.keypair(asn), dest_sign_input(policy.records, asn, expiration, cir, cbs))
    dest = DestRecord(asn=asn, expiration=expiration, cir=cir, cbs=cbs, sig=sig)
    logger.info("AS%s completed policy CIR=%s CBS=%s", asn, cir, cbs)
    return policy.model_copy(update={"dest": dest})


def verify_policy(policy: PolicyPacket, registry: KeyRegistry, own_asn: int | None = None, own_keys: Iterable[SymKey] = ()) -> PolicyReport:
    """
    Verify a final policy.

    A transit can only check its own MAC; it passes its AS number and candidate K̂_i keys.

    :param policy: The policy.
    :param registry: The key registry.
    :param own_asn: AS number of the verifying transit (optional).
    :param own_keys: Candidate long-term keys of the verifying transit.

    returns: The report (verification never raises for bad signatures).
    """
    source = policy.source
    try:
        source_ok = verify(registry.public_key(source.asn), source_body(source.asn, source.time, source.path), source.sig)
    except KeyError:
        source_ok = False

    dest_ok = False
    if policy.dest is not None:
        dest = policy.dest
        try:
            message = dest_sign_input(policy.records[:-1], dest.asn, dest.expiration, dest.cir, dest.cbs)
            dest_ok = verify(registry.public_key(dest.asn), message, dest.sig)
        except KeyError:
            dest_ok = False

    transit_asns = [record.asn for record in policy.transits]
    own_mac_valid = None
    if own_asn is not None:
        own_mac_valid = False
        if own_asn in transit_asns:
            position = transit_asns.index(own_asn)
            previous = policy.records[:position + 1]
            expected = policy.transits[position].mac
            own_mac_valid = any(transit_mac(previous, own_asn, key) == expected for key in own_keys)

    report = PolicyReport(
        source_sig_valid=source_ok,
        dest_sig_valid=dest_ok,
        own_mac_valid=own_mac_valid,
        path_consistent=transit_asns == source.path,
        missing_transits=[asn for asn in source.path if asn not in transit_asns],
        unexpected_transits=[asn for asn in transit_asns if asn not in source.path],
    )
    if not report.ok:
        logger.warning("policy of AS%s failed verification: %s", source.asn, report.model_dump())
    return report


def negotiate_policy(
    registry: KeyRegistry,
    src_asn: int,
    dst_asn: int,
    coop_path: Iterable[int],
    now: float,
    expiration: float,
    cir: float,
    cbs: float,
    control_keys: Mapping[int, SymKey],
) -> PolicyPacket:
    """
    Run setup steps 1 to 3 end to end.

    :param control_keys: K̂_i of every cooperating transit, by AS number.

    returns: The final policy.
    """
    policy = create_policy(src_asn, now, coop_path, registry)
    for asn in policy.source.path:
        policy = transit_endorse(policy, asn, control_keys[asn])
    return dest_complete(policy, dst_asn, expiration, cir, cbs, registry)
