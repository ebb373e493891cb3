"""
Complaint examination at a cooperating transit AS.

    (i)   verify the source and destination signatures of the policy
    (ii)  recompute the own 4-bit MAC of every record with the keys valid at its timestamp
    (iii) police the records whose MAC verified with the policy's token bucket

The AS admits the violation if and only if the policer flags at least one of its own
verified records, and signs its answer.
"""
import logging

from features.crypto import AsKeyring, KeyPair, KeyRegistry, sign, verify
from features.dataplane import slot_mac_for
from features.policy import verify_policy
from features.protest.evidence import count_violations
from features.protest.models import ComplaintResponse, EvidenceBundle, record_time
from features.wire import PacketRecord
from lib.config import get_settings
from lib.enums import AdversaryKind, Decision
from lib.errors import BadResponseSignatureError, StaleEvidenceError

logger = logging.getLogger(__name__)


def own_mac_valid(record: PacketRecord, slot_index: int, keyring: AsKeyring, tolerance: int) -> bool:
    """
    Check the AS's own slot of a record.

    :param record: The evidence record.
    :param slot_index: Index of the AS's slot (its position on the cooperating path).
    :param keyring: The AS's local keys.
    :param tolerance: Epoch boundary tolerance in seconds.
    """
    fair = record.fair
    if slot_index >= len(fair.slots):
        return False
    slot = fair.slots[slot_index]
    for key in keyring.keys_near(record_time(record), tolerance):
        if slot_mac_for(key, record.net.payload_len, fair.src_timestamp, fair.seqno, slot.nonce) == slot.mac:
            return True
    return False


def _respond(signer: KeyPair, **fields) -> ComplaintResponse:
    unsigned = ComplaintResponse(**fields)
    return unsigned.model_copy(update={"sig": sign(signer, unsigned.body())})


def examine_complaint(
    asn: int,
    keyring: AsKeyring,
    bundle: EvidenceBundle,
    registry: KeyRegistry,
    stance: AdversaryKind | None = None,
    tolerance: int | None = None,
    slack: float = 0.0,
    now: float | None = None,
) -> ComplaintResponse:
    """
    Examine a complaint.

    :param asn: The examining AS.
    :param keyring: Its current and retained keys.
    :param bundle: The evidence.
    :param registry: The key registry (signatures and the AS's own signing key).
    :param stance: Adversary behavior of the examining AS; a transit that corrupts upstream
        MACs colludes with the source and rejects every complaint.
    :param tolerance: Key-epoch boundary tolerance (defaults to the clock tolerance).
    :param slack: Burst slack of the policer in seconds of CIR.
    :param now: Examination time (defaults to the complaint time).

    returns: The signed response.

    :raises StaleEvidenceError: If the evidence is older than T_m.
    :raises UnknownAsnError: If the AS cannot sign.
    """
    settings = get_settings()
    tolerance = settings.clock_tolerance if tolerance is None else tolerance
    now = bundle.complaint_time if now is None else now
    if bundle.records and now - max(record_time(record) for record in bundle.records) > settings.protest_margin_seconds:
        raise StaleEvidenceError(f"AS{asn} is not obliged to examine evidence older than the protest margin.")

    signer = registry.keypair(asn)
    channel = bundle.channel_id.hex()
    policy = bundle.policy
    path = list(policy.source.path)

    # Step (i)
    report = verify_policy(policy, registry, own_asn=asn, own_keys=keyring.keys_near(policy.source.time, tolerance, control=True))
    if not (report.source_sig_valid and report.dest_sig_valid):
        return _respond(signer, asn=asn, decision=Decision.REJECT, reason="policy signature invalid", channel_id=channel)
    if asn not in path or not report.own_mac_valid:
        return _respond(signer, asn=asn, decision=Decision.REJECT, reason="policy not endorsed by this AS", channel_id=channel)

    # Step (ii)
    slot_index = path.index(asn)
    valid = [record for record in bundle.records if own_mac_valid(record, slot_index, keyring, tolerance)]
    failures = len(bundle.records) - len(valid)

    # Step (iii)
    violations = count_violations(valid, policy, slack)

    if stance is AdversaryKind.CORRUPT_UPSTREAM_MACS:
        logger.info("AS%s disputes the complaint", asn)
        return _respond(
            signer, asn=asn, decision=Decision.REJECT, mac_failures=failures, mac_checked=len(bundle.records),
            tb_violations=0, reason="no violation", channel_id=channel,
        )

    decision = Decision.ADMIT if violations > 0 else Decision.REJECT
    logger.info("AS%s %ss: %s/%s MAC failures, %s violations", asn, decision.value, failures, len(bundle.records), violations)
    return _respond(
        signer, asn=asn, decision=decision, mac_failures=failures, mac_checked=len(bundle.records),
        tb_violations=violations, reason=None if violations else "no violation", channel_id=channel,
    )


def verify_response(response: ComplaintResponse, registry: KeyRegistry):
    """
    Check the signature of a complaint response.

    :raises BadResponseSignatureError: If it does not verify.
    """
    try:
        public = registry.public_key(response.asn)
    except KeyError:
        raise BadResponseSignatureError(f"AS{response.asn} is not registered.") from None
    if not verify(public, response.body(), response.sig):
        raise BadResponseSignatureError(f"Response of AS{response.asn} carries an invalid signature.")
