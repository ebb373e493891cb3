"""
Second protest round: classify the collected responses.

Rules, in order:
    duplicates in the evidence        replay_detected, or framing_suspected when the copies
                                      originate at the destination and the deduplicated
                                      evidence conforms
    every cooperating AS admits       source_guilty (no AS reports tampered evidence)
    admissions form a suffix          enroute_adversary between the last rejecting and the
                                      first admitting AS
    admissions with gaps              framing_suspected
    no admission, tampered evidence   enroute_adversary behind the last tampered AS
    otherwise                         rejected
"""
import logging
from typing import Sequence

from features.crypto import KeyRegistry
from features.protest.evidence import count_violations
from features.protest.examine import verify_response
from features.protest.models import ComplaintResponse, EvidenceBundle, Verdict
from features.protest.replay import dedupe_records, detect_replay, localize
from lib.config import get_settings
from lib.enums import Decision, Outcome
from lib.errors import ProtestError

logger = logging.getLogger(__name__)


def _verdict(outcome: Outcome, chain: list[int], interval=None, **fields) -> Verdict:
    verdict = Verdict(
        outcome=outcome,
        interval=None if interval is None else (chain[interval[0]], chain[interval[1]]),
        interval_index=interval,
        **fields,
    )
    logger.info("verdict %s interval %s admitting %s", outcome.value, verdict.interval, verdict.admitting)
    return verdict


def adjudicate(
    responses: Sequence[ComplaintResponse],
    bundle: EvidenceBundle,
    registry: KeyRegistry,
    tamper_threshold: float | None = None,
    slack: float = 0.0,
) -> Verdict:
    """
    Classify the responses of the cooperating ASes to one complaint.

    :param responses: One signed response per cooperating AS.
    :param bundle: The evidence they examined.
    :param registry: The key registry for the response signatures.
    :param tamper_threshold: MAC failure fraction above which an AS's evidence counts as
        tampered (defaults to the configured threshold).
    :param slack: Burst slack of the policer in seconds of CIR.

    returns: The verdict.

    :raises BadResponseSignatureError: If a response signature does not verify.
    :raises ProtestError: If a response comes from an AS that is not on the cooperating path.
    """
    theta = get_settings().tamper_threshold if tamper_threshold is None else tamper_threshold
    for response in responses:
        verify_response(response, registry)

    chain = bundle.as_chain
    path = bundle.coop_path
    by_asn = {response.asn: response for response in responses}
    unknown = set(by_asn) - set(path)
    if unknown:
        raise ProtestError(f"Responses from ASes outside the cooperating path: {sorted(unknown)}.")

    fractions = {asn: by_asn[asn].failure_fraction for asn in path if asn in by_asn}
    admitting = [asn for asn in path if asn in by_asn and by_asn[asn].decision is Decision.ADMIT]
    tampered = [position for position, asn in enumerate(path, start=1) if fractions.get(asn, 0.0) > theta]
    common = dict(admitting=admitting, mac_failure_fraction=fractions)

    groups = detect_replay(bundle.records)
    if groups:
        interval = localize(groups)
        unique = dedupe_records(bundle.records)
        if interval[1] == len(chain) - 1 and count_violations(unique, bundle.policy, slack) == 0:
            return _verdict(
                Outcome.FRAMING_SUSPECTED, chain, interval, replay_groups=len(groups),
                reason="duplicates originate at the destination and the unique records conform", **common,
            )
        return _verdict(Outcome.REPLAY_DETECTED, chain, interval, replay_groups=len(groups), reason="duplicate sequence numbers", **common)

    if not path:
        # Only the destination can judge a channel without cooperating transits
        if count_violations(bundle.records, bundle.policy, slack):
            return _verdict(Outcome.SOURCE_GUILTY, chain, reason="violation without cooperating transits", **common)
        return _verdict(Outcome.REJECTED, chain, reason="evidence conforms", **common)

    if len(admitting) == len(path) and not tampered:
        return _verdict(Outcome.SOURCE_GUILTY, chain, reason="all cooperating ASes admit", **common)

    if admitting:
        positions = [path.index(asn) + 1 for asn in admitting]
        first = positions[0]
        if positions == list(range(first, len(path) + 1)):
            return _verdict(
                Outcome.ENROUTE_ADVERSARY, chain, (first - 1, first),
                reason="admissions form a destination-adjacent suffix", **common,
            )
        return _verdict(Outcome.FRAMING_SUSPECTED, chain, reason="admissions are not contiguous", **common)

    if tampered:
        last = tampered[-1]
        return _verdict(Outcome.ENROUTE_ADVERSARY, chain, (last, last + 1), reason="MAC failures without admission", **common)
    return _verdict(Outcome.REJECTED, chain, reason="no AS admits a violation", **common)
