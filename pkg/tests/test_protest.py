import random

import pytest

from features.crypto import sign
from features.dataplane import Fib, HeaderStore, Lcg, dest_receive, source_send, transit_forward
from features.policy import negotiate_policy
from features.protest import (
    ComplaintResponse,
    EvidenceBundle,
    adjudicate,
    assemble_evidence,
    count_violations,
    dedupe_records,
    detect_replay,
    examine_complaint,
    localize,
    localize_adversary,
    police_records,
    repeated_prefix,
    verify_response,
    violated_seconds,
)
from features.tokenbucket import TokenBucket
from features.wire import AsSlot
from lib.enums import AdversaryKind, Decision, Outcome, PoliceResult
from lib.errors import BadResponseSignatureError, EmptyWindowError, ProtestError, ReplayGroupError, StaleEvidenceError
from tests.conftest import CBS, CIR, DST, SRC, START, TRANSITS, make_net, make_record

HOUR = 3600


def respond(registry, asn: int, decision: Decision, failures: int = 0, checked: int = 100) -> ComplaintResponse:
    unsigned = ComplaintResponse(asn=asn, decision=decision, mac_failures=failures, mac_checked=checked)
    return unsigned.model_copy(update={"sig": sign(registry.keypair(asn), unsigned.body())})


def bundle_of(policy, records) -> EvidenceBundle:
    return EvidenceBundle(policy=policy, records=records, complaint_time=START + 10)


def burst(count: int, ts: int = START, first_seqno: int = 0) -> list:
    return [make_record(ts, first_seqno + i, payload_len=412, slots=[AsSlot()] * len(TRANSITS)) for i in range(count)]


def deliver(channels, keyrings, count: int, now: float, corrupt_first_slot: bool = False) -> HeaderStore:
    """Send count packets across the cooperating path and return the destination's store."""
    source, dest = channels
    fib = Fib()
    fib.add("2001:db8:1::/48", port=1, k_sd=source.k_sd, n_slots=len(TRANSITS))
    rngs = {asn: Lcg(asn) for asn in TRANSITS}
    noise = random.Random(7)
    store, policer = HeaderStore(), TokenBucket(cir=CIR, cbs=CBS)
    for _ in range(count):
        net, fair = source_send(fib, make_net(400), now)
        for asn in TRANSITS:
            fair = transit_forward(keyrings[asn].data_key(now), rngs[asn], net, fair, now).fair
            if corrupt_first_slot and asn == TRANSITS[1]:
                fair.slots[0] = AsSlot(noise.randrange(16), noise.randrange(16))
        dest_receive(dest, net, fair, now, store, policer)
    return store


@pytest.fixture
def direct_policy(registry):
    return negotiate_policy(registry, SRC, DST, [], START, START + 60, CIR, CBS, {})


class TestPolicing:
    def test_burst_beyond_cbs_violates(self, policy):
        # 452 bytes per record: 276 fit into the bucket
        assert count_violations(burst(300), policy) == 24

    def test_slack_widens_the_bucket(self, policy):
        assert count_violations(burst(300), policy, slack=0.1) == 0

    def test_records_are_policed_in_timestamp_order(self, policy):
        records = burst(2, ts=START + 1) + burst(2, ts=START, first_seqno=10)
        ordered = [record.fair.seqno for record, _ in police_records(records, policy)]
        assert ordered == [10, 11, 0, 1]

    def test_refill_between_seconds(self, policy):
        records = burst(276) + burst(276, ts=START + 1, first_seqno=276)
        results = [result for _, result in police_records(records, policy)]
        assert results.count(PoliceResult.VIOLATE) == 0

    def test_violated_seconds(self, policy):
        records = burst(300) + burst(10, ts=START + 5, first_seqno=300)
        assert violated_seconds(records, policy) == [START]


class TestEvidence:
    @pytest.fixture
    def store(self, channels):
        _, dest = channels
        store = HeaderStore()
        for record in burst(300) + burst(10, ts=START + 5, first_seqno=300) + burst(5, ts=START + 100, first_seqno=400):
            store.append(dest.channel_id, record)
        return store

    def test_full_window_excludes_records_after_expiration(self, store, channels):
        bundle = assemble_evidence(store, channels[1])
        assert len(bundle.records) == 310 and bundle.window is None

    def test_violation_window(self, store, channels):
        bundle = assemble_evidence(store, channels[1], window="violations")
        assert len(bundle.records) == 300 and bundle.window == (START - 1, START)

    def test_explicit_window(self, store, channels):
        bundle = assemble_evidence(store, channels[1], window=(START + 5, START + 5))
        assert [record.fair.seqno for record in bundle.records] == list(range(300, 310))

    def test_empty_window(self, store, channels):
        with pytest.raises(EmptyWindowError):
            assemble_evidence(store, channels[1], window=(START + 20, START + 30))

    def test_stale_complaint(self, store, channels):
        with pytest.raises(StaleEvidenceError):
            assemble_evidence(store, channels[1], complaint_time=START + 13 * HOUR)


class TestReplay:
    def test_repeated_prefix_places_the_replayer(self):
        first = make_record(START, 5, slots=[AsSlot(1, 0), AsSlot(2, 0), AsSlot(5, 0)])
        copy = make_record(START, 5, slots=[AsSlot(1, 9), AsSlot(2, 9), AsSlot(11, 3)])
        assert repeated_prefix([first, copy]) == 2
        assert localize_adversary([first, copy]) == (2, 3)

    def test_shortest_prefix_wins_over_chance_matches(self):
        lucky = [make_record(START, 1, slots=[AsSlot(1, 0), AsSlot(4, 0)]), make_record(START, 1, slots=[AsSlot(1, 0), AsSlot(4, 0)])]
        plain = [make_record(START, 2, slots=[AsSlot(1, 0), AsSlot(4, 0)]), make_record(START, 2, slots=[AsSlot(1, 0), AsSlot(6, 0)])]
        assert localize([lucky, plain]) == (1, 2)

    def test_small_groups_are_rejected(self):
        with pytest.raises(ReplayGroupError):
            repeated_prefix([make_record(START, 1)])
        with pytest.raises(ReplayGroupError):
            localize([])

    def test_detect_and_dedupe(self):
        records = burst(3) + burst(1, first_seqno=1) + burst(1, ts=START + 1, first_seqno=1)
        groups = detect_replay(records)
        assert len(groups) == 1 and len(groups[0]) == 2
        assert len(dedupe_records(records)) == 4


class TestAdjudication:
    def test_all_admit_implicates_the_source(self, registry, policy):
        responses = [respond(registry, asn, Decision.ADMIT) for asn in TRANSITS]
        verdict = adjudicate(responses, bundle_of(policy, burst(3)), registry)
        assert verdict.outcome is Outcome.SOURCE_GUILTY and verdict.implicates_source()
        assert verdict.admitting == TRANSITS

    def test_admitting_suffix_localizes_an_enroute_adversary(self, registry, policy):
        responses = [respond(registry, TRANSITS[0], Decision.REJECT)] + [respond(registry, asn, Decision.ADMIT) for asn in TRANSITS[1:]]
        verdict = adjudicate(responses, bundle_of(policy, burst(3)), registry)
        assert verdict.outcome is Outcome.ENROUTE_ADVERSARY
        assert verdict.interval == (TRANSITS[0], TRANSITS[1]) and verdict.interval_index == (1, 2)

    def test_admission_gaps_suggest_framing(self, registry, policy):
        decisions = [Decision.ADMIT, Decision.REJECT, Decision.ADMIT]
        responses = [respond(registry, asn, decision) for asn, decision in zip(TRANSITS, decisions)]
        assert adjudicate(responses, bundle_of(policy, burst(3)), registry).outcome is Outcome.FRAMING_SUSPECTED

    def test_tampered_evidence_without_admission(self, registry, policy):
        responses = [
            respond(registry, TRANSITS[0], Decision.REJECT),
            respond(registry, TRANSITS[1], Decision.REJECT, failures=90),
            respond(registry, TRANSITS[2], Decision.REJECT),
        ]
        verdict = adjudicate(responses, bundle_of(policy, burst(3)), registry)
        assert verdict.outcome is Outcome.ENROUTE_ADVERSARY and verdict.interval == (TRANSITS[1], TRANSITS[2])
        assert verdict.mac_failure_fraction[TRANSITS[1]] == 0.9

    def test_clean_rejection(self, registry, policy):
        responses = [respond(registry, asn, Decision.REJECT, failures=5) for asn in TRANSITS]
        assert adjudicate(responses, bundle_of(policy, burst(3)), registry).outcome is Outcome.REJECTED

    def test_tampering_blocks_a_unanimous_admission(self, registry, policy):
        responses = [respond(registry, asn, Decision.ADMIT, failures=50 if asn == TRANSITS[0] else 0) for asn in TRANSITS]
        verdict = adjudicate(responses, bundle_of(policy, burst(3)), registry)
        assert verdict.outcome is Outcome.ENROUTE_ADVERSARY and verdict.interval_index == (0, 1)

    def test_duplicates_are_a_replay(self, registry, policy):
        copies = [
            make_record(START, 0, slots=[AsSlot(3, 1), AsSlot(4, 1), AsSlot(5, 1)]),
            make_record(START, 0, slots=[AsSlot(3, 1), AsSlot(9, 2), AsSlot(8, 1)]),
        ]
        verdict = adjudicate([], bundle_of(policy, burst(3, first_seqno=1) + copies), registry)
        assert verdict.outcome is Outcome.REPLAY_DETECTED
        assert verdict.interval == (TRANSITS[0], TRANSITS[1]) and verdict.replay_groups == 1

    def test_identical_copies_that_conform_suggest_framing(self, registry, policy):
        slots = [AsSlot(3, 1), AsSlot(4, 1), AsSlot(5, 1)]
        copies = [make_record(START, 0, slots=slots) for _ in range(3)]
        verdict = adjudicate([], bundle_of(policy, copies), registry)
        assert verdict.outcome is Outcome.FRAMING_SUSPECTED and verdict.interval == (TRANSITS[2], DST)

    def test_identical_copies_of_a_violating_burst_are_a_replay(self, registry, policy):
        slots = [AsSlot(3, 1), AsSlot(4, 1), AsSlot(5, 1)]
        copies = [make_record(START, 0, slots=slots) for _ in range(2)]
        verdict = adjudicate([], bundle_of(policy, burst(300, first_seqno=1) + copies), registry)
        assert verdict.outcome is Outcome.REPLAY_DETECTED

    def test_channel_without_transits(self, registry, direct_policy):
        assert adjudicate([], bundle_of(direct_policy, burst(300)), registry).outcome is Outcome.SOURCE_GUILTY
        assert adjudicate([], bundle_of(direct_policy, burst(3)), registry).outcome is Outcome.REJECTED

    def test_response_from_outside_the_path(self, registry, policy):
        with pytest.raises(ProtestError):
            adjudicate([respond(registry, SRC, Decision.ADMIT)], bundle_of(policy, burst(3)), registry)

    def test_forged_response(self, registry, policy):
        forged = respond(registry, TRANSITS[0], Decision.REJECT).model_copy(update={"decision": Decision.ADMIT})
        with pytest.raises(BadResponseSignatureError):
            verify_response(forged, registry)
        with pytest.raises(BadResponseSignatureError):
            adjudicate([forged], bundle_of(policy, burst(3)), registry)


class TestExamination:
    def test_flooding_source_is_found_guilty(self, registry, keyrings, channels):
        store = deliver(channels, keyrings, 400, START + 0.5)
        bundle = assemble_evidence(store, channels[1], window="violations")
        responses = [examine_complaint(asn, keyrings[asn], bundle, registry) for asn in TRANSITS]
        assert all(response.decision is Decision.ADMIT and response.mac_failures == 0 for response in responses)
        for response in responses:
            verify_response(response, registry)
        assert adjudicate(responses, bundle, registry).outcome is Outcome.SOURCE_GUILTY

    def test_conforming_channel_is_not_admitted(self, registry, keyrings, channels):
        store = deliver(channels, keyrings, 50, START + 0.5)
        bundle = assemble_evidence(store, channels[1])
        responses = [examine_complaint(asn, keyrings[asn], bundle, registry) for asn in TRANSITS]
        assert {response.decision for response in responses} == {Decision.REJECT}
        assert adjudicate(responses, bundle, registry).outcome is Outcome.REJECTED

    def test_corrupted_upstream_macs_point_at_the_colluder(self, registry, keyrings, channels):
        store = deliver(channels, keyrings, 400, START + 0.5, corrupt_first_slot=True)
        bundle = assemble_evidence(store, channels[1])
        responses = [
            examine_complaint(
                asn, keyrings[asn], bundle, registry,
                stance=AdversaryKind.CORRUPT_UPSTREAM_MACS if asn == TRANSITS[1] else None,
            )
            for asn in TRANSITS
        ]
        assert [response.decision for response in responses] == [Decision.REJECT, Decision.REJECT, Decision.ADMIT]
        assert responses[0].failure_fraction > 0.8
        verdict = adjudicate(responses, bundle, registry)
        assert verdict.outcome is Outcome.ENROUTE_ADVERSARY and verdict.interval == (TRANSITS[1], TRANSITS[2])

    def test_policy_signed_for_other_rates_is_rejected(self, registry, keyrings, channels):
        store = deliver(channels, keyrings, 400, START + 0.5)
        bundle = assemble_evidence(store, channels[1])
        forged = bundle.policy.model_copy(update={"dest": bundle.policy.dest.model_copy(update={"cir": 1})})
        tampered = EvidenceBundle(policy=forged, records=bundle.records, complaint_time=bundle.complaint_time)
        response = examine_complaint(TRANSITS[0], keyrings[TRANSITS[0]], tampered, registry)
        assert response.decision is Decision.REJECT and response.reason == "policy signature invalid"

    def test_examination_after_the_margin(self, registry, keyrings, channels):
        store = deliver(channels, keyrings, 10, START + 0.5)
        bundle = assemble_evidence(store, channels[1])
        with pytest.raises(StaleEvidenceError):
            examine_complaint(TRANSITS[0], keyrings[TRANSITS[0]], bundle, registry, now=START + 13 * HOUR)
