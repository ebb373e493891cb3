import pytest
from hypothesis import given, strategies as st

from features.protest import Verdict
from features.sbit import SbState, ingest_verdict, sb_forward
from features.wire import FairHeader
from lib.enums import Outcome, SbAction
from tests.conftest import make_net

GUILTY = "2001:db8:a::/48"
guilty_net = make_net(src="2001:db8:a::7")
benign_net = make_net(src="2001:db8:b::7")


def flagged(value: bool) -> FairHeader:
    fair = FairHeader(next_as=0)
    fair.suspicious_bit = value
    return fair


@pytest.fixture
def state():
    state = SbState(action_policy=SbAction.DELAY)
    return ingest_verdict(state, Verdict(outcome=Outcome.SOURCE_GUILTY), [GUILTY])


def test_clean_port_flagged_packet_gets_the_action(state):
    decision = sb_forward(state, benign_net, flagged(True), port_in=1)
    assert decision.action is SbAction.DELAY and decision.fair.suspicious_bit
    assert state.sus_ports == set()


def test_unflagged_guilty_traffic_marks_the_port(state):
    original = flagged(False)
    decision = sb_forward(state, guilty_net, original, port_in=1)
    assert decision.action is SbAction.DELAY and decision.fair.suspicious_bit
    assert not original.suspicious_bit
    assert state.sus_ports == {1}


def test_clean_traffic_on_a_clean_port_is_forwarded(state):
    fair = flagged(False)
    decision = sb_forward(state, benign_net, fair, port_in=1)
    assert decision.action is SbAction.FORWARD and decision.fair is fair


def test_flagging_upstream_clears_the_port(state):
    state.sus_ports.add(1)
    decision = sb_forward(state, guilty_net, flagged(True), port_in=1)
    assert decision.action is SbAction.FORWARD and state.sus_ports == set()


def test_suspicious_port_taints_benign_traffic(state):
    state.sus_ports.add(1)
    decision = sb_forward(state, benign_net, flagged(False), port_in=1)
    assert decision.action is SbAction.DELAY and decision.fair.suspicious_bit
    assert state.sus_ports == {1}


def test_other_ports_are_unaffected(state):
    state.sus_ports.add(1)
    assert sb_forward(state, benign_net, flagged(False), port_in=2).action is SbAction.FORWARD


def test_ipv4_sources(state):
    ingest_verdict(state, Verdict(outcome=Outcome.SOURCE_GUILTY), ["10.9.0.0/16"])
    assert state.is_suspicious_source(make_net(version=4, src="10.9.1.1").src_addr)
    assert not state.is_suspicious_source(make_net(version=4, src="10.8.1.1").src_addr)


@pytest.mark.parametrize("outcome", [o for o in Outcome if o is not Outcome.SOURCE_GUILTY])
def test_only_guilty_sources_are_ingested(outcome):
    assert ingest_verdict(SbState(), Verdict(outcome=outcome), [GUILTY]).sus_sources == set()


def test_ingesting_twice_is_idempotent(state):
    before = set(state.sus_sources)
    ingest_verdict(state, Verdict(outcome=Outcome.SOURCE_GUILTY), [GUILTY])
    assert state.sus_sources == before and len(before) == 1


@given(st.lists(st.tuples(st.booleans(), st.booleans(), st.integers(0, 3)), max_size=50))
def test_processing_is_deterministic(packets):
    def replay():
        state = ingest_verdict(SbState(action_policy=SbAction.DROP), Verdict(outcome=Outcome.SOURCE_GUILTY), [GUILTY])
        trace = []
        for guilty, bit, port in packets:
            decision = sb_forward(state, guilty_net if guilty else benign_net, flagged(bit), port)
            trace.append((decision.action, decision.fair.suspicious_bit, frozenset(state.sus_ports)))
        return trace

    assert replay() == replay()


@given(st.lists(st.tuples(st.booleans(), st.integers(0, 3)), max_size=50))
def test_guilty_traffic_always_leaves_flagged(packets):
    state = ingest_verdict(SbState(), Verdict(outcome=Outcome.SOURCE_GUILTY), [GUILTY])
    for bit, port in packets:
        assert sb_forward(state, guilty_net, flagged(bit), port).fair.suspicious_bit
