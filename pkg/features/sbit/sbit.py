"""
Suspicious-bit forwarding.

A transit AS that acknowledged a violation flags the traffic of the guilty source by
setting the MSB of next_as. Downstream ASes treat a port whose upstream neighbour does not
flag such traffic as suspicious as a whole, until that neighbour starts flagging again.

    port_in clean,      SB set                         apply the action policy
    port_in clean,      SB clear, source suspicious    mark port suspicious, set SB, apply policy
    port_in clean,      SB clear, source clean         forward unchanged
    port_in suspicious, SB set                         unmark the port, forward
    port_in suspicious, SB clear                       set SB, apply policy
"""
import ipaddress
import logging
from dataclasses import dataclass, field
from typing import Iterable

from features.dataplane import to_network
from features.protest import Verdict
from features.wire import FairHeader, NetHeader
from lib.enums import SbAction

logger = logging.getLogger(__name__)


@dataclass
class SbState:
    """
    Per-switch suspicious-bit state.

    Attributes:
        sus_sources (set): Prefixes of source ASes whose violation this AS acknowledged.
        sus_ports (set): Ingress ports whose traffic is treated as suspicious.
        action_policy (SbAction): Treatment of suspicious traffic.
    """
    sus_sources: set = field(default_factory=set)
    sus_ports: set = field(default_factory=set)
    action_policy: SbAction = SbAction.FORWARD

    def is_suspicious_source(self, src_addr: bytes) -> bool:
        address = ipaddress.IPv6Address(src_addr)
        return any(address in prefix for prefix in self.sus_sources)


@dataclass(slots=True)
class SbDecision:
    """What the switch does with a packet: the action and the (possibly flagged) header."""
    action: SbAction
    fair: FairHeader


def sb_forward(state: SbState, net: NetHeader, fair: FairHeader, port_in: int) -> SbDecision:
    """
    Forward a packet through the suspicious-bit logic.

    The state is updated in place; the header is copied before it is flagged.

    :param state: The switch state.
    :param net: The network header (source address).
    :param fair: The FAIR header.
    :param port_in: Ingress port.

    returns: The action and the outgoing header.
    """
    if port_in not in state.sus_ports:
        if fair.suspicious_bit:
            return SbDecision(state.action_policy, fair)
        if state.is_suspicious_source(net.src_addr):
            state.sus_ports.add(port_in)
            logger.info("port %s marked suspicious", port_in)
            return SbDecision(state.action_policy, _flag(fair))
        return SbDecision(SbAction.FORWARD, fair)
    if fair.suspicious_bit:
        # The upstream AS flags again, so its other traffic is trusted
        state.sus_ports.discard(port_in)
        logger.info("port %s unmarked", port_in)
        return SbDecision(SbAction.FORWARD, fair)
    return SbDecision(state.action_policy, _flag(fair))


def _flag(fair: FairHeader) -> FairHeader:
    out = fair.copy()
    out.suspicious_bit = True
    return out


def ingest_verdict(state: SbState, verdict: Verdict, source_prefixes: Iterable) -> SbState:
    """
    Add the prefixes of a source found guilty to the suspicious sources.

    Verdicts that do not implicate the source leave the state unchanged; ingesting the same
    verdict twice is a no-op.

    :param state: The switch state.
    :param verdict: The protest verdict.
    :param source_prefixes: Prefixes announced by the channel's source AS.

    returns: The state.
    """
    if verdict.implicates_source():
        state.sus_sources.update(to_network(prefix) for prefix in source_prefixes)
    return state
