# Source: Pydantic. (n.d.). Documentation for version: v2.9. https://docs.pydantic.dev/latest
"""
Collateral damage of the suspicious bit.

A guilty source AS_0 and a benign source AS_b both reach AS_2 through AS_1. AS_2 knows the
guilty source. In the first phase AS_1 does not flag the guilty traffic itself, so AS_2 ends
up treating everything arriving from AS_1 as suspicious; in the second phase AS_1 flags it
and the benign traffic is spared.
"""
import logging

import numpy as np
from pydantic import BaseModel, Field

from features.dataplane import to_network
from features.sbit import SbState, sb_forward
from features.wire import FairHeader, NetHeader, to_address
from lib.constants import UDP_PROTOCOL

logger = logging.getLogger(__name__)

GUILTY_PREFIX = "2001:db8:a::/48"
BENIGN_PREFIX = "2001:db8:b::/48"
DEST_ADDR = "2001:db8:ff::1"

# Ingress ports
PORT_GUILTY, PORT_BENIGN = 0, 1
PORT_FROM_AS1 = 0


class PhaseResult(BaseModel):
    """Flagging observed at AS_2 in one phase."""
    as1_flags: bool
    packets: int = Field(ge=0)
    benign_flagged_fraction: float
    guilty_flagged_fraction: float
    # Packets AS_2 processed from the first SB-set arrival until its AS_1 port was unmarked (None if it never was)
    packets_to_clear: int | None = None
    benign_flagged_after_clear: int = 0


class CollateralResult(BaseModel):
    seed: int
    guilty_share: float
    phases: list[PhaseResult]

    @property
    def reduction(self) -> float:
        """Return how much flagging at AS_1 lowers the benign flagged fraction."""
        return self.phases[0].benign_flagged_fraction - self.phases[1].benign_flagged_fraction


def _packet(src: str) -> NetHeader:
    return NetHeader(version=6, src_addr=to_address(src), dst_addr=to_address(DEST_ADDR), payload_len=400, next_header=UDP_PROTOCOL)


def _run_phase(as1_flags: bool, guilty: np.ndarray, as2: SbState) -> PhaseResult:
    """Send the interleaving through AS_1 and AS_2; AS_2's state carries over from earlier phases."""
    as1 = SbState(sus_sources={to_network(GUILTY_PREFIX)} if as1_flags else set())
    guilty_net, benign_net = _packet("2001:db8:a::1"), _packet("2001:db8:b::1")
    flagged = {True: 0, False: 0}
    total = {True: 0, False: 0}
    first_flagged = packets_to_clear = None
    benign_after_clear = 0
    for i, is_guilty in enumerate(guilty.tolist()):
        net = guilty_net if is_guilty else benign_net
        arriving = sb_forward(as1, net, FairHeader(), PORT_GUILTY if is_guilty else PORT_BENIGN).fair
        if first_flagged is None and arriving.suspicious_bit:
            first_flagged = i
        decision = sb_forward(as2, net, arriving, PORT_FROM_AS1)
        if first_flagged is not None and packets_to_clear is None and PORT_FROM_AS1 not in as2.sus_ports:
            packets_to_clear = i - first_flagged + 1
        elif packets_to_clear is not None and not is_guilty:
            benign_after_clear += decision.fair.suspicious_bit
        total[is_guilty] += 1
        flagged[is_guilty] += decision.fair.suspicious_bit
    return PhaseResult(
        as1_flags=as1_flags,
        packets=len(guilty),
        benign_flagged_fraction=flagged[False] / total[False] if total[False] else 0.0,
        guilty_flagged_fraction=flagged[True] / total[True] if total[True] else 0.0,
        packets_to_clear=packets_to_clear,
        benign_flagged_after_clear=benign_after_clear,
    )


def run_collateral_scenario(packets: int = 10_000, guilty_share: float = 0.5, seed: int = 0) -> CollateralResult:
    """
    Run both phases on the same interleaving of guilty and benign packets.

    AS_2 keeps its state between the phases, so the second phase starts with the AS_1-facing
    port already marked suspicious.

    :param packets: Packets per phase.
    :param guilty_share: Probability that a packet comes from the guilty source.
    :param seed: Seeds the interleaving.

    returns: The flagged fractions per phase.
    """
    guilty = np.random.default_rng(seed).random(packets) < guilty_share
    as2 = SbState(sus_sources={to_network(GUILTY_PREFIX)})
    phases = [_run_phase(False, guilty, as2), _run_phase(True, guilty, as2)]
    for phase in phases:
        logger.info("AS_1 flagging=%s: %.3f of benign traffic flagged", phase.as1_flags, phase.benign_flagged_fraction)
    return CollateralResult(seed=seed, guilty_share=guilty_share, phases=phases)
