"""
Deterministic discrete-event simulation of one communication channel.

The run follows the three phases: setup (policy negotiation and key derivation),
transmission (source, transit and destination processing over an event queue) and, if the
destination's policer flagged a violation, the protest.

Simulation time is kept relative to the channel start so that token buckets work on small
numbers; absolute Unix time only enters through the 16-bit timestamps. Every AS sees its
own clock, global time plus its clock offset. Events are ordered by (time, position on the
path, packet sequence).
"""
import heapq
import ipaddress
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from features.crypto import AsKeyring, KeyPair, KeyRegistry, hash_message
from features.dataplane import Fib, HeaderStore, Lcg, dest_receive, encapsulate, source_send, to_network, transit_forward
from features.policy import Channel, establish_channel, negotiate_policy
from features.protest import (
    ComplaintResponse,
    EvidenceBundle,
    Verdict,
    adjudicate,
    assemble_evidence,
    detect_replay,
    examine_complaint,
    record_sort_key,
)
from features.sbit import SbState, ingest_verdict, sb_forward
from features.sim.adversary import Injector, TimestampShifter, corrupt_upstream, frame_evidence, replay_copies, restamp
from features.sim.models import AsSpec, ScenarioConfig
from features.tokenbucket import TokenBucket
from features.wire import NetHeader, PolicyPacket, encode_dump, framing_for, to_address
from lib.config import get_settings
from lib.constants import UDP_PROTOCOL
from lib.enums import AdversaryKind, DropReason, PoliceResult, Role, SbAction
from lib.errors import EmptyWindowError
from lib.utils import digest_hex

logger = logging.getLogger(__name__)

# Earliest local time any clock can show at the channel start (offsets are within ±0.5 s)
CLOCK_FLOOR = -1.0


def default_prefix(index: int, ip_version: int) -> str:
    """Return the prefix announced by the AS at a path position when the scenario names none."""
    if ip_version == 4:
        return f"10.{index}.0.0/16"
    return f"2001:db8:{index:x}::/48"


def _seed_bytes(seed: int, asn: int) -> bytes:
    return f"{seed}|{asn}".encode()


@dataclass
class Node:
    """Per-AS simulation state."""
    spec: AsSpec
    position: int
    prefix: str
    keyring: AsKeyring | None = None
    nonces: Lcg | None = None
    sb: SbState | None = None
    slot_index: int | None = None

    @property
    def asn(self) -> int:
        return self.spec.asn

    @property
    def behavior(self):
        return self.spec.adversary

    def host(self) -> bytes:
        network = ipaddress.ip_network(self.prefix)
        return to_address(str(network.network_address + 1))


@dataclass
class ScenarioResult:
    """Everything a run produced."""
    config: ScenarioConfig
    policy: PolicyPacket
    channel: Channel
    store: HeaderStore
    counters: dict
    forwarded: dict
    bundle: EvidenceBundle | None = None
    responses: list[ComplaintResponse] = field(default_factory=list)
    verdict: Verdict | None = None
    sb_states: dict = field(default_factory=dict)
    determinism_hash: str = ""

    @property
    def records(self):
        """Return the destination's stored records of the channel."""
        return self.store.records(self.channel.channel_id)

    def mac_failure_fraction(self) -> dict[int, float]:
        return {response.asn: response.failure_fraction for response in self.responses}

    def summary(self) -> dict:
        """Return the nested report of the run."""
        verdict = self.verdict
        return {
            "scenario": {"name": self.config.name, "seed": self.config.seed, "config_hash": self.config.config_hash},
            "verdict": {
                "outcome": verdict.outcome.value if verdict else "none",
                "admitting": list(verdict.admitting) if verdict else [],
                "interval": list(verdict.interval) if verdict and verdict.interval else "none",
                "reason": verdict.reason if verdict else "",
                "replay_groups": verdict.replay_groups if verdict else 0,
            },
            "counters": dict(sorted(self.counters.items())),
            "forwarded": {str(asn): count for asn, count in self.forwarded.items()},
            "mac_failure_fraction": {str(asn): round(fraction, 6) for asn, fraction in self.mac_failure_fraction().items()},
            "responses": {
                str(response.asn): {
                    "decision": response.decision.value,
                    "mac_failures": response.mac_failures,
                    "mac_checked": response.mac_checked,
                    "tb_violations": response.tb_violations,
                }
                for response in self.responses
            },
            "sbit": {str(asn): len(state.sus_sources) for asn, state in self.sb_states.items()},
            "determinism_hash": self.determinism_hash,
        }


class Simulation:
    """One run of a scenario; use run_scenario()."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.settings = get_settings()
        self.tolerance = self.settings.clock_tolerance
        self.rng = np.random.default_rng(config.seed)
        self.topology = config.topology
        self.latencies = self.topology.latencies()
        self.version = config.traffic.ip_version
        self.framing = config.framing or framing_for(self.version)
        self.coop_path = self.topology.coop_path
        self.n_slots = len(self.coop_path)
        self.counters = {
            "packets.offered": 0,
            "packets.sent": 0,
            "packets.injected": 0,
            "packets.replayed": 0,
            "packets.received": 0,
            "packets.accepted": 0,
            "drops.clock": 0,
            "drops.malformed": 0,
            "drops.icv": 0,
            "drops.suspicious": 0,
            "violations.live": 0,
            "evidence.records": 0,
            "bytes.delivered": 0,
        }
        self.forwarded = {spec.asn: 0 for spec in self.topology.ases[1:-1]}
        self.queue = []
        self._sequence = 0

    # Setup

    def setup(self):
        config = self.config
        self.registry = KeyRegistry()
        self.nodes = []
        for position, spec in enumerate(self.topology.ases):
            self.registry.register(spec.asn, KeyPair.from_seed(_seed_bytes(config.seed, spec.asn)))
            node = Node(spec=spec, position=position, prefix=spec.prefix or default_prefix(position, self.version))
            if spec.role is Role.TRANSIT_COOP:
                node.keyring = AsKeyring(seed=_seed_bytes(config.seed, spec.asn), rotation=config.key_rotation)
                node.nonces = Lcg(int.from_bytes(hash_message(b"lcg|" + _seed_bytes(config.seed, spec.asn))[:4], "big"))
                node.slot_index = self.coop_path.index(spec.asn)
                if spec.asn in config.sbit:
                    sb = config.sbit[spec.asn]
                    node.sb = SbState(action_policy=sb.action_policy)
            self.nodes.append(node)
        by_asn = {node.asn: node for node in self.nodes}
        for node in self.nodes:
            if node.sb is not None:
                node.sb.sus_sources.update(
                    to_network(by_asn[asn].prefix) for asn in config.sbit[node.asn].sus_sources if asn in by_asn
                )

        start = config.start_time
        self.source, self.destination = self.nodes[0], self.nodes[-1]
        control_keys = {node.asn: node.keyring.control_key(start) for node in self.nodes if node.keyring is not None}
        expiration = start + math.ceil(config.policy.duration) + self.tolerance
        self.policy = negotiate_policy(
            self.registry, self.source.asn, self.destination.asn, self.coop_path,
            start, expiration, config.policy.cir, config.policy.cbs, control_keys,
        )
        self.src_channel = establish_channel(self.source.asn, self.destination.asn, self.registry, self.policy)
        self.dst_channel = establish_channel(self.source.asn, self.destination.asn, self.registry, self.policy, endpoint=self.destination.asn)

        self.fib = Fib()
        self.fib.add(self.destination.prefix, port=1, k_sd=self.src_channel.k_sd, n_slots=self.n_slots)
        cir, cbs = self.policy.dest.cir, self.policy.dest.cbs
        self.shaper = TokenBucket(cir=cir, cbs=cbs, last_update=CLOCK_FLOOR)
        self.policer = TokenBucket(cir=cir, cbs=cbs, last_update=CLOCK_FLOOR)
        self.store = HeaderStore()

    # Traffic

    def _push(self, t: float, position: int, net: NetHeader, fair):
        heapq.heappush(self.queue, (t, position, self._sequence, net, fair))
        self._sequence += 1

    def _sizes(self):
        sizes = np.array([size for size, _ in self.config.traffic.packet_sizes])
        weights = np.array([weight for _, weight in self.config.traffic.packet_sizes], dtype=float)
        return sizes, weights / weights.sum()

    def _inner(self, size: int) -> NetHeader:
        return NetHeader(
            version=self.version,
            src_addr=self.source.host(),
            dst_addr=self.destination.host(),
            payload_len=size,
            next_header=UDP_PROTOCOL,
        )

    def _gap(self, nbytes: float, rate: float) -> float:
        if self.config.traffic.arrival == "poisson":
            return float(self.rng.exponential(nbytes / rate))
        return nbytes / rate

    def generate_source(self):
        """Shape (or, for a misbehaving source, flood) and mark the source's packets."""
        config = self.config
        cir, duration = self.policy.dest.cir, config.policy.duration
        sizes, probs = self._sizes()
        behavior = self.source.behavior
        offset = self.source.spec.clock_offset
        shifter = TimestampShifter(budget=cir) if behavior and behavior.kind is AdversaryKind.TIMESTAMP_SHIFT else None
        t = 0.0
        while t < duration:
            size = int(self.rng.choice(sizes, p=probs))
            inner = self._inner(size)
            policed = encapsulate(inner, self.n_slots, self.framing).policed_len
            misbehaving = behavior is not None and behavior.active(t)
            self.counters["packets.offered"] += 1
            if misbehaving:
                release = t
                rate = behavior.rate_multiplier * cir
            else:
                release = self.shaper.shape(policed, t)
                rate = config.traffic.offered_rate * cir
            now_abs = config.start_time + release
            outer, fair = source_send(self.fib, inner, now_abs, self.framing)
            if shifter is not None and misbehaving:
                second = math.floor(now_abs)
                if shifter.shift(second, policed):
                    fair = restamp(fair, self.src_channel.k_sd, outer.payload_len, second + 1)
            self.counters["packets.sent"] += 1
            self._push(release - offset + self.latencies[0], 1, outer, fair)
            t += self._gap(policed, rate)

    def generate_injections(self):
        """Schedule the packets crafted by injecting transits."""
        sizes, probs = self._sizes()
        for node in self.nodes:
            behavior = node.behavior
            if behavior is None or behavior.kind is not AdversaryKind.INJECT:
                continue
            injector = Injector(own_index=node.slot_index, n_slots=self.n_slots, rng=np.random.default_rng([self.config.seed, node.asn]))
            rate = behavior.rate * self.policy.dest.cir
            t = behavior.start
            end = min(self.config.policy.duration, behavior.end or self.config.policy.duration)
            while t < end:
                outer = encapsulate(self._inner(int(self.rng.choice(sizes, p=probs))), self.n_slots, self.framing)
                fair = injector.craft(self.config.start_time + t)
                self.counters["packets.injected"] += 1
                self._push(t - node.spec.clock_offset, node.position, outer, fair)
                t += self._gap(outer.policed_len, rate)

    # Event loop

    def _drop(self, reason: DropReason):
        self.counters[f"drops.{reason.value}"] += 1

    def _transit(self, node: Node, t: float, net: NetHeader, fair):
        local = t + node.spec.clock_offset
        now_abs = self.config.start_time + local
        latency = self.latencies[node.position]
        if node.spec.role is Role.TRANSIT_NONCOOP:
            self.forwarded[node.asn] += 1
            self._push(t + latency, node.position + 1, net, fair)
            return
        key = node.keyring.data_key(now_abs)
        result = transit_forward(key, node.nonces, net, fair, now_abs, self.tolerance)
        if result.dropped:
            self._drop(result.drop)
            return
        outgoing = [result.fair]
        behavior = node.behavior
        if behavior is not None and behavior.active(local):
            if behavior.kind is AdversaryKind.CORRUPT_UPSTREAM_MACS:
                outgoing = [corrupt_upstream(result.fair, node.slot_index, self.rng)]
            elif behavior.kind is AdversaryKind.REPLAY:
                outgoing = replay_copies(
                    key, node.nonces, net, fair, result.fair, behavior.factor,
                    behavior.rerandomize_own_nonce, now_abs, self.tolerance,
                )
                self.counters["packets.replayed"] += len(outgoing) - 1
        delay = 0.0
        if node.sb is not None:
            flagged = []
            for header in outgoing:
                decision = sb_forward(node.sb, net, header, port_in=node.position - 1)
                if decision.action is SbAction.DROP:
                    self._drop(DropReason.SUSPICIOUS)
                    continue
                if decision.action is SbAction.DELAY:
                    delay = self.config.sbit[node.asn].delay
                flagged.append(decision.fair)
            outgoing = flagged
        for header in outgoing:
            self.forwarded[node.asn] += 1
            self._push(t + latency + delay, node.position + 1, net, header)

    def _receive(self, t: float, net: NetHeader, fair):
        local = t + self.destination.spec.clock_offset
        self.counters["packets.received"] += 1
        result = dest_receive(
            self.dst_channel, net, fair, self.config.start_time + local, self.store, self.policer,
            police_time=local, tolerance=self.tolerance, framing=self.framing,
        )
        if result.drop is not None:
            self._drop(result.drop)
        if result.accepted:
            self.counters["packets.accepted"] += 1
            self.counters["bytes.delivered"] += result.delivered.payload_len
        if result.police is PoliceResult.VIOLATE:
            self.counters["violations.live"] += 1

    def transmit(self):
        last = len(self.nodes) - 1
        while self.queue:
            t, position, _, net, fair = heapq.heappop(self.queue)
            if position == last:
                self._receive(t, net, fair)
            else:
                self._transit(self.nodes[position], t, net, fair)

    # Protest

    def protest(self) -> tuple[EvidenceBundle | None, list[ComplaintResponse], Verdict | None]:
        config = self.config
        framing = self.destination.behavior is not None and self.destination.behavior.kind is AdversaryKind.FRAME_DUPLICATE_EVIDENCE
        if not (self.counters["violations.live"] or framing):
            logger.info("no violation observed, no protest")
            return None, [], None
        records = self.store.records(self.dst_channel.channel_id)
        if not records:
            return None, [], None
        complaint_time = max(record.arrival_time for record in records) + 1.0
        try:
            bundle = assemble_evidence(self.store, self.dst_channel, config.evidence.window, complaint_time, config.protest.slack)
        except EmptyWindowError as exc:
            logger.warning("no evidence to submit: %s", exc)
            return None, [], None
        if framing:
            bundle.records = sorted(frame_evidence(bundle.records, self.destination.behavior.copies), key=record_sort_key)
        self.counters["evidence.records"] = len(bundle.records)

        responses = []
        for node in self.nodes:
            if node.keyring is None:
                continue
            node.keyring.prune(complaint_time)
            stance = node.behavior.kind if node.behavior is not None else None
            responses.append(examine_complaint(
                node.asn, node.keyring, bundle, self.registry, stance=stance,
                tolerance=self.tolerance, slack=config.protest.slack, now=complaint_time,
            ))
        verdict = adjudicate(responses, bundle, self.registry, config.protest.tamper_threshold, config.protest.slack)
        for node in self.nodes:
            if node.sb is not None:
                ingest_verdict(node.sb, verdict, [self.source.prefix])
        return bundle, responses, verdict

    def run(self) -> ScenarioResult:
        self.setup()
        self.generate_source()
        self.generate_injections()
        self.transmit()
        bundle, responses, verdict = self.protest()
        result = ScenarioResult(
            config=self.config,
            policy=self.policy,
            channel=self.dst_channel,
            store=self.store,
            counters={**self.counters, "fib.bytes": self.fib.memory_bytes()},
            forwarded=dict(self.forwarded),
            bundle=bundle,
            responses=responses,
            verdict=verdict,
            sb_states={node.asn: node.sb for node in self.nodes if node.sb is not None},
        )
        evidence = hash_message(encode_dump(result.records)).hex()
        result.determinism_hash = digest_hex({"summary": result.summary(), "evidence": evidence})
        return result


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """
    Run a scenario end to end.

    :param config: The validated scenario.

    returns: The result; identical configurations give identical results.
    """
    logger.info("running scenario %s with seed %s", config.name, config.seed)
    result = Simulation(config).run()
    logger.info(
        "scenario %s finished: %s packets received, verdict %s",
        config.name, result.counters["packets.received"], result.verdict.outcome.value if result.verdict else "none",
    )
    return result


def count_duplicates(result: ScenarioResult) -> int:
    """Return the number of duplicate (timestamp, seqno) groups in the stored records."""
    return len(detect_replay(result.records))
