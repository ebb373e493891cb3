# Source: Pydantic. (n.d.). Documentation for version: v2.9. https://docs.pydantic.dev/latest
"""
Scenario configuration.

A scenario is a line topology (source, transits, destination), a sending policy, a traffic
model and the scripted adversaries. The seed fully determines a run.
"""
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from features.wire import fair_length
from lib.constants import IPV6_HEADER_LEN
from lib.enums import AdversaryKind, Framing, Role, SbAction
from lib.utils import digest_hex

U32 = (1 << 32) - 1

# Clock and latency bounds the clock check is dimensioned for
MAX_CLOCK_OFFSET = 0.5
MAX_PATH_LATENCY = 1.0

ROLE_BEHAVIORS = {
    Role.SOURCE: {AdversaryKind.FLOOD, AdversaryKind.TIMESTAMP_SHIFT},
    Role.TRANSIT_COOP: {AdversaryKind.CORRUPT_UPSTREAM_MACS, AdversaryKind.REPLAY, AdversaryKind.INJECT},
    Role.TRANSIT_NONCOOP: set(),
    Role.DESTINATION: {AdversaryKind.FRAME_DUPLICATE_EVIDENCE},
}


class AdversaryBehavior(BaseModel):
    """
    A scripted misbehavior.

    Rates are expressed in multiples of the policy's CIR. The activation window is given in
    seconds since the channel start; `end` None means until the end of the run.
    """
    model_config = ConfigDict(frozen=True)

    kind: AdversaryKind
    rate_multiplier: float = Field(default=2.0, gt=0)
    factor: int = Field(default=2, ge=2)
    rerandomize_own_nonce: bool = False
    rate: float = Field(default=1.0, gt=0)
    copies: int = Field(default=2, ge=2)
    start: float = Field(default=0.0, ge=0)
    end: Optional[float] = None

    @model_validator(mode="after")
    def check_window(self):
        if self.end is not None and self.end <= self.start:
            raise ValueError("The activation window must end after it starts.")
        return self

    def active(self, t: float) -> bool:
        """Return True if the behavior is active at t seconds after the channel start."""
        return t >= self.start and (self.end is None or t < self.end)


class AsSpec(BaseModel):
    """One AS on the path."""
    model_config = ConfigDict(frozen=True)

    asn: int = Field(ge=0, le=U32)
    role: Role
    clock_offset: float = 0.0
    adversary: Optional[AdversaryBehavior] = None
    prefix: Optional[str] = None

    @field_validator("clock_offset")
    @classmethod
    def check_offset(cls, value: float) -> float:
        if abs(value) > MAX_CLOCK_OFFSET:
            raise ValueError(f"Clock offsets must stay within ±{MAX_CLOCK_OFFSET} s.")
        return value

    @model_validator(mode="after")
    def check_role(self):
        if self.adversary is not None and self.adversary.kind not in ROLE_BEHAVIORS[self.role]:
            raise ValueError(f"A {self.role.value} AS cannot carry the {self.adversary.kind.value} behavior.")
        return self


class Topology(BaseModel):
    """An ordered line of ASes with per-link latencies."""
    model_config = ConfigDict(frozen=True)

    ases: List[AsSpec] = Field(min_length=2)
    link_latency: Union[float, List[float]] = 0.01

    @model_validator(mode="after")
    def check_line(self):
        roles = [spec.role for spec in self.ases]
        if roles[0] is not Role.SOURCE or roles.count(Role.SOURCE) != 1:
            raise ValueError("Exactly one source AS is required and it must come first.")
        if roles[-1] is not Role.DESTINATION or roles.count(Role.DESTINATION) != 1:
            raise ValueError("Exactly one destination AS is required and it must come last.")
        asns = [spec.asn for spec in self.ases]
        if len(set(asns)) != len(asns):
            raise ValueError("AS numbers must be unique.")
        latencies = self.latencies()
        if len(latencies) != len(self.ases) - 1:
            raise ValueError(f"Expected {len(self.ases) - 1} link latencies, got {len(latencies)}.")
        if any(latency < 0 for latency in latencies):
            raise ValueError("Link latencies must not be negative.")
        if sum(latencies) > MAX_PATH_LATENCY:
            raise ValueError(f"End-to-end latency exceeds {MAX_PATH_LATENCY} s.")
        if len(self.coop_path) > 127:
            raise ValueError("At most 127 cooperating transits fit into the FAIR header.")
        return self

    def latencies(self) -> list[float]:
        """Return one latency per link."""
        if isinstance(self.link_latency, list):
            return list(self.link_latency)
        return [float(self.link_latency)] * (len(self.ases) - 1)

    @property
    def source(self) -> AsSpec:
        return self.ases[0]

    @property
    def destination(self) -> AsSpec:
        return self.ases[-1]

    @property
    def coop_path(self) -> list[int]:
        """Return the cooperating transits in path order."""
        return [spec.asn for spec in self.ases if spec.role is Role.TRANSIT_COOP]


class PolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    cir: float = Field(gt=0, description="Bytes per second")
    cbs: float = Field(gt=0, description="Bytes")
    duration: float = Field(gt=0, description="Seconds of traffic")


class TrafficSpec(BaseModel):
    """The source's offered load, a fraction of CIR in policed bytes."""
    model_config = ConfigDict(frozen=True)

    offered_rate: float = Field(default=0.9, gt=0)
    packet_sizes: List[Tuple[int, float]] = [(413, 1.0)]
    arrival: Literal["constant", "poisson"] = "constant"
    ip_version: Literal[4, 6] = 6

    @field_validator("packet_sizes")
    @classmethod
    def check_sizes(cls, value):
        if not value:
            raise ValueError("At least one packet size is required.")
        for size, weight in value:
            if not 0 < size <= 65000 or weight <= 0:
                raise ValueError("Packet sizes must lie in (0, 65000] bytes with positive weights.")
        return value


class EvidenceSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    window: Union[Literal["full", "violations"], Tuple[int, int]] = "full"


class ProtestSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    tamper_threshold: Optional[float] = Field(default=None, ge=0, le=1)
    slack: float = Field(default=0.0, ge=0)


class SbSpec(BaseModel):
    """Suspicious-bit configuration of a cooperating transit."""
    model_config = ConfigDict(frozen=True)

    action_policy: SbAction = SbAction.FORWARD
    sus_sources: List[int] = []
    delay: float = Field(default=0.001, ge=0)


class ScenarioConfig(BaseModel):
    """A complete, validated scenario."""
    model_config = ConfigDict(frozen=True)

    name: str
    seed: int = Field(default=0, ge=0)
    start_time: int = Field(default=1_700_000_000, ge=0)
    framing: Optional[Framing] = None
    topology: Topology
    policy: PolicySpec
    traffic: TrafficSpec = TrafficSpec()
    evidence: EvidenceSpec = EvidenceSpec()
    key_rotation: Optional[float] = Field(default=None, gt=0)
    protest: ProtestSpec = ProtestSpec()
    sbit: Dict[int, SbSpec] = {}

    @model_validator(mode="after")
    def check_consistency(self):
        if self.framing is not None:
            if self.traffic.ip_version == 4 and self.framing is not Framing.RAW:
                raise ValueError("IPv4 traffic carries the FAIR header in raw framing.")
            if self.traffic.ip_version == 6 and self.framing is Framing.RAW:
                raise ValueError("IPv6 traffic carries the FAIR header as an extension header.")
        coop = set(self.topology.coop_path)
        for asn in self.sbit:
            if asn not in coop:
                raise ValueError(f"Suspicious-bit settings for AS{asn}, which is not a cooperating transit.")
        # The shaper can never release a packet larger than the burst size
        largest = max(size for size, _ in self.traffic.packet_sizes) + IPV6_HEADER_LEN + fair_length(len(coop), Framing.IPV6_EH_STRICT)
        if largest > self.policy.cbs:
            raise ValueError(f"CBS of {self.policy.cbs} bytes is smaller than the largest packet ({largest} bytes).")
        return self

    @property
    def config_hash(self) -> str:
        return digest_hex(self.model_dump(mode="json"))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return self.model_copy(update={"seed": seed})

    def adversary_of(self, kind: AdversaryKind) -> list[tuple[int, AsSpec]]:
        """Return (position, AS) pairs carrying a behavior of the given kind."""
        return [(i, spec) for i, spec in enumerate(self.topology.ases) if spec.adversary is not None and spec.adversary.kind is kind]
