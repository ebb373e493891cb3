# Source: Pydantic. (n.d.). Documentation for version: v2.9. https://docs.pydantic.dev/latest
"""
Closed-form bandwidth and storage overhead of FAIR.

Backbone links are modeled by summary statistics: rate, mean packet size and share per IP
version. IPv4 packets carry the raw shim (7 + n bytes), IPv6 packets the extension header
(9 + n bytes), n being the number of cooperating hops.
"""
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from features.wire import fair_length
from lib.constants import FIB_ENTRY_SIZE_V6, IPV4_HEADER_LEN, IPV6_HEADER_LEN, KEY_LEN
from lib.enums import Framing, Weighting

DEFAULT_HOPS = 5

# Reference values quoted for the three traces, the key table and per-minute key rotation
REFERENCE_STORAGE_GB = {1: 30.2, 2: 56.0, 3: 67.3}
REFERENCE_OVERHEAD = {1: 0.0171, 2: 0.0139, 3: 0.0174}
REFERENCE_KEY_TABLE_BYTES = 800_000
REFERENCE_ROTATION_BYTES = 250_000
OVERHEAD_BOUND = 0.02


class TraceModel(BaseModel):
    """One-hour backbone trace summarized per IP version."""
    rate: float = Field(gt=0, description="Gbps")
    mean_pkt_v4: float = Field(gt=0, description="Bytes")
    share_v4: float = Field(ge=0, le=1)
    mean_pkt_v6: float = Field(gt=0, description="Bytes")
    share_v6: float = Field(ge=0, le=1)
    duration: float = Field(default=3600.0, gt=0, description="Seconds")
    path_hops: int = Field(default=DEFAULT_HOPS, ge=0, le=127)

    @model_validator(mode="after")
    def check_shares(self):
        if abs(self.share_v4 + self.share_v6 - 1) > 1e-9:
            raise ValueError("IPv4 and IPv6 shares must sum to 1.")
        return self

    @property
    def mean_pkt(self) -> float:
        """Return the mean packet size over both versions."""
        return self.share_v4 * self.mean_pkt_v4 + self.share_v6 * self.mean_pkt_v6

    @property
    def packets(self) -> float:
        """Return the number of packets over the trace duration."""
        return self.rate * 1e9 / 8 / self.mean_pkt * self.duration


TRACES = {
    1: TraceModel(rate=1.63, mean_pkt_v4=747, share_v4=0.9995, mean_pkt_v6=130, share_v6=0.0005),
    2: TraceModel(rate=3.72, mean_pkt_v4=920, share_v4=0.9996, mean_pkt_v6=342, share_v6=0.0004),
    3: TraceModel(rate=3.57, mean_pkt_v4=736, share_v4=0.9988, mean_pkt_v6=155, share_v6=0.0012),
}


class OverheadResult(BaseModel):
    fair_bytes_v4: int
    fair_bytes_v6: int
    overhead_v4: float
    overhead_v6: float
    total: float
    weighting: Weighting

    @property
    def within_bound(self) -> bool:
        return self.total <= OVERHEAD_BOUND


def fair_bytes(hops: int, version: int) -> int:
    """Return the FAIR header size on a path with the given number of cooperating hops."""
    return fair_length(hops, Framing.RAW if version == 4 else Framing.IPV6_EH)


def bandwidth_overhead(trace: TraceModel, weighting: Weighting = Weighting.BYTE) -> OverheadResult:
    """
    Return the bandwidth overhead of a trace.

    With byte weighting the shares are read as shares of the traffic volume and the
    per-version overheads are averaged with them. With packet weighting the shares are
    packet counts and the total is added bytes over original bytes.
    """
    added_v4, added_v6 = fair_bytes(trace.path_hops, 4), fair_bytes(trace.path_hops, 6)
    overhead_v4, overhead_v6 = added_v4 / trace.mean_pkt_v4, added_v6 / trace.mean_pkt_v6
    if weighting is Weighting.BYTE:
        total = trace.share_v4 * overhead_v4 + trace.share_v6 * overhead_v6
    else:
        total = (trace.share_v4 * added_v4 + trace.share_v6 * added_v6) / trace.mean_pkt
    return OverheadResult(
        fair_bytes_v4=added_v4,
        fair_bytes_v6=added_v6,
        overhead_v4=overhead_v4,
        overhead_v6=overhead_v6,
        total=total,
        weighting=weighting,
    )


def header_storage_bytes(trace: TraceModel) -> float:
    """Return the bytes a destination stores for the headers (network plus FAIR) of a trace."""
    per_packet = (
        trace.share_v4 * (IPV4_HEADER_LEN + fair_bytes(trace.path_hops, 4))
        + trace.share_v6 * (IPV6_HEADER_LEN + fair_bytes(trace.path_hops, 6))
    )
    return trace.packets * per_packet


def channel_key_bytes(channels: int) -> int:
    """Return the storage of one K_SD per channel."""
    return channels * KEY_LEN


def fib_bytes(channels: int) -> int:
    """Return the size of the extended IPv6 FIB holding one entry per channel."""
    return channels * FIB_ENTRY_SIZE_V6


def key_rotation_bytes(rotation_seconds: float, keys: int = 2, hours: float = 12.0) -> int:
    """Return the storage of the local keys retained over the protest margin."""
    epochs = int(hours * 3600 // rotation_seconds)
    return epochs * keys * KEY_LEN


class StorageReport(BaseModel):
    """Derived storage figures next to the quoted ones."""
    header_bytes: dict[int, float] = {}
    channel_key_bytes: int
    key_rotation_bytes: int
    reference_rotation_bytes: int = REFERENCE_ROTATION_BYTES

    @property
    def rotation_discrepancy(self) -> bool:
        return self.key_rotation_bytes != self.reference_rotation_bytes


def storage_report(traces: dict[int, TraceModel] | None = None, channels: int = 50_000, rotation_seconds: float = 60, keys: int = 2, hours: float = 12.0) -> StorageReport:
    traces = TRACES if traces is None else traces
    return StorageReport(
        header_bytes={key: header_storage_bytes(trace) for key, trace in traces.items()},
        channel_key_bytes=channel_key_bytes(channels),
        key_rotation_bytes=key_rotation_bytes(rotation_seconds, keys, hours),
    )


def overhead_table(weighting: Weighting = Weighting.BYTE, hops: int = DEFAULT_HOPS) -> pd.DataFrame:
    """Return the overhead of the three reference traces, one row per trace."""
    rows = []
    for key, trace in TRACES.items():
        result = bandwidth_overhead(trace.model_copy(update={"path_hops": hops}), weighting)
        rows.append({
            "trace": key,
            "rate_gbps": trace.rate,
            "overhead_v4": result.overhead_v4,
            "overhead_v6": result.overhead_v6,
            "total": result.total,
            "quoted": REFERENCE_OVERHEAD[key],
            "within_bound": result.within_bound,
        })
    return pd.DataFrame(rows).set_index("trace")


def storage_table(hops: int = DEFAULT_HOPS) -> pd.DataFrame:
    """Return derived and quoted destination storage per reference trace."""
    rows = []
    for key, trace in TRACES.items():
        derived = header_storage_bytes(trace.model_copy(update={"path_hops": hops})) / 1e9
        quoted = REFERENCE_STORAGE_GB[key]
        rows.append({"trace": key, "derived_gb": derived, "quoted_gb": quoted, "deviation": derived / quoted - 1})
    return pd.DataFrame(rows).set_index("trace")
