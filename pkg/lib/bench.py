"""
Desk-scale microbenchmark of the transit marking pipeline.

Baseline forwarding decodes the network header, looks up the FIB and re-encodes the packet.
FAIR forwarding additionally decodes the FAIR header, checks the timestamp, draws a nonce,
computes the slot MAC and re-encodes the FAIR header. Workers run in separate processes on
their own pre-generated buffers and state.
"""
import logging
import time
from multiprocessing import Pool

import numpy as np
from pydantic import BaseModel

from features.crypto import SymKey
from features.dataplane import Fib, Lcg, encapsulate, transit_forward
from features.wire import AsSlot, FairHeader, NetHeader, decode_fair, decode_net, encode_fair, encode_net, fair_length, to_address
from lib.constants import IPV6_HEADER_LEN, KEY_LEN, UDP_PROTOCOL
from lib.enums import Framing
from lib.utils import low16, mean_and_std

logger = logging.getLogger(__name__)

# Smallest IPv6 packet carrying a FAIR header in the benchmark
MIN_PACKET = 68
BENCH_TIME = 1_700_000_000.0
DEST_PREFIX = "2001:db8:2::/48"

# Desk-scale targets: FAIR forwarding at most 5% slower than baseline, 1.7x from one to two workers
OVERHEAD_BOUND = 0.05
SCALING_BOUND = 1.7


class BenchResult(BaseModel):
    packets: int
    hops: int
    workers: int
    pkt_size: int
    repeats: int
    baseline_pps: float
    baseline_std: float
    fair_pps: float
    fair_std: float

    @property
    def overhead(self) -> float:
        """Return the relative throughput loss of FAIR forwarding."""
        return 1 - self.fair_pps / self.baseline_pps

    @property
    def within_overhead_bound(self) -> bool:
        return self.overhead <= OVERHEAD_BOUND

    def scaling_over(self, single: "BenchResult") -> float:
        """Return the FAIR throughput gain over a single-worker run."""
        return self.fair_pps / single.fair_pps


def build_packets(count: int, hops: int, pkt_size: int = MIN_PACKET, seed: int = 0) -> list[bytes]:
    """Return encoded IPv6 packets carrying a FAIR extension header with `hops` slots."""
    rng = np.random.default_rng(seed)
    payload_len = max(pkt_size - IPV6_HEADER_LEN - fair_length(hops, Framing.IPV6_EH), 0)
    sources = rng.integers(1, 0xFFFF, size=count)
    icvs = rng.integers(0, 256, size=count)
    packets = []
    for i in range(count):
        inner = NetHeader(
            version=6,
            src_addr=to_address(f"2001:db8:1::{int(sources[i]):x}"),
            dst_addr=to_address("2001:db8:2::1"),
            payload_len=payload_len,
            next_header=UDP_PROTOCOL,
        )
        fair = FairHeader(
            src_timestamp=low16(BENCH_TIME),
            seqno=i % (1 << 24),
            icv=int(icvs[i]),
            slots=[AsSlot() for _ in range(hops)],
        )
        packets.append(encode_net(encapsulate(inner, hops)) + encode_fair(fair, Framing.IPV6_EH) + bytes(payload_len))
    return packets


def _fib() -> Fib:
    fib = Fib()
    fib.add(DEST_PREFIX, port=1, k_sd=SymKey(bytes(KEY_LEN)))
    return fib


def forward_baseline(packets: list[bytes], fib: Fib) -> list[bytes]:
    out = []
    for buf in packets:
        net = decode_net(buf)
        fib.lookup(net.dst_addr)
        out.append(encode_net(net) + buf[IPV6_HEADER_LEN:])
    return out


def forward_fair(packets: list[bytes], fib: Fib, key: SymKey, nonces: Lcg, now: float = BENCH_TIME) -> list[bytes]:
    out = []
    for buf in packets:
        net = decode_net(buf)
        fib.lookup(net.dst_addr)
        rest = buf[IPV6_HEADER_LEN:]
        fair = decode_fair(rest, Framing.IPV6_EH)
        result = transit_forward(key, nonces, net, fair, now)
        if result.dropped:
            continue
        size = fair_length(len(fair.slots), Framing.IPV6_EH)
        out.append(encode_net(net) + encode_fair(result.fair, Framing.IPV6_EH) + rest[size:])
    return out


def _worker(args: tuple[int, int, int, int]) -> tuple[float, float]:
    """Time both pipelines on one worker's packets; return (baseline, fair) packets per second."""
    count, hops, pkt_size, seed = args
    packets = build_packets(count, hops, pkt_size, seed)
    fib = _fib()
    key = SymKey(bytes(range(KEY_LEN)))
    nonces = Lcg(seed)

    start = time.perf_counter()
    forward_baseline(packets, fib)
    baseline = time.perf_counter() - start

    start = time.perf_counter()
    forward_fair(packets, fib, key, nonces)
    fair = time.perf_counter() - start
    return count / baseline, count / fair


def run_bench(packets: int = 100_000, hops: int = 5, workers: int = 1, pkt_size: int = MIN_PACKET, repeats: int = 3) -> BenchResult:
    """
    Measure baseline and FAIR forwarding throughput.

    :param packets: Packets per worker.
    :param hops: Slots in the FAIR header (the packet is marked at the first one).
    :param workers: Processes running in parallel; throughput is summed over them.
    :param pkt_size: Packet size in bytes.
    :param repeats: Measurements whose mean and standard deviation are reported.

    returns: The measured rates.
    """
    if hops < 1:
        raise ValueError("At least one cooperating hop is needed to mark packets.")
    baseline, fair = [], []
    for repeat in range(repeats):
        jobs = [(packets, hops, pkt_size, repeat * workers + worker) for worker in range(workers)]
        if workers == 1:
            rates = [_worker(jobs[0])]
        else:
            with Pool(workers) as pool:
                rates = pool.map(_worker, jobs)
        baseline.append(sum(rate[0] for rate in rates))
        fair.append(sum(rate[1] for rate in rates))
        logger.info("repeat %s: baseline %.0f pps, FAIR %.0f pps", repeat, baseline[-1], fair[-1])
    baseline_mean, baseline_std = mean_and_std(baseline)
    fair_mean, fair_std = mean_and_std(fair)
    return BenchResult(
        packets=packets,
        hops=hops,
        workers=workers,
        pkt_size=pkt_size,
        repeats=repeats,
        baseline_pps=baseline_mean,
        baseline_std=baseline_std,
        fair_pps=fair_mean,
        fair_std=fair_std,
    )
