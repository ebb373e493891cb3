"""
Command-line front end.

    python cli.py run scenarios/collusion.json --seed 7 --out out/collusion
    python cli.py overhead --trace 1
    python cli.py storage --channels 50000 --rotation-seconds 60
    python cli.py bench --packets 100000 --hops 5 --workers 2
    python cli.py inspect out/collusion/evidence.fairdump

Exit codes: 0 success, 1 invalid input, 2 runtime error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from features.protest import detect_replay
from features.sim import load_scenario, replay_capacity_gbps, run_scenario
from features.wire import from_address, read_dump, write_dump
from lib.bench import MIN_PACKET, OVERHEAD_BOUND, SCALING_BOUND, run_bench
from lib.calculators import (
    DEFAULT_HOPS,
    REFERENCE_KEY_TABLE_BYTES,
    REFERENCE_STORAGE_GB,
    TRACES,
    TraceModel,
    bandwidth_overhead,
    fib_bytes,
    header_storage_bytes,
    overhead_table,
    storage_report,
    storage_table,
)
from lib.config import get_settings
from lib.enums import Weighting
from lib.errors import FairError, ScenarioValidationError, WireFormatError
from lib.log import configure_logging, verbosity_to_level
from lib.report import render_json, render_text, write_report

logger = logging.getLogger("fair.cli")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def cmd_run(args) -> int:
    config = load_scenario(args.scenario, seed=args.seed)
    result = run_scenario(config)
    out_dir = Path(args.out) if args.out else Path("out") / config.name
    report = result.summary()
    write_report(report, out_dir)
    write_dump(out_dir / "evidence.fairdump", result.bundle.records if result.bundle else result.records)
    print(render_json(report) if args.json else render_text(report), end="")
    return EXIT_OK


def _trace_from_args(args) -> TraceModel:
    if args.trace is not None:
        trace = TRACES[args.trace]
        return trace if args.hops is None else trace.model_copy(update={"path_hops": args.hops})
    if args.rate is None or args.v4_size is None:
        raise ScenarioValidationError("Either --trace or --rate and --v4-size are required.")
    fields = {
        "rate": args.rate,
        "mean_pkt_v4": args.v4_size,
        "share_v4": args.v4_share,
        "mean_pkt_v6": args.v6_size,
        "share_v6": round(1 - args.v4_share, 12),
        "duration": args.duration,
    }
    if args.hops is not None:
        fields["path_hops"] = args.hops
    return TraceModel(**fields)


def _print_table(table: pd.DataFrame):
    with pd.option_context("display.width", 200, "display.float_format", "{:.6f}".format):
        print(table.to_string())


def cmd_overhead(args) -> int:
    weighting = Weighting(args.weighting)
    if args.all:
        _print_table(overhead_table(weighting, DEFAULT_HOPS if args.hops is None else args.hops))
        return EXIT_OK
    trace = _trace_from_args(args)
    result = bandwidth_overhead(trace, weighting)
    report = {
        "fair_bytes": {"v4": result.fair_bytes_v4, "v6": result.fair_bytes_v6},
        "overhead": {"v4": result.overhead_v4, "v6": result.overhead_v6, "total": result.total},
        "weighting": weighting.value,
        "within_bound": result.within_bound,
    }
    print(render_text(report), end="")
    return EXIT_OK


def cmd_storage(args) -> int:
    if args.all:
        _print_table(storage_table(DEFAULT_HOPS if args.hops is None else args.hops))
    report = {}
    if args.trace is not None or args.rate is not None:
        trace = _trace_from_args(args)
        report["header_storage_gb"] = header_storage_bytes(trace) / 1e9
        if args.trace is not None:
            report["header_storage_quoted_gb"] = REFERENCE_STORAGE_GB[args.trace]
    storage = storage_report({}, args.channels, args.rotation_seconds, args.keys, args.hours)
    report["channel_keys"] = {
        "bytes": storage.channel_key_bytes,
        "quoted_bytes_50000": REFERENCE_KEY_TABLE_BYTES,
    }
    report["fib"] = {"bytes": fib_bytes(args.channels)}
    report["key_rotation"] = {
        "bytes": storage.key_rotation_bytes,
        "quoted_bytes": storage.reference_rotation_bytes,
        "discrepancy": storage.rotation_discrepancy,
    }
    report["replay_capacity_gbps"] = {
        "binary": replay_capacity_gbps(args.mean_pkt),
        "decimal": replay_capacity_gbps(args.mean_pkt, decimal=True),
    }
    print(render_text(report), end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    result = run_bench(args.packets, args.hops, args.workers, args.pkt_size, args.repeats)
    report = result.model_dump()
    report["overhead"] = result.overhead
    report["overhead_bound"] = {"limit": OVERHEAD_BOUND, "pass": result.within_overhead_bound}
    if args.workers > 1:
        single = run_bench(args.packets, args.hops, 1, args.pkt_size, args.repeats)
        report["scaling"] = result.scaling_over(single)
        report["scaling_bound"] = {"limit": SCALING_BOUND, "pass": report["scaling"] >= SCALING_BOUND}
    print(render_text(report), end="")
    return EXIT_OK


def records_table(records) -> pd.DataFrame:
    """Return one row per stored record."""
    rows = [
        {
            "arrival": record.arrival_time,
            "src": str(from_address(record.net.src_addr)),
            "dst": str(from_address(record.net.dst_addr)),
            "payload_len": record.net.payload_len,
            "timestamp": record.fair.src_timestamp,
            "seqno": record.fair.seqno,
            "icv": f"{record.fair.icv:02x}",
            "as_index": record.fair.as_index,
            "sbit": int(record.fair.suspicious_bit),
            "slots": "".join(f"{slot.to_byte():02x}" for slot in record.fair.slots),
        }
        for record in records
    ]
    columns = ["arrival", "src", "dst", "payload_len", "timestamp", "seqno", "icv", "as_index", "sbit", "slots"]
    return pd.DataFrame(rows, columns=columns)


def cmd_inspect(args) -> int:
    records = read_dump(args.dump)
    with pd.option_context("display.max_rows", None, "display.width", 200):
        print(records_table(records).to_string(index=False))
    groups = detect_replay(records)
    print(f"duplicate_groups: {len(groups)}")
    for group in groups:
        timestamp, seqno = group[0].replay_key
        print(f"  timestamp={timestamp} seqno={seqno} copies={len(group)}")
    return EXIT_OK


def _add_trace_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--trace", type=int, choices=sorted(TRACES), help="Reference trace preset")
    parser.add_argument("--rate", type=float, help="Trace rate in Gbps")
    parser.add_argument("--v4-size", type=float, help="Mean IPv4 packet size in bytes")
    parser.add_argument("--v4-share", type=float, default=1.0, help="Share of IPv4 traffic")
    parser.add_argument(
        "--v6-size", type=float, default=TRACES[1].mean_pkt_v6,
        help=f"Mean IPv6 packet size in bytes (default {TRACES[1].mean_pkt_v6:g}, as in trace 1)",
    )
    parser.add_argument("--duration", type=float, default=3600.0, help="Trace duration in seconds")
    parser.add_argument("--hops", type=int, help="Cooperating hops on the path")
    parser.add_argument("--all", action="store_true", help="Print the table of all reference traces")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fair", description="FAIR forwarding accountability: simulator and calculators")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario and write its report")
    run.add_argument("scenario", help="Scenario file or name")
    run.add_argument("--seed", type=int, help="Override the scenario seed")
    run.add_argument("--out", help="Output directory (default out/<scenario name>)")
    run.add_argument("--json", action="store_true", help="Print the JSON report")
    run.set_defaults(handler=cmd_run)

    overhead = commands.add_parser("overhead", help="Bandwidth overhead of a trace")
    _add_trace_arguments(overhead)
    overhead.add_argument("--weighting", choices=[w.value for w in Weighting], default=Weighting.BYTE.value)
    overhead.set_defaults(handler=cmd_overhead)

    storage = commands.add_parser("storage", help="Storage overhead")
    _add_trace_arguments(storage)
    storage.add_argument("--channels", type=int, default=50_000, help="Channels with a stored K_SD")
    storage.add_argument("--rotation-seconds", type=float, default=60.0, help="Local key epoch length")
    storage.add_argument("--keys", type=int, default=2, help="Keys per epoch")
    storage.add_argument("--hours", type=float, default=get_settings().protest_margin_hours, help="Retention in hours")
    storage.add_argument("--mean-pkt", type=float, default=413.0, help="Mean packet size for the replay capacity")
    storage.set_defaults(handler=cmd_storage)

    bench = commands.add_parser("bench", help="Marking pipeline microbenchmark")
    bench.add_argument("--packets", type=int, default=100_000)
    bench.add_argument("--hops", type=int, default=5)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--pkt-size", type=int, default=MIN_PACKET)
    bench.add_argument("--repeats", type=int, default=3)
    bench.set_defaults(handler=cmd_bench)

    inspect = commands.add_parser("inspect", help="Decode a FAIRDUMP evidence file")
    inspect.add_argument("dump", help="FAIRDUMP file")
    inspect.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(verbosity_to_level(args.verbose, get_settings().log_level))
    try:
        return args.handler(args)
    except (ScenarioValidationError, WireFormatError, ValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FairError as exc:
        logger.error("run failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
