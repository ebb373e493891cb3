"""Per-packet marking at source, transit and destination border routers."""
from .fib import Fib, FibEntry, to_network
from .lcg import Lcg
from .procedures import (
    ForwardResult,
    ReceiveResult,
    clock_check,
    dest_receive,
    encapsulate,
    icv_for,
    slot_mac_for,
    source_send,
    strip_fair,
    transit_forward,
)
from .store import HeaderStore

__all__ = [
    "Fib",
    "FibEntry",
    "ForwardResult",
    "HeaderStore",
    "Lcg",
    "ReceiveResult",
    "clock_check",
    "dest_receive",
    "encapsulate",
    "icv_for",
    "slot_mac_for",
    "source_send",
    "strip_fair",
    "to_network",
    "transit_forward",
]
