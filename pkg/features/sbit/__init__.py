"""Suspicious-bit forwarding for traffic of sources with acknowledged violations."""
from .sbit import SbDecision, SbState, ingest_verdict, sb_forward

__all__ = [
    "SbDecision",
    "SbState",
    "ingest_verdict",
    "sb_forward",
]
