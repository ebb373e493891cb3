"""Protest phase: evidence, complaint examination, replay localization and adjudication."""
from .adjudicate import adjudicate
from .evidence import assemble_evidence, count_violations, police_records, violated_seconds
from .examine import examine_complaint, own_mac_valid, verify_response
from .models import ComplaintResponse, EvidenceBundle, Verdict, record_sort_key, record_time
from .replay import dedupe_records, detect_replay, localize, localize_adversary, repeated_prefix

__all__ = [
    "ComplaintResponse",
    "EvidenceBundle",
    "Verdict",
    "adjudicate",
    "assemble_evidence",
    "count_violations",
    "dedupe_records",
    "detect_replay",
    "examine_complaint",
    "localize",
    "localize_adversary",
    "own_mac_valid",
    "police_records",
    "record_sort_key",
    "record_time",
    "repeated_prefix",
    "verify_response",
    "violated_seconds",
]
