"""Deterministic AS-level simulation of FAIR channels and scripted adversaries."""
from .capacity import replay_capacity_gbps, seqno_reuse_onset
from .collateral import CollateralResult, PhaseResult, run_collateral_scenario
from .engine import ScenarioResult, Simulation, count_duplicates, default_prefix, run_scenario
from .loader import load_scenario, parse_scenario
from .models import (
    AdversaryBehavior,
    AsSpec,
    EvidenceSpec,
    PolicySpec,
    ProtestSpec,
    SbSpec,
    ScenarioConfig,
    Topology,
    TrafficSpec,
)

__all__ = [
    "AdversaryBehavior",
    "AsSpec",
    "CollateralResult",
    "EvidenceSpec",
    "PhaseResult",
    "PolicySpec",
    "ProtestSpec",
    "SbSpec",
    "ScenarioConfig",
    "ScenarioResult",
    "Simulation",
    "Topology",
    "TrafficSpec",
    "count_duplicates",
    "default_prefix",
    "load_scenario",
    "parse_scenario",
    "replay_capacity_gbps",
    "run_scenario",
    "seqno_reuse_onset",
]
