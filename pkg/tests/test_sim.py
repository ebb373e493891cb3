import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from features.protest import violated_seconds
from features.sim import (
    ScenarioConfig,
    count_duplicates,
    default_prefix,
    load_scenario,
    parse_scenario,
    run_collateral_scenario,
    run_scenario,
)
from features.sim.loader import locate
from features.wire import fair_length, framing_for
from lib.calculators import fib_bytes
from lib.constants import SEQNO_MOD
from lib.enums import Decision, Outcome
from lib.errors import ScenarioValidationError
from lib.utils import within_binomial

ROOT = Path(__file__).parents[1]
SCENARIOS = ROOT / "scenarios"


def scenario_data(name: str) -> dict:
    return json.loads((SCENARIOS / f"{name}.json").read_text())


def scenario(name: str) -> ScenarioConfig:
    return ScenarioConfig.model_validate(scenario_data(name))


@pytest.fixture(scope="module")
def results():
    """Run every shipped scenario once."""
    cache = {}

    def get(name: str):
        if name not in cache:
            cache[name] = run_scenario(scenario(name))
        return cache[name]

    return get


@pytest.mark.parametrize("name", ["benign", "benign_ipv4"])
def test_benign_channel_needs_no_protest(results, name):
    result = results(name)
    counters = result.counters
    assert result.verdict is None and result.bundle is None
    assert counters["packets.received"] == counters["packets.sent"] == counters["packets.accepted"] > 0
    assert counters["violations.live"] == 0
    assert all(counters[key] == 0 for key in counters if key.startswith("drops."))
    assert len(result.records) == counters["packets.received"]
    # the destination hands the packets on without their FAIR header
    stripped = sum(r.net.payload_len - fair_length(len(r.fair.slots), framing_for(r.net.version)) for r in result.records)
    assert counters["bytes.delivered"] == stripped > 0
    assert counters["fib.bytes"] == fib_bytes(1)
    assert result.summary()["verdict"]["outcome"] == "none"


def test_noncooperating_transit_forwards_everything(results):
    result = results("benign")
    assert set(result.forwarded.values()) == {result.counters["packets.sent"]}


def test_flooding_source_is_found_guilty(results):
    result = results("flood")
    assert result.counters["violations.live"] > 0
    assert result.verdict.outcome is Outcome.SOURCE_GUILTY
    assert result.verdict.admitting == [64501, 64502, 64503]
    assert all(response.mac_failures == 0 for response in result.responses)
    # the transit with suspicious-bit support learned the source
    assert result.summary()["sbit"] == {"64502": 1}


def test_colluding_transit_is_localized(results):
    result = results("collusion")
    verdict = result.verdict
    assert verdict.outcome is Outcome.ENROUTE_ADVERSARY
    assert verdict.interval == (64510, 64503)
    assert verdict.admitting == [64503, 64504]
    fractions = result.mac_failure_fraction()
    assert fractions[64501] > 0.8 and fractions[64502] > 0.8
    assert fractions[64503] == fractions[64504] == 0.0


def test_replaying_transit_is_localized(results):
    result = results("replay")
    assert result.counters["packets.replayed"] > 0
    assert count_duplicates(result) > 0
    assert result.verdict.outcome is Outcome.REPLAY_DETECTED
    assert result.verdict.interval == (64502, 64503)


def test_injection_points_upstream_of_the_admitting_suffix(results):
    result = results("injection")
    assert result.verdict.outcome is Outcome.ENROUTE_ADVERSARY
    assert result.verdict.interval == (64501, 64502)
    assert result.counters["drops.icv"] > 0

    injected = [record for record in result.bundle.records if record.fair.seqno >= SEQNO_MOD // 2]
    upstream = {response.asn: response for response in result.responses}[64501]
    assert upstream.decision is Decision.REJECT
    assert within_binomial(len(injected) - upstream.mac_failures, len(injected), 1 / 16)


def test_timestamp_shifting_source_is_found_guilty(results):
    result = results("timestamp_shift")
    assert result.verdict.outcome is Outcome.SOURCE_GUILTY
    assert result.bundle.window is not None
    assert all(response.tb_violations > 0 for response in result.responses)


def test_duplicated_evidence_is_suspected_framing(results):
    result = results("framing")
    assert result.counters["violations.live"] == 0
    assert result.verdict.outcome is Outcome.FRAMING_SUSPECTED
    assert result.verdict.interval == (64502, 64599)
    assert len(result.bundle.records) == 2 * len(result.records)


def test_identical_configurations_give_identical_results(results):
    config = scenario("collusion")
    again = run_scenario(config)
    assert again.determinism_hash == results("collusion").determinism_hash
    assert again.summary() == results("collusion").summary()


def test_seed_changes_the_run(results):
    other = run_scenario(scenario("benign").with_seed(99))
    assert other.determinism_hash != results("benign").determinism_hash


def replay_config(factor: int, rerandomize: bool) -> ScenarioConfig:
    data = scenario_data("replay")
    data["topology"]["ases"][2]["adversary"] = {"kind": "replay", "factor": factor, "rerandomize_own_nonce": rerandomize}
    return ScenarioConfig.model_validate(data)


@pytest.mark.parametrize(
    "factor, rerandomize, interval",
    [(5, False, (64502, 64503)), (2, True, (64501, 64502)), (5, True, (64501, 64502))],
)
def test_replay_variants(factor, rerandomize, interval):
    result = run_scenario(replay_config(factor, rerandomize))
    assert result.counters["packets.replayed"] == (factor - 1) * result.forwarded[64501]
    assert result.verdict.outcome is Outcome.REPLAY_DETECTED
    assert result.verdict.interval == interval


TRANSITS = [64501, 64502, 64503, 64504, 64505]


def line_config(name: str, seed: int, adversaries: dict, source: dict | None = None, offered_rate: float = 0.9, duration: float = 3) -> ScenarioConfig:
    """A source, five cooperating transits and a destination; `adversaries` maps a transit index to its behavior."""
    ases = [{"asn": 64500, "role": "source", **({"adversary": source} if source else {})}]
    for i, asn in enumerate(TRANSITS):
        spec = {"asn": asn, "role": "transit_coop"}
        if i in adversaries:
            spec["adversary"] = adversaries[i]
        ases.append(spec)
    ases.append({"asn": 64599, "role": "destination"})
    return ScenarioConfig.model_validate({
        "name": name,
        "seed": seed,
        "topology": {"ases": ases, "link_latency": 0.01},
        "policy": {"cir": 125000, "cbs": 125000, "duration": duration},
        "traffic": {"offered_rate": offered_rate},
    })


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("colluder_index", range(len(TRANSITS)))
def test_admitting_set_is_exactly_the_downstream_transits(colluder_index, seed):
    config = line_config(
        f"collusion_{colluder_index}", seed, {colluder_index: {"kind": "corrupt_upstream_macs"}},
        source={"kind": "flood", "rate_multiplier": 2.0},
    )
    verdict = run_scenario(config).verdict
    assert verdict.outcome is Outcome.ENROUTE_ADVERSARY
    assert verdict.admitting == TRANSITS[colluder_index + 1:]
    assert TRANSITS[colluder_index] in verdict.interval
    if colluder_index < len(TRANSITS) - 1:
        assert TRANSITS[-1] in verdict.admitting


@pytest.mark.parametrize("rerandomize", [False, True])
@pytest.mark.parametrize("factor", [2, 5])
@pytest.mark.parametrize("replayer_index", range(len(TRANSITS)))
def test_replayer_is_localized_at_every_position(replayer_index, factor, rerandomize):
    behavior = {"kind": "replay", "factor": factor, "rerandomize_own_nonce": rerandomize}
    result = run_scenario(line_config(f"replay_{replayer_index}", 11, {replayer_index: behavior}))
    assert count_duplicates(result) > 0
    assert result.verdict.outcome in (Outcome.REPLAY_DETECTED, Outcome.FRAMING_SUSPECTED)
    assert TRANSITS[replayer_index] in result.verdict.interval


def test_conforming_replay_raises_no_complaint():
    behavior = {"kind": "replay", "factor": 2}
    result = run_scenario(line_config("replay_conforming", 11, {2: behavior}, offered_rate=0.4))
    # twice 0.4 of CIR still conforms
    assert result.counters["packets.replayed"] > 0 and count_duplicates(result) > 0
    assert result.counters["violations.live"] == 0 and result.verdict is None


@pytest.mark.parametrize("seed", range(5))
def test_timestamp_shifting_evades_at_most_the_first_second(seed):
    config = scenario("timestamp_shift").with_seed(seed)
    result = run_scenario(config)
    relative = [second - config.start_time for second in violated_seconds(result.records, result.policy)]
    assert [second for second in relative if second >= 1] == list(range(1, int(config.policy.duration)))


@st.composite
def honest_scenarios(draw):
    hops = draw(st.integers(1, 10))
    roles = ["transit_coop"] * hops + ["transit_noncoop"] * draw(st.integers(0, 2))
    roles = [roles[0]] + draw(st.permutations(roles[1:]))
    offsets = st.floats(-0.5, 0.5, allow_nan=False)
    ases = [{"asn": 64500, "role": "source", "clock_offset": draw(offsets)}]
    ases += [{"asn": 64501 + i, "role": role, "clock_offset": draw(offsets)} for i, role in enumerate(roles)]
    ases.append({"asn": 64599, "role": "destination", "clock_offset": draw(offsets)})
    links = len(ases) - 1
    latencies = draw(st.lists(st.floats(0, 0.9 / links, allow_nan=False), min_size=links, max_size=links))
    version = draw(st.sampled_from([4, 6]))
    return ScenarioConfig.model_validate({
        "name": "honest",
        "seed": draw(st.integers(0, 2**16)),
        "topology": {"ases": ases, "link_latency": latencies},
        "policy": {"cir": 125000, "cbs": 125000, "duration": 2},
        "traffic": {
            "offered_rate": draw(st.floats(0.1, 0.95)),
            "packet_sizes": [[draw(st.integers(20, 1400)), 1.0]],
            "arrival": draw(st.sampled_from(["constant", "poisson"])),
            "ip_version": version,
        },
    })


@settings(max_examples=20, deadline=None)
@given(honest_scenarios())
def test_honest_paths_never_drop_or_complain(config):
    result = run_scenario(config)
    counters = result.counters
    assert counters["packets.received"] == counters["packets.sent"] == counters["packets.accepted"] > 0
    assert all(counters[key] == 0 for key in counters if key.startswith("drops."))
    assert counters["violations.live"] == 0 and result.verdict is None


def test_default_prefixes():
    assert default_prefix(3, 4) == "10.3.0.0/16"
    assert default_prefix(10, 6) == "2001:db8:a::/48"


@pytest.mark.slow
def test_long_benign_run():
    data = scenario_data("benign")
    data["policy"]["duration"] = 700
    result = run_scenario(ScenarioConfig.model_validate(data))
    assert result.counters["packets.received"] >= 100_000
    assert result.counters["violations.live"] == 0 and result.verdict is None


@pytest.mark.slow
def test_long_flood_run():
    data = scenario_data("flood")
    data["policy"]["duration"] = 200
    result = run_scenario(ScenarioConfig.model_validate(data))
    assert result.counters["packets.received"] >= 100_000
    assert result.verdict.outcome is Outcome.SOURCE_GUILTY


class TestLoader:
    def test_every_shipped_scenario_loads(self):
        for path in sorted(SCENARIOS.glob("*.json")):
            assert load_scenario(path).name == path.stem

    def test_lookup_by_name_in_the_scenario_directory(self, monkeypatch):
        monkeypatch.chdir(ROOT)
        assert load_scenario("flood", seed=42).seed == 42
        assert load_scenario("flood.json").seed == 3

    def test_missing_file(self, monkeypatch):
        monkeypatch.chdir(ROOT)
        with pytest.raises(ScenarioValidationError):
            load_scenario("does_not_exist")

    def test_syntax_errors_carry_line_and_column(self):
        with pytest.raises(ScenarioValidationError, match=r"bad\.json:3:\d+"):
            parse_scenario('{\n  "name": "x",\n  "seed": ,\n}', source="bad.json")

    def test_schema_errors_name_the_field(self):
        data = scenario_data("benign")
        del data["policy"]
        with pytest.raises(ScenarioValidationError, match="policy"):
            parse_scenario(json.dumps(data))

    def test_schema_errors_carry_the_line_of_the_value(self):
        text = '{\n  "name": "x",\n  "topology": {"ases": []},\n  "policy": {\n    "cir": -1,\n    "cbs": 1000,\n    "duration": 1\n  }\n}'
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(text, source="x.json")
        message = str(info.value)
        assert "x.json:5:12: policy.cir" in message
        assert "x.json:3:15: topology" in message

    def test_locate_walks_objects_and_arrays(self):
        text = '{"a": [1, {"b": 2}]}'
        assert locate(text, ("a", 1, "b")) == (1, 17)
        assert locate(text, ("a", 5)) == (1, 7)
        assert locate(text, ()) == (1, 1)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d["topology"]["ases"].reverse(),
            lambda d: d["topology"]["ases"][1].update(clock_offset=0.7),
            lambda d: d["topology"]["ases"][1].update(asn=64500),
            lambda d: d["topology"].update(link_latency=[0.5, 0.5, 0.1, 0.1, 0.1]),
            lambda d: d["topology"].update(link_latency=[0.01]),
            lambda d: d["topology"]["ases"][1].update(adversary={"kind": "flood"}),
            lambda d: d["policy"].update(cbs=500),
            lambda d: d.update(framing="raw"),
            lambda d: d.update(sbit={"64502": {"action_policy": "drop"}}),
            lambda d: d["traffic"].update(packet_sizes=[]),
        ],
    )
    def test_inconsistent_scenarios_are_rejected(self, mutate):
        data = scenario_data("benign")
        mutate(data)
        with pytest.raises(ScenarioValidationError):
            parse_scenario(json.dumps(data))

    def test_config_hash_tracks_the_content(self):
        config = scenario("benign")
        assert config.config_hash == scenario("benign").config_hash
        assert config.with_seed(5).config_hash != config.config_hash


def test_flagging_upstream_spares_benign_traffic():
    result = run_collateral_scenario(packets=5_000, seed=3)
    blind, flagging = result.phases
    assert blind.benign_flagged_fraction > 0.99 and flagging.benign_flagged_fraction < 0.01
    assert blind.guilty_flagged_fraction == flagging.guilty_flagged_fraction == 1.0
    assert result.reduction > 0.98


@pytest.mark.parametrize("seed", range(5))
def test_downstream_port_clears_within_one_packet(seed):
    blind, flagging = run_collateral_scenario(packets=2_000, seed=seed).phases
    assert blind.packets_to_clear is None
    assert flagging.packets_to_clear == 1
    assert flagging.benign_flagged_after_clear == 0
