"""Scenario documents: unit-suffixed quantities, validation, round-trips."""

import re

import pytest
import yaml

from loraguard.scenario import (
    Scenario,
    ScenarioError,
    StopSpec,
    load_scenario,
    parse_duration,
    parse_frequency,
    parse_scenario,
    save_scenario,
    scenario_digest,
    scenario_to_dict,
    shipped_scenario_path,
)

SHIPPED = [
    "test1_sf_pairs",
    "test2_dl_priority",
    "test3_dual_gw",
    "calibration_pairs_sf7",
    "calibration_pairs_sf7_sf8",
    "demo_small",
    "burst_cluster15",
]


class TestQuantityParsing:
    @pytest.mark.parametrize("text,expected", [
        ("10 us", 10),
        ("50 ms", 50_000),
        ("70 s", 70_000_000),
        ("0.5 s", 500_000),
        ("2 min", 120_000_000),
        ("1 h", 3_600_000_000),
        ("70s", 70_000_000),
    ])
    def test_durations(self, text, expected):
        assert parse_duration(text) == expected

    @pytest.mark.parametrize("text,expected", [
        ("867.1 MHz", 867_100_000),
        ("868 mhz", 868_000_000),
        ("869525 kHz", 869_525_000),
        ("1 GHz", 1_000_000_000),
        ("125000 Hz", 125_000),
    ])
    def test_frequencies(self, text, expected):
        assert parse_frequency(text) == expected

    def test_bare_numbers_are_rejected_with_the_field_path(self):
        with pytest.raises(ScenarioError, match="stop.duration"):
            parse_duration(70, "stop.duration")
        with pytest.raises(ScenarioError, match="assignment.channel"):
            parse_frequency(867.1, "assignment.channel")

    def test_unknown_units_are_rejected(self):
        with pytest.raises(ScenarioError, match="duration unit"):
            parse_duration("70 parsec")
        with pytest.raises(ScenarioError, match="frequency unit"):
            parse_frequency("867 THz")

    def test_garbage_strings_are_rejected(self):
        with pytest.raises(ScenarioError):
            parse_duration("fast")
        with pytest.raises(ScenarioError):
            parse_duration("")


class TestShippedScenarios:
    @pytest.mark.parametrize("name", SHIPPED)
    def test_loads_and_validates(self, name):
        scenario = load_scenario(shipped_scenario_path(name))
        assert scenario.name == name
        assert scenario.devices and scenario.gateways and scenario.clusters

    def test_unknown_name_rejected(self):
        with pytest.raises(FileNotFoundError):
            shipped_scenario_path("no_such_scenario")


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["test3_dual_gw", "demo_small"])
    def test_serialization_round_trips_exactly(self, name):
        original = load_scenario(shipped_scenario_path(name))
        doc = yaml.safe_load(yaml.safe_dump(scenario_to_dict(original)))
        assert parse_scenario(doc) == original
        assert scenario_digest(parse_scenario(doc)) == scenario_digest(original)

    def test_digest_shape_and_sensitivity(self):
        scenario = load_scenario(shipped_scenario_path("demo_small"))
        digest = scenario_digest(scenario)
        assert re.fullmatch(r"[0-9a-f]{16}", digest)
        assert scenario_digest(scenario.with_seed(scenario.seed + 1)) != digest

    def test_save_and_reload(self, tmp_path):
        original = load_scenario(shipped_scenario_path("test2_dl_priority"))
        out = tmp_path / "copy.yaml"
        save_scenario(original, out)
        assert load_scenario(out) == original

    def test_device_lookup(self):
        scenario = load_scenario(shipped_scenario_path("test2_dl_priority"))
        assert scenario.device("ed1").cluster == "c1"
        with pytest.raises(KeyError):
            scenario.device("ghost")


def minimal_doc():
    return {
        "name": "unit",
        "stop": {"ups": 5},
        "gateways": [{"id": "gw1"}],
        "clusters": [{"id": "c1", "members": ["ed1"], "dcp_gateway": "gw1"}],
        "devices": [{"id": "ed1", "cluster": "c1"}],
    }


class TestDocumentValidation:
    def test_minimal_document_parses_with_defaults(self):
        scenario = parse_scenario(minimal_doc())
        assert scenario.seed == 0
        assert scenario.device("ed1").rp_period_us == 70_000_000
        assert scenario.rp_subband == "g1" and scenario.up_subband == "g"
        assert scenario.device_duty_policy == "offtime"

    def test_unknown_fields_are_rejected(self):
        doc = minimal_doc()
        doc["warp_factor"] = 9
        with pytest.raises(ScenarioError, match="unknown fields.*warp_factor"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["devices"][0]["antenna"] = "yagi"
        with pytest.raises(ScenarioError, match=r"devices\[0\]\(ed1\).*antenna"):
            parse_scenario(doc)

    def test_stop_requires_exactly_one_of_ups_or_duration(self):
        doc = minimal_doc()
        doc["stop"] = {"ups": 5, "duration": "30 s"}
        with pytest.raises(ScenarioError, match="exactly one"):
            parse_scenario(doc)
        doc["stop"] = {}
        with pytest.raises(ScenarioError, match="exactly one"):
            parse_scenario(doc)
        with pytest.raises(ScenarioError):
            StopSpec(ups=0)

    @pytest.mark.parametrize("seed", [True, -1, "7"])
    def test_bad_seeds_rejected(self, seed):
        doc = minimal_doc()
        doc["seed"] = seed
        with pytest.raises(ScenarioError, match="seed"):
            parse_scenario(doc)

    def test_duplicate_and_shared_ids_rejected(self):
        doc = minimal_doc()
        doc["devices"].append({"id": "ed1", "cluster": "c1"})
        with pytest.raises(ScenarioError, match="duplicate ids"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["devices"][0]["id"] = "gw1"
        doc["clusters"][0]["members"] = ["gw1"]
        with pytest.raises(ScenarioError, match="both a device and a gateway"):
            parse_scenario(doc)

    def test_membership_must_be_consistent(self):
        doc = minimal_doc()
        doc["clusters"][0]["members"] = ["ed1", "ghost"]
        with pytest.raises(ScenarioError, match="unknown device 'ghost'"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["clusters"].append({"id": "c2", "members": ["ed1"], "dcp_gateway": "gw1"})
        with pytest.raises(ScenarioError, match="already in"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["devices"][0]["cluster"] = "c9"
        with pytest.raises(ScenarioError, match="unknown cluster 'c9'"):
            parse_scenario(doc)

    def test_control_gateway_must_exist_and_transmit(self):
        doc = minimal_doc()
        doc["clusters"][0]["dcp_gateway"] = "gw9"
        with pytest.raises(ScenarioError, match="unknown gateway 'gw9'"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["gateways"][0]["role"] = "rx_only"
        with pytest.raises(ScenarioError, match="receive-only"):
            parse_scenario(doc)

    def test_assignment_constraints(self):
        doc = minimal_doc()
        doc["devices"][0]["assignment"] = {"channel": "868.1 MHz", "sf": 7}
        with pytest.raises(ScenarioError, match="not an urgent channel"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["devices"][0]["assignment"] = {"channel": "867.1 MHz", "sf": 11}
        with pytest.raises(ScenarioError, match=r"sf: 11 outside \[7, 10\]"):
            parse_scenario(doc)

    def test_channel_occupancy_capped_at_three(self):
        doc = minimal_doc()
        ids = ["ed1", "ed2", "ed3", "ed4"]
        doc["clusters"][0]["members"] = ids
        doc["devices"] = [
            {"id": i, "cluster": "c1",
             "assignment": {"channel": "867.1 MHz", "sf": sf}}
            for i, sf in zip(ids, (7, 8, 9, 10))
        ]
        with pytest.raises(ScenarioError, match="more than 3 devices"):
            parse_scenario(doc)

    def test_trigger_references_and_levels(self):
        doc = minimal_doc()
        doc["alarms"] = [{"kind": "script", "species": "methane",
                          "level": "1.2 %vol", "devices": ["ghost"],
                          "times": ["10 s"]}]
        with pytest.raises(ScenarioError, match="unknown device 'ghost'"):
            parse_scenario(doc)
        doc["alarms"] = [{"kind": "script", "species": "methane",
                          "level": "1.2 %vol", "times": ["10 s"]}]
        with pytest.raises(ScenarioError, match="needs 'devices' or 'cluster'"):
            parse_scenario(doc)
        doc["alarms"] = [{"kind": "script", "species": "co",
                          "level": "150 %vol", "devices": ["ed1"],
                          "times": ["10 s"]}]
        with pytest.raises(ScenarioError, match="co levels use 'ppm'"):
            parse_scenario(doc)
        doc["alarms"] = [{"kind": "script", "species": "methane",
                          "level": 1.2, "devices": ["ed1"], "times": ["10 s"]}]
        with pytest.raises(ScenarioError, match=r"alarms\[0\].level"):
            parse_scenario(doc)

    def test_capture_overrides_validated(self):
        doc = minimal_doc()
        doc["capture"] = {"survival": {"7-8": 0.5}}
        with pytest.raises(ScenarioError, match="own_sf/other_sf"):
            parse_scenario(doc)
        doc["capture"] = {"survival": {"7/8": 1.5}}
        with pytest.raises(ScenarioError, match=r"outside \[0, 1\]"):
            parse_scenario(doc)
        doc["capture"] = {"mode": "psychic"}
        with pytest.raises(ScenarioError, match="capture.mode"):
            parse_scenario(doc)

    def test_policies_and_subbands_validated(self):
        doc = minimal_doc()
        doc["device_duty_policy"] = "hourly"
        with pytest.raises(ScenarioError, match="device_duty_policy"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["rp_subband"] = "g9"
        with pytest.raises(ScenarioError, match="unknown sub-band 'g9'"):
            parse_scenario(doc)
        doc = minimal_doc()
        doc["gateways"][0]["duty_policy"] = "hourly"
        with pytest.raises(ScenarioError, match="duty_policy"):
            parse_scenario(doc)

    def test_report_channels_must_sit_in_the_report_band(self):
        doc = minimal_doc()
        doc["devices"][0]["rp_channels"] = ["867.1 MHz"]
        with pytest.raises(ScenarioError, match="outside sub-band g1"):
            parse_scenario(doc)

    def test_every_problem_is_reported_at_once(self):
        doc = minimal_doc()
        doc["gateways"].append({"id": "gw1"})            # duplicate gateway id
        doc["clusters"][0]["members"] = ["ed1", "ghost"]  # unknown member
        with pytest.raises(ScenarioError) as err:
            parse_scenario(doc)
        message = str(err.value)
        assert "duplicate ids" in message
        assert "unknown device 'ghost'" in message
        assert "; " in message

    def test_invalid_yaml_file_rejected(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("name: [unclosed\n")
        with pytest.raises(ScenarioError, match="not valid YAML"):
            load_scenario(bad)

    def test_missing_file_raises_file_not_found(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_scenario(tmp_path / "nope.yaml")
