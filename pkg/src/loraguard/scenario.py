"""Scenario files: YAML documents with explicit units, validated into dataclasses.

Every dimensioned field is a string with a unit suffix ("70 s", "50 ms",
"867.1 MHz", "14 dBm", "1.2 %vol"); bare numbers are rejected so a stray
millisecond/second mix-up cannot slip through.  Validation errors name the
offending field path.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .engine import SimTime, US_PER_SECOND
from .sensor import COMBUSTIBLE_GASES, SensorProfile, TriggerSpec

__all__ = [
    "ScenarioError", "StopSpec", "DeviceSpec", "GatewaySpec", "ClusterSpec",
    "CaptureSpec", "Scenario", "load_scenario", "parse_scenario",
    "scenario_to_dict", "save_scenario", "scenario_digest",
    "shipped_scenario_path", "parse_duration", "parse_frequency",
]


class ScenarioError(ValueError):
    """A scenario document is malformed; the message names the field."""


_QUANTITY_RE = re.compile(r"^\s*([-+]?[0-9._]+(?:[eE][-+]?[0-9]+)?)\s*([%a-zA-Z]+)\s*$")

_DURATION_US = {"us": 1, "ms": 1_000, "s": US_PER_SECOND,
                "min": 60 * US_PER_SECOND, "h": 3_600 * US_PER_SECOND}
_FREQ_HZ = {"hz": 1, "khz": 1_000, "mhz": 1_000_000, "ghz": 1_000_000_000}


def _split_quantity(value: object, path: str, expected: str) -> tuple[float, str]:
    if not isinstance(value, str):
        raise ScenarioError(
            f"{path}: expected a string with a unit suffix like {expected!r}, "
            f"got {value!r}")
    match = _QUANTITY_RE.match(value)
    if not match:
        raise ScenarioError(
            f"{path}: cannot parse quantity {value!r} (expected e.g. {expected!r})")
    try:
        number = float(match.group(1).replace("_", ""))
    except ValueError as exc:
        raise ScenarioError(f"{path}: bad number in {value!r}") from exc
    return number, match.group(2)


def parse_duration(value: object, path: str = "duration") -> SimTime:
    """Parse a duration string into integer microseconds."""
    number, unit = _split_quantity(value, path, "70 s")
    factor = _DURATION_US.get(unit if unit == "us" else unit.lower())
    if factor is None:
        raise ScenarioError(f"{path}: unknown duration unit {unit!r} in {value!r}")
    return round(number * factor)


def parse_frequency(value: object, path: str = "frequency") -> int:
    """Parse a frequency string into integer hertz."""
    number, unit = _split_quantity(value, path, "867.1 MHz")
    factor = _FREQ_HZ.get(unit.lower())
    if factor is None:
        raise ScenarioError(f"{path}: unknown frequency unit {unit!r} in {value!r}")
    return round(number * factor)


def _parse_power_dbm(value: object, path: str) -> float:
    number, unit = _split_quantity(value, path, "14 dBm")
    if unit.lower() != "dbm":
        raise ScenarioError(f"{path}: expected dBm, got {unit!r}")
    return number


def _parse_db(value: object, path: str) -> float:
    number, unit = _split_quantity(value, path, "6 dB")
    if unit.lower() != "db":
        raise ScenarioError(f"{path}: expected dB, got {unit!r}")
    return number


_LEVEL_UNITS = {"methane": "%vol", "propane": "%vol", "butane": "%vol",
                "co": "ppm", "o2": "%"}


def _parse_level(value: object, species: str, path: str) -> float:
    want = _LEVEL_UNITS.get(species)
    if want is None:
        raise ScenarioError(f"{path}: unknown gas species {species!r}")
    number, unit = _split_quantity(value, path, f"1.2 {want}")
    if unit != want:
        raise ScenarioError(f"{path}: {species} levels use {want!r}, got {unit!r}")
    return number


@dataclass(frozen=True)
class StopSpec:
    """Run termination: a count of finalized urgent uplinks or a sim duration."""

    ups: int | None = None
    at_us: SimTime | None = None

    def __post_init__(self) -> None:
        if (self.ups is None) == (self.at_us is None):
            raise ScenarioError("stop: exactly one of 'ups' or 'duration' is required")
        if self.ups is not None and self.ups <= 0:
            raise ScenarioError(f"stop.ups: must be > 0, got {self.ups}")
        if self.at_us is not None and self.at_us <= 0:
            raise ScenarioError("stop.duration: must be > 0")


@dataclass(frozen=True)
class DeviceSpec:
    id: str
    cluster: str
    rp_period_us: SimTime | None = 70 * US_PER_SECOND
    clock_sigma_us: SimTime = 50_000
    rp_sf: int = 7
    rp_payload_len: int = 37
    rp_channels: tuple[int, ...] | None = None  # None = all report-band channels
    up_payload_len: int = 37
    assignment: tuple[int, int] | None = None  # (freq_hz, sf)
    rx_power_dbm: float = 0.0
    receive_delay1_us: SimTime = 1 * US_PER_SECOND
    receive_delay2_us: SimTime = 2 * US_PER_SECOND
    rp_floor_us: SimTime = 1 * US_PER_SECOND


@dataclass(frozen=True)
class GatewaySpec:
    id: str
    role: str = "full"
    demod_paths: int = 10
    backhaul_delay_us: SimTime = 20_000
    duty_policy: str = "window"


@dataclass(frozen=True)
class ClusterSpec:
    id: str
    members: tuple[str, ...]
    dcp_gateway: str
    up_channels: tuple[int, ...] | None = None  # None = all urgent-band channels


@dataclass(frozen=True)
class CaptureSpec:
    mode: str = "empirical"
    co_sf_margin_db: float = 6.0
    # ((own_sf, other_sf), survival) overrides of the calibrated table
    survival: tuple[tuple[tuple[int, int], float], ...] = ()


@dataclass(frozen=True)
class Scenario:
    """A complete, validated simulation input."""

    name: str
    stop: StopSpec
    gateways: tuple[GatewaySpec, ...]
    clusters: tuple[ClusterSpec, ...]
    devices: tuple[DeviceSpec, ...]
    triggers: tuple[TriggerSpec, ...] = ()
    capture: CaptureSpec = CaptureSpec()
    sensor: SensorProfile = SensorProfile()
    seed: int = 0
    dcp_payload_len: int = 37
    rp_subband: str = "g1"
    up_subband: str = "g"
    device_duty_policy: str = "offtime"

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def device(self, device_id: str) -> DeviceSpec:
        for dev in self.devices:
            if dev.id == device_id:
                return dev
        raise KeyError(device_id)


def _as_mapping(node: object, path: str) -> dict:
    if not isinstance(node, dict):
        raise ScenarioError(f"{path}: expected a mapping, got {type(node).__name__}")
    return dict(node)


def _as_list(node: object, path: str) -> list:
    if not isinstance(node, list):
        raise ScenarioError(f"{path}: expected a list, got {type(node).__name__}")
    return node


def _take_int(section: dict, key: str, path: str, default: int) -> int:
    value = section.pop(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _take_str(section: dict, key: str, path: str, default: str | None = None) -> str:
    value = section.pop(key, default)
    if value is None:
        raise ScenarioError(f"{path}.{key}: required")
    if not isinstance(value, str):
        raise ScenarioError(f"{path}.{key}: expected a string, got {value!r}")
    return value


def _no_leftovers(section: dict, path: str) -> None:
    if section:
        raise ScenarioError(f"{path}: unknown fields {sorted(section)}")


def _parse_device(node: object, path: str) -> DeviceSpec:
    section = _as_mapping(node, path)
    dev_id = _take_str(section, "id", path)
    cluster = _take_str(section, "cluster", path)
    path = f"{path}({dev_id})"

    if "rp_period" in section:
        raw = section.pop("rp_period")
        rp_period = None if raw is None else parse_duration(raw, f"{path}.rp_period")
    else:
        rp_period = 70 * US_PER_SECOND
    sigma = (parse_duration(section.pop("clock_sigma"), f"{path}.clock_sigma")
             if "clock_sigma" in section else 50_000)
    assignment = None
    if (node_assign := section.pop("assignment", None)) is not None:
        amap = _as_mapping(node_assign, f"{path}.assignment")
        freq = parse_frequency(amap.pop("channel", None), f"{path}.assignment.channel")
        sf = _take_int(amap, "sf", f"{path}.assignment", -1)
        _no_leftovers(amap, f"{path}.assignment")
        assignment = (freq, sf)
    rp_channels = None
    if (raw_channels := section.pop("rp_channels", None)) is not None:
        rp_channels = tuple(
            parse_frequency(ch, f"{path}.rp_channels[{i}]")
            for i, ch in enumerate(_as_list(raw_channels, f"{path}.rp_channels")))
    spec = DeviceSpec(
        id=dev_id,
        cluster=cluster,
        rp_period_us=rp_period,
        clock_sigma_us=sigma,
        rp_sf=_take_int(section, "rp_sf", path, 7),
        rp_payload_len=_take_int(section, "rp_payload", path, 37),
        rp_channels=rp_channels,
        up_payload_len=_take_int(section, "up_payload", path, 37),
        assignment=assignment,
        rx_power_dbm=(_parse_power_dbm(section.pop("rx_power"), f"{path}.rx_power")
                      if "rx_power" in section else 0.0),
        receive_delay1_us=(parse_duration(section.pop("receive_delay1"),
                                          f"{path}.receive_delay1")
                           if "receive_delay1" in section else 1 * US_PER_SECOND),
        receive_delay2_us=(parse_duration(section.pop("receive_delay2"),
                                          f"{path}.receive_delay2")
                           if "receive_delay2" in section else 2 * US_PER_SECOND),
        rp_floor_us=(parse_duration(section.pop("rp_floor"), f"{path}.rp_floor")
                     if "rp_floor" in section else 1 * US_PER_SECOND),
    )
    _no_leftovers(section, path)
    return spec


def _parse_gateway(node: object, path: str) -> GatewaySpec:
    section = _as_mapping(node, path)
    gw_id = _take_str(section, "id", path)
    path = f"{path}({gw_id})"
    spec = GatewaySpec(
        id=gw_id,
        role=_take_str(section, "role", path, "full"),
        demod_paths=_take_int(section, "demod_paths", path, 10),
        backhaul_delay_us=(parse_duration(section.pop("backhaul"), f"{path}.backhaul")
                           if "backhaul" in section else 20_000),
        duty_policy=_take_str(section, "duty_policy", path, "window"),
    )
    _no_leftovers(section, path)
    return spec


def _parse_cluster(node: object, path: str) -> ClusterSpec:
    section = _as_mapping(node, path)
    cl_id = _take_str(section, "id", path)
    path = f"{path}({cl_id})"
    members = tuple(_as_list(section.pop("members", None), f"{path}.members"))
    up_channels = None
    if (raw := section.pop("up_channels", None)) is not None:
        up_channels = tuple(
            parse_frequency(ch, f"{path}.up_channels[{i}]")
            for i, ch in enumerate(_as_list(raw, f"{path}.up_channels")))
    spec = ClusterSpec(
        id=cl_id,
        members=members,
        dcp_gateway=_take_str(section, "dcp_gateway", path),
        up_channels=up_channels,
    )
    _no_leftovers(section, path)
    return spec


def _parse_trigger(node: object, path: str) -> TriggerSpec:
    section = _as_mapping(node, path)
    kind = _take_str(section, "kind", path)
    species = _take_str(section, "species", path)
    level = _parse_level(section.pop("level", None), species, f"{path}.level")
    devices: tuple[str, ...] = ()
    if (raw := section.pop("devices", None)) is not None:
        devices = tuple(_as_list(raw, f"{path}.devices"))
    cluster = section.pop("cluster", None)
    if not devices and cluster is None:
        raise ScenarioError(f"{path}: needs 'devices' or 'cluster'")
    times: tuple[SimTime, ...] = ()
    if (raw := section.pop("times", None)) is not None:
        times = tuple(parse_duration(t, f"{path}.times[{i}]")
                      for i, t in enumerate(_as_list(raw, f"{path}.times")))
    lo, hi = 120 * US_PER_SECOND, 130 * US_PER_SECOND
    if (raw := section.pop("interarrival", None)) is not None:
        imap = _as_mapping(raw, f"{path}.interarrival")
        lo = parse_duration(imap.pop("min", None), f"{path}.interarrival.min")
        hi = parse_duration(imap.pop("max", None), f"{path}.interarrival.max")
        _no_leftovers(imap, f"{path}.interarrival")
    try:
        spec = TriggerSpec(kind=kind, species=species, level=level, devices=devices,
                           cluster=cluster, times_us=times,
                           interarrival_min_us=lo, interarrival_max_us=hi)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    _no_leftovers(section, path)
    return spec


def _parse_capture(node: object, path: str) -> CaptureSpec:
    section = _as_mapping(node, path)
    mode = _take_str(section, "mode", path, "empirical")
    margin = (_parse_db(section.pop("co_sf_margin"), f"{path}.co_sf_margin")
              if "co_sf_margin" in section else 6.0)
    overrides: list[tuple[tuple[int, int], float]] = []
    if (raw := section.pop("survival", None)) is not None:
        for key, prob in sorted(_as_mapping(raw, f"{path}.survival").items()):
            pair = re.fullmatch(r"(\d+)/(\d+)", str(key))
            if not pair:
                raise ScenarioError(
                    f"{path}.survival: keys look like 'own_sf/other_sf', got {key!r}")
            if not isinstance(prob, (int, float)) or isinstance(prob, bool):
                raise ScenarioError(f"{path}.survival[{key}]: expected a number")
            overrides.append(((int(pair.group(1)), int(pair.group(2))), float(prob)))
    spec = CaptureSpec(mode=mode, co_sf_margin_db=margin, survival=tuple(overrides))
    _no_leftovers(section, path)
    return spec


def _parse_sensor(node: object, path: str) -> SensorProfile:
    section = _as_mapping(node, path)
    kwargs = {}
    if "co_alarm" in section:
        kwargs["co_alarm_ppm"] = _parse_level(section.pop("co_alarm"), "co",
                                              f"{path}.co_alarm")
    if "o2_deficiency" in section:
        kwargs["o2_deficiency_pct"] = _parse_level(section.pop("o2_deficiency"), "o2",
                                                   f"{path}.o2_deficiency")
    _no_leftovers(section, path)
    return SensorProfile(**kwargs)


def parse_scenario(data: object) -> Scenario:
    """Build a Scenario from a parsed YAML document, then cross-validate it."""
    doc = _as_mapping(data, "scenario")
    name = _take_str(doc, "name", "scenario")

    raw_stop = _as_mapping(doc.pop("stop", None), "stop")
    ups = raw_stop.pop("ups", None)
    if ups is not None and (not isinstance(ups, int) or isinstance(ups, bool)):
        raise ScenarioError(f"stop.ups: expected an integer, got {ups!r}")
    at_us = (parse_duration(raw_stop.pop("duration"), "stop.duration")
             if "duration" in raw_stop else None)
    _no_leftovers(raw_stop, "stop")
    stop = StopSpec(ups=ups, at_us=at_us)

    seed = doc.pop("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError(f"seed: expected a non-negative integer, got {seed!r}")

    gateways = tuple(_parse_gateway(g, f"gateways[{i}]")
                     for i, g in enumerate(_as_list(doc.pop("gateways", None), "gateways")))
    clusters = tuple(_parse_cluster(c, f"clusters[{i}]")
                     for i, c in enumerate(_as_list(doc.pop("clusters", None), "clusters")))
    devices = tuple(_parse_device(d, f"devices[{i}]")
                    for i, d in enumerate(_as_list(doc.pop("devices", None), "devices")))
    triggers: tuple[TriggerSpec, ...] = ()
    if (raw := doc.pop("alarms", None)) is not None:
        triggers = tuple(_parse_trigger(t, f"alarms[{i}]")
                         for i, t in enumerate(_as_list(raw, "alarms")))
    capture = (_parse_capture(doc.pop("capture"), "capture")
               if "capture" in doc else CaptureSpec())
    sensor = (_parse_sensor(doc.pop("sensor"), "sensor")
              if "sensor" in doc else SensorProfile())

    scenario = Scenario(
        name=name,
        stop=stop,
        gateways=gateways,
        clusters=clusters,
        devices=devices,
        triggers=triggers,
        capture=capture,
        sensor=sensor,
        seed=seed,
        dcp_payload_len=_take_int(doc, "dcp_payload", "scenario", 37),
        rp_subband=_take_str(doc, "rp_subband", "scenario", "g1"),
        up_subband=_take_str(doc, "up_subband", "scenario", "g"),
        device_duty_policy=_take_str(doc, "device_duty_policy", "scenario", "offtime"),
    )
    _no_leftovers(doc, "scenario")
    validate_scenario(scenario)
    return scenario


def validate_scenario(scenario: Scenario) -> None:
    """Cross-field checks; raises ScenarioError listing every problem found."""
    from .phy import default_eu868_plan

    plan = default_eu868_plan()
    problems: list[str] = []

    def check_subband(name: str, where: str) -> None:
        try:
            plan.subband(name)
        except KeyError:
            problems.append(f"{where}: unknown sub-band {name!r}")

    check_subband(scenario.rp_subband, "rp_subband")
    check_subband(scenario.up_subband, "up_subband")

    device_ids = [d.id for d in scenario.devices]
    gateway_ids = [g.id for g in scenario.gateways]
    cluster_ids = [c.id for c in scenario.clusters]
    for label, ids in (("devices", device_ids), ("gateways", gateway_ids),
                       ("clusters", cluster_ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            problems.append(f"{label}: duplicate ids {dupes}")
    shared = sorted(set(device_ids) & set(gateway_ids))
    if shared:
        problems.append(f"ids used for both a device and a gateway: {shared}")
    known_devices = set(device_ids)
    gateways_by_id = {g.id: g for g in scenario.gateways}

    try:
        up_band = plan.subband(scenario.up_subband)
        up_default_channels: tuple[int, ...] = up_band.channels
    except KeyError:
        up_band = None
        up_default_channels = ()
    try:
        rp_band = plan.subband(scenario.rp_subband)
    except KeyError:
        rp_band = None

    member_cluster: dict[str, str] = {}
    cluster_channels: dict[str, tuple[int, ...]] = {}
    for cl in scenario.clusters:
        where = f"clusters({cl.id})"
        channels = cl.up_channels if cl.up_channels is not None else up_default_channels
        cluster_channels[cl.id] = channels
        if not channels:
            problems.append(f"{where}: no urgent-uplink channels available")
        if up_band is not None:
            for ch in channels:
                if not up_band.contains(ch):
                    problems.append(
                        f"{where}.up_channels: {ch} Hz outside sub-band "
                        f"{scenario.up_subband}")
        for member in cl.members:
            if member not in known_devices:
                problems.append(f"{where}.members: unknown device {member!r}")
            if member in member_cluster:
                problems.append(f"{where}.members: {member!r} already in "
                                f"{member_cluster[member]!r}")
            member_cluster[member] = cl.id
        gw = gateways_by_id.get(cl.dcp_gateway)
        if gw is None:
            problems.append(f"{where}.dcp_gateway: unknown gateway {cl.dcp_gateway!r}")
        elif gw.role != "full":
            problems.append(f"{where}.dcp_gateway: {gw.id} is receive-only")
        if len(cl.members) > 3 * len(channels) and channels:
            problems.append(
                f"{where}: {len(cl.members)} members exceed capacity "
                f"{3 * len(channels)} ({len(channels)} channels x 3 SFs)")

    occupancy: dict[tuple[str, int], int] = {}
    for dev in scenario.devices:
        where = f"devices({dev.id})"
        if dev.cluster not in {c.id for c in scenario.clusters}:
            problems.append(f"{where}.cluster: unknown cluster {dev.cluster!r}")
        elif member_cluster.get(dev.id) != dev.cluster:
            problems.append(f"{where}: not listed in cluster {dev.cluster!r} members")
        if not 7 <= dev.rp_sf <= 12:
            problems.append(f"{where}.rp_sf: {dev.rp_sf} outside [7, 12]")
        if dev.clock_sigma_us < 0:
            problems.append(f"{where}.clock_sigma: must be >= 0")
        if dev.rp_period_us is not None and dev.rp_period_us <= 0:
            problems.append(f"{where}.rp_period: must be > 0 or null")
        if dev.rp_channels is not None:
            if not dev.rp_channels:
                problems.append(f"{where}.rp_channels: empty list")
            elif rp_band is not None:
                for ch in dev.rp_channels:
                    if not rp_band.contains(ch):
                        problems.append(
                            f"{where}.rp_channels: {ch} Hz outside sub-band "
                            f"{scenario.rp_subband}")
        if dev.assignment is not None:
            freq, sf = dev.assignment
            if not 7 <= sf <= 10:
                problems.append(f"{where}.assignment.sf: {sf} outside [7, 10]")
            allowed = cluster_channels.get(dev.cluster, up_default_channels)
            if allowed and freq not in allowed:
                problems.append(
                    f"{where}.assignment.channel: {freq} Hz not an urgent channel "
                    f"of cluster {dev.cluster!r}")
            key = (dev.cluster, freq)
            occupancy[key] = occupancy.get(key, 0) + 1
            if occupancy[key] > 3:
                problems.append(
                    f"{where}.assignment.channel: more than 3 devices on {freq} Hz "
                    f"in cluster {dev.cluster!r}")

    for i, trig in enumerate(scenario.triggers):
        where = f"alarms[{i}]"
        for dev_id in trig.devices:
            if dev_id not in known_devices:
                problems.append(f"{where}.devices: unknown device {dev_id!r}")
        if trig.cluster is not None and trig.cluster not in {c.id for c in scenario.clusters}:
            problems.append(f"{where}.cluster: unknown cluster {trig.cluster!r}")
        if trig.level < 0:
            problems.append(f"{where}.level: must be >= 0")

    for gw in scenario.gateways:
        if gw.role not in ("full", "rx_only"):
            problems.append(f"gateways({gw.id}).role: {gw.role!r} is not 'full'/'rx_only'")
        if gw.duty_policy not in ("offtime", "window"):
            problems.append(f"gateways({gw.id}).duty_policy: {gw.duty_policy!r}")
        if gw.demod_paths < 1:
            problems.append(f"gateways({gw.id}).demod_paths: must be >= 1")
    if scenario.device_duty_policy not in ("offtime", "window"):
        problems.append(f"device_duty_policy: {scenario.device_duty_policy!r}")
    if scenario.capture.mode not in ("empirical", "threshold"):
        problems.append(f"capture.mode: {scenario.capture.mode!r}")
    for (own, other), p in scenario.capture.survival:
        if not (7 <= own <= 12 and 7 <= other <= 12):
            problems.append(f"capture.survival: SF pair {own}/{other} outside [7, 12]")
        if not 0.0 <= p <= 1.0:
            problems.append(f"capture.survival[{own}/{other}]: {p} outside [0, 1]")

    if problems:
        raise ScenarioError("; ".join(problems))


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario YAML file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from exc
    return parse_scenario(data)


def _fmt_us(us: SimTime) -> str:
    if us % US_PER_SECOND == 0:
        return f"{us // US_PER_SECOND} s"
    if us % 1000 == 0:
        return f"{us // 1000} ms"
    return f"{us} us"


def _fmt_hz(hz: int) -> str:
    if hz % 100_000 == 0:
        return f"{hz / 1_000_000} MHz"
    return f"{hz} Hz"


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize back to the YAML document shape; parse_scenario round-trips it."""
    doc: dict[str, object] = {"name": scenario.name, "seed": scenario.seed}
    doc["stop"] = ({"ups": scenario.stop.ups} if scenario.stop.ups is not None
                   else {"duration": _fmt_us(scenario.stop.at_us or 0)})
    doc["gateways"] = [
        {"id": g.id, "role": g.role, "demod_paths": g.demod_paths,
         "backhaul": _fmt_us(g.backhaul_delay_us), "duty_policy": g.duty_policy}
        for g in scenario.gateways]
    doc["clusters"] = [
        {"id": c.id, "members": list(c.members), "dcp_gateway": c.dcp_gateway,
         **({"up_channels": [_fmt_hz(ch) for ch in c.up_channels]}
            if c.up_channels is not None else {})}
        for c in scenario.clusters]
    devices = []
    for d in scenario.devices:
        entry: dict[str, object] = {
            "id": d.id, "cluster": d.cluster,
            "rp_period": None if d.rp_period_us is None else _fmt_us(d.rp_period_us),
            "clock_sigma": _fmt_us(d.clock_sigma_us),
            "rp_sf": d.rp_sf, "rp_payload": d.rp_payload_len,
            "up_payload": d.up_payload_len,
            "rx_power": f"{d.rx_power_dbm} dBm",
            "receive_delay1": _fmt_us(d.receive_delay1_us),
            "receive_delay2": _fmt_us(d.receive_delay2_us),
            "rp_floor": _fmt_us(d.rp_floor_us),
        }
        if d.rp_channels is not None:
            entry["rp_channels"] = [_fmt_hz(ch) for ch in d.rp_channels]
        if d.assignment is not None:
            entry["assignment"] = {"channel": _fmt_hz(d.assignment[0]),
                                   "sf": d.assignment[1]}
        devices.append(entry)
    doc["devices"] = devices
    if scenario.triggers:
        alarms = []
        for t in scenario.triggers:
            entry = {"kind": t.kind, "species": t.species,
                     "level": f"{t.level} {_LEVEL_UNITS[t.species]}"}
            if t.devices:
                entry["devices"] = list(t.devices)
            if t.cluster is not None:
                entry["cluster"] = t.cluster
            if t.kind == "script":
                entry["times"] = [_fmt_us(x) for x in t.times_us]
            else:
                entry["interarrival"] = {"min": _fmt_us(t.interarrival_min_us),
                                         "max": _fmt_us(t.interarrival_max_us)}
            alarms.append(entry)
        doc["alarms"] = alarms
    doc["capture"] = {
        "mode": scenario.capture.mode,
        "co_sf_margin": f"{scenario.capture.co_sf_margin_db} dB",
        **({"survival": {f"{a}/{b}": p for (a, b), p in scenario.capture.survival}}
           if scenario.capture.survival else {}),
    }
    defaults = SensorProfile()
    if scenario.sensor != defaults:
        doc["sensor"] = {"co_alarm": f"{scenario.sensor.co_alarm_ppm} ppm",
                         "o2_deficiency": f"{scenario.sensor.o2_deficiency_pct} %"}
    doc["dcp_payload"] = scenario.dcp_payload_len
    doc["rp_subband"] = scenario.rp_subband
    doc["up_subband"] = scenario.up_subband
    doc["device_duty_policy"] = scenario.device_duty_policy
    return doc


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False), encoding="utf-8")


def scenario_digest(scenario: Scenario) -> str:
    """Stable content hash of a scenario, independent of file formatting."""
    canonical = yaml.safe_dump(scenario_to_dict(scenario), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def shipped_scenario_path(name: str) -> Path:
    """Path of a scenario bundled with the package, e.g. 'test2_dl_priority'."""
    from importlib import resources

    candidate = resources.files("loraguard") / "scenarios" / f"{name}.yaml"
    with resources.as_file(candidate) as path:
        if not path.exists():
            raise FileNotFoundError(f"no shipped scenario named {name!r}")
        return Path(path)
