"""Scenario runner: wires devices, gateways, server and alarm sources together.

Traffic flow per periodic report: the device hops to a random report channel,
every gateway in range tracks the frame, and the server deduplicates decoded
copies and schedules one control downlink through the cluster's gateway into
the device's first receive window (mirroring the uplink channel and SF).  A
window-1 downlink blocked by the duty-cycle budget falls back to window 2 on
the high-duty band; one that would overlap a transmission already programmed
at the gateway is dropped.  Starting any downlink aborts every reception in
progress at that gateway, which is the loss mechanism urgent uplinks suffer.

Urgent uplinks are triggered by gas alarms, use the device's confirmed
(channel, SF) assignment, and are never retransmitted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .device import DcpCommand, EndDevice
from .engine import Engine, RandomStreams, SimTime
from .gateway import Gateway
from .metrics import (CAUSE_DUTY_CYCLE, CAUSE_UNASSIGNED, MetricsCollector,
                      PacketOutcome, build_report, system_cause)
from .phy import (CaptureModel, ChannelPlan, DEFAULT_SURVIVAL, DutyCycleLedger,
                  RadioParams, RX2_FREQ_HZ, RX2_SF, SubBand, Transmission,
                  TransmissionKind, airtime_us, default_eu868_plan)
from .scenario import Scenario, scenario_digest
from .sensor import GasEvent, alarm_check, generate_events
from .server import Cluster, NetworkServer

log = logging.getLogger(__name__)


@dataclass
class _AlarmSource:
    index: int
    devices: tuple[str, ...]
    events: object  # iterator of GasEvent


class Simulation:
    """One runnable instance of a scenario."""

    def __init__(self, scenario: Scenario, seed: int | None = None,
                 plan: ChannelPlan | None = None) -> None:
        self.scenario = scenario if seed is None else scenario.with_seed(seed)
        self.plan = plan or default_eu868_plan()
        self.engine = Engine()
        self.streams = RandomStreams(self.scenario.seed)
        self.metrics = MetricsCollector()
        self.up_outcomes: list[PacketOutcome] = []
        self.transmission_log: list[Transmission] | None = None  # enable for tests

        survival = dict(DEFAULT_SURVIVAL)
        survival.update(dict(self.scenario.capture.survival))
        self.capture = CaptureModel(mode=self.scenario.capture.mode,
                                    co_sf_margin_db=self.scenario.capture.co_sf_margin_db,
                                    survival=survival)

        self.rp_band = self.plan.subband(self.scenario.rp_subband)
        self.up_band = self.plan.subband(self.scenario.up_subband)

        self.ledger = DutyCycleLedger(default_policy=self.scenario.device_duty_policy)
        self.gateways: dict[str, Gateway] = {}
        for spec in self.scenario.gateways:
            self.gateways[spec.id] = Gateway(
                id=spec.id, role=spec.role, demod_paths=spec.demod_paths,
                backhaul_delay_us=spec.backhaul_delay_us)
            self.ledger.set_policy(spec.id, spec.duty_policy)

        self.server = NetworkServer()
        cluster_channels: dict[str, tuple[int, ...]] = {}
        for cspec in self.scenario.clusters:
            channels = (cspec.up_channels if cspec.up_channels is not None
                        else self.up_band.channels)
            cluster_channels[cspec.id] = channels
            explicit = {d.id: d.assignment for d in self.scenario.devices
                        if d.cluster == cspec.id and d.assignment is not None}
            self.server.add_cluster(
                Cluster(id=cspec.id, members=cspec.members,
                        dcp_gateway=cspec.dcp_gateway, up_channels=channels),
                explicit=explicit)

        self.devices: dict[str, EndDevice] = {}
        for dspec in self.scenario.devices:
            device = EndDevice(
                id=dspec.id, cluster=dspec.cluster,
                rp_period_us=dspec.rp_period_us,
                clock_sigma_us=dspec.clock_sigma_us,
                rp_sf=dspec.rp_sf,
                rp_payload_len=dspec.rp_payload_len,
                rp_channels=dspec.rp_channels or self.rp_band.channels,
                up_payload_len=dspec.up_payload_len,
                up_channels=cluster_channels[dspec.cluster],
                rx_power_dbm=dspec.rx_power_dbm,
                receive_delay1_us=dspec.receive_delay1_us,
                receive_delay2_us=dspec.receive_delay2_us,
                rp_floor_us=dspec.rp_floor_us,
                # Commissioning: the device powers up knowing its assignment;
                # control downlinks re-confirm it for the rest of the run.
                assignment=self.server.assignments[dspec.id],
            )
            self.devices[dspec.id] = device
            for gw in self.gateways.values():
                gw.rx_power_dbm[dspec.id] = dspec.rx_power_dbm

        self._rp_rng = {d: self.streams.stream(f"rp:{d}") for d in self.devices}
        self._capture_rng = {g: self.streams.stream(f"capture:{g}")
                             for g in self.gateways}

        self._ups_generated = 0
        self._ups_finalized = 0
        self._up_target = self.scenario.stop.ups
        self._end_at = self.scenario.stop.at_us

        self._alarm_sources: list[_AlarmSource] = []
        for i, trig in enumerate(self.scenario.triggers):
            scope = trig.devices
            if not scope and trig.cluster is not None:
                scope = self.server.clusters[trig.cluster].members
            source = _AlarmSource(index=i, devices=scope,
                                  events=generate_events(
                                      trig, self.streams.stream(f"alarm:{i}")))
            self._alarm_sources.append(source)
        self._live_alarm_sources = len(self._alarm_sources)

    # -- run loop ---------------------------------------------------------------

    def run(self) -> dict:
        """Execute the scenario and return its report."""
        for device in self.devices.values():
            if device.rp_period_us is not None:
                # Stationary start: each sender begins at a uniform random
                # phase of its report period.
                phase = int(self._rp_rng[device.id].integers(device.rp_period_us))
                self.engine.schedule(phase, self._rp_handler(device), "rp")
        for source in self._alarm_sources:
            self._schedule_next_alarm(source)

        if self._end_at is not None:
            self.engine.run_until(self._end_at)
        else:
            self.engine.run_while(self._keep_going)
        return self.report()

    def _keep_going(self) -> bool:
        assert self._up_target is not None
        if self._ups_finalized < self._ups_generated:
            return True
        if self._ups_generated >= self._up_target:
            return False
        # Below target with everything finalized: only a live alarm source
        # can still produce uplinks.
        return self._live_alarm_sources > 0

    def report(self) -> dict:
        return build_report(
            self.metrics,
            scenario_name=self.scenario.name,
            seed=self.scenario.seed,
            scenario_digest=scenario_digest(self.scenario),
            ended_at_us=self.engine.now,
            assignments=self.server.assignments,
        )

    # -- alarm handling ---------------------------------------------------------

    def _schedule_next_alarm(self, source: _AlarmSource) -> None:
        if self._up_target is not None and self._ups_generated >= self._up_target:
            return
        for event in source.events:
            if self._end_at is not None and event.at_us > self._end_at:
                return
            self.engine.schedule(event.at_us,
                                 lambda e=event, s=source: self._fire_alarm(s, e),
                                 "alarm")
            return
        self._live_alarm_sources -= 1  # generator exhausted

    def _fire_alarm(self, source: _AlarmSource, event: GasEvent) -> None:
        if alarm_check(self.scenario.sensor, event):
            for dev_id in source.devices:
                self._trigger_up(self.devices[dev_id])
        self._schedule_next_alarm(source)

    # -- urgent uplinks -----------------------------------------------------------

    def _trigger_up(self, device: EndDevice) -> None:
        now = self.engine.now
        self._ups_generated += 1
        self.metrics.kind("UP").generated += 1
        outcome = PacketOutcome(uid=0, device=device.id, trigger_us=now)
        if device.assignment is None:
            outcome.cause = CAUSE_UNASSIGNED
            self.metrics.kind("UP").add_loss(CAUSE_UNASSIGNED)
            self._finalize_up(outcome)
            return
        self._attempt_up(device, outcome)

    def _attempt_up(self, device: EndDevice, outcome: PacketOutcome) -> None:
        now = self.engine.now
        if not device.idle_at(now):
            # Half-duplex: wait out the device's own transmission.
            self.metrics.kind("UP").deferrals += 1
            self.engine.schedule(device.busy_until,
                                 lambda: self._attempt_up(device, outcome), "up")
            return
        freq_hz, sf = device.assignment
        band = self.plan.subband_of(freq_hz)
        params = RadioParams(sf=sf)
        air = airtime_us(params, device.up_payload_len)
        if self.ledger.check(device.id, band, now, air) > now:
            # An urgent alarm is stale by the time the band frees; count it lost.
            outcome.cause = CAUSE_DUTY_CYCLE
            self.metrics.kind("UP").add_loss(CAUSE_DUTY_CYCLE)
            self._finalize_up(outcome)
            return
        tx = Transmission(source=device.id, kind=TransmissionKind.UP,
                          freq_hz=freq_hz, params=params, start_us=now,
                          airtime_us=air, payload_len=device.up_payload_len,
                          trigger_us=outcome.trigger_us)
        outcome.uid = tx.uid
        outcome.start_us = now
        outcome.end_us = tx.end_us
        self._start_uplink(device, tx, band)
        self.engine.schedule(tx.end_us,
                             lambda: self._finish_up(device, tx, outcome), "up-end")

    def _finish_up(self, device: EndDevice, tx: Transmission,
                   outcome: PacketOutcome) -> None:
        now = self.engine.now
        causes = self._close_uplink(tx)
        for gw_id, cause in causes.items():
            self.metrics.on_gateway_outcome("UP", gw_id, cause)
        outcome.per_gateway = {gw: (c if c is not None else "decoded")
                               for gw, c in causes.items()}
        decoded = [gw for gw, c in causes.items() if c is None]
        if decoded:
            outcome.delivered = True
            outcome.delivered_at_us = now + min(
                self.gateways[gw].backhaul_delay_us for gw in decoded)
            self.metrics.kind("UP").delivered += 1
            self.metrics.on_up_delivered(outcome)
        else:
            outcome.cause = system_cause(causes)
            self.metrics.kind("UP").add_loss(outcome.cause)
        self._finalize_up(outcome)

    def _finalize_up(self, outcome: PacketOutcome) -> None:
        self.up_outcomes.append(outcome)
        self._ups_finalized += 1

    # -- periodic reports -----------------------------------------------------------

    def _rp_handler(self, device: EndDevice):
        return lambda: self._attempt_rp(device)

    def _attempt_rp(self, device: EndDevice) -> None:
        now = self.engine.now
        rng = self._rp_rng[device.id]
        if not device.idle_at(now):
            self.metrics.kind("RP").deferrals += 1
            self.engine.schedule(device.busy_until,
                                 lambda: self._attempt_rp(device), "rp")
            return
        freq_hz = device.pick_rp_channel(rng)
        band = self.plan.subband_of(freq_hz)
        params = device.rp_params()
        air = airtime_us(params, device.rp_payload_len)
        clear_at = self.ledger.check(device.id, band, now, air)
        if clear_at > now:
            self.metrics.kind("RP").deferrals += 1
            self.engine.schedule(clear_at, lambda: self._attempt_rp(device), "rp")
            return
        tx = Transmission(source=device.id, kind=TransmissionKind.RP,
                          freq_hz=freq_hz, params=params, start_us=now,
                          airtime_us=air, payload_len=device.rp_payload_len)
        self._start_uplink(device, tx, band)
        self.engine.schedule(tx.end_us, lambda: self._finish_rp(device, tx), "rp-end")
        self.engine.schedule(device.next_rp_time(now, rng),
                             self._rp_handler(device), "rp")

    def _finish_rp(self, device: EndDevice, tx: Transmission) -> None:
        causes = self._close_uplink(tx)
        stats = self.metrics.kind("RP")
        stats.generated += 1
        first_copy = False
        for gw_id, cause in causes.items():
            self.metrics.on_gateway_outcome("RP", gw_id, cause)
            if cause is None and self.server.on_uplink(tx):
                first_copy = True
        if any(c is None for c in causes.values()):
            stats.delivered += 1
        else:
            stats.add_loss(system_cause(causes))
        if first_copy:
            self._request_dcp(device, tx)

    # -- shared uplink mechanics ---------------------------------------------------

    def _start_uplink(self, device: EndDevice, tx: Transmission, band: SubBand) -> None:
        device.mark_transmitting(tx.start_us, tx.end_us)
        device.open_rx_windows(tx.end_us, tx.freq_hz, tx.params.sf)
        self.ledger.record(device.id, band, tx.start_us, tx.airtime_us)
        if self.transmission_log is not None:
            self.transmission_log.append(tx)
        for gw in self.gateways.values():
            gw.on_uplink_start(tx, tx.start_us)

    def _close_uplink(self, tx: Transmission) -> dict[str, str | None]:
        now = self.engine.now
        return {gw_id: gw.on_uplink_end(tx, now, self.capture, self._capture_rng[gw_id])
                for gw_id, gw in self.gateways.items()}

    # -- control downlinks -----------------------------------------------------------

    def _request_dcp(self, device: EndDevice, rp: Transmission) -> None:
        cluster = self.server.cluster_of(device.id)
        gw = self.gateways[cluster.dcp_gateway]
        command = self.server.dcp_for(device.id)
        self.metrics.dcp["requested"] += 1
        rx1_at = rp.end_us + device.receive_delay1_us
        rx2_at = rp.end_us + device.receive_delay2_us
        # Uplink to server and command back to the gateway: one backhaul
        # round trip must beat the receive window.
        ready_at = self.engine.now + 2 * gw.backhaul_delay_us
        if ready_at <= rx1_at:
            self.engine.schedule(
                rx1_at, lambda: self._attempt_dcp(device, command, gw, rp, 1), "dl")
        elif ready_at <= rx2_at:
            self.metrics.dcp["skipped_too_late"] += 1
            self.engine.schedule(
                rx2_at, lambda: self._attempt_dcp(device, command, gw, rp, 2), "dl")
        else:
            self.metrics.dcp["skipped_too_late"] += 1

    def _attempt_dcp(self, device: EndDevice, command: DcpCommand, gw: Gateway,
                     rp: Transmission, window: int) -> None:
        now = self.engine.now
        if gw.role != "full":
            self.metrics.dcp["skipped_rx_only"] += 1
            return
        if window == 1:
            freq_hz, sf = rp.freq_hz, rp.params.sf
        else:
            freq_hz, sf = RX2_FREQ_HZ, RX2_SF
        if gw.tx_busy_until > now:
            # The gateway already committed to an overlapping downlink;
            # conflicting programming is rejected, not deferred.
            self.metrics.dcp["skipped_tx_busy"] += 1
            return
        band = self.plan.subband_of(freq_hz)
        air = airtime_us(RadioParams(sf=sf), self.scenario.dcp_payload_len)
        if not self.ledger.permitted(gw.id, band, now, air):
            if window == 1:
                # Window 1 blocked by the sub-band budget: retry in window 2,
                # which lives on the high-duty band.
                rx2_at = rp.end_us + device.receive_delay2_us
                self.engine.schedule(
                    rx2_at, lambda: self._attempt_dcp(device, command, gw, rp, 2), "dl")
            else:
                self.metrics.dcp["skipped_duty_cycle"] += 1
            return
        listening = (device.window_open_at(now, freq_hz, sf)
                     and device.idle_at(now))
        gw.start_downlink(now, air)
        self.ledger.record(gw.id, band, now, air)
        self.metrics.dcp["sent_rx1" if window == 1 else "sent_rx2"] += 1
        self.engine.schedule(
            now + air,
            lambda: self._finish_dcp(device, command, now, listening), "dl-end")

    def _finish_dcp(self, device: EndDevice, command: DcpCommand,
                    started_at: SimTime, listening: bool) -> None:
        now = self.engine.now
        if not listening:
            self.metrics.dcp["missed_window"] += 1
            return
        if device.transmitted_during(started_at, now):
            self.metrics.dcp["missed_device_busy"] += 1
            return
        if device.apply_dcp(command):
            self.metrics.dcp["received"] += 1
        else:
            self.metrics.dcp["missed_window"] += 1


def run_scenario(scenario: Scenario, seed: int | None = None) -> dict:
    """Convenience one-shot: build, run, and report."""
    return Simulation(scenario, seed=seed).run()
