"""Gateway radio model: demodulation paths, half-duplex downlink preemption.

A gateway is half-duplex across its whole radio: starting a downlink aborts
every in-progress reception on every channel, and uplinks arriving while the
gateway transmits are lost.  Reception capacity is limited by the number of
parallel demodulation paths.  An ``rx_only`` gateway never transmits, so it
never self-preempts; it is still subject to collisions and path exhaustion.

The per-uplink contract is: ``on_uplink_start`` at the frame's first sample,
``on_uplink_end`` at its last, which returns the gateway's final outcome for
the frame (``None`` = decoded, otherwise a loss cause).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import SimTime
from .metrics import (CAUSE_COLLISION, CAUSE_GW_PREEMPTED, CAUSE_NO_DEMOD_PATH,
                      CAUSE_TX_BUSY)
from .phy import CaptureModel, Transmission, decodes_against

DEMOD_PATHS_DEFAULT = 10


@dataclass
class Reception:
    """One uplink currently occupying a demodulation path."""

    tx: Transmission
    # (sf, rx power) of every co-channel frame that overlapped this one.
    interferers: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class DownlinkRequest:
    """A control downlink the server asked its gateway to radiate."""

    command: object  # DcpCommand; opaque at this layer
    target: str
    freq_hz: int
    sf: int
    payload_len: int
    window: int  # 1 or 2


@dataclass
class Gateway:
    """State of one gateway radio."""

    id: str
    role: str = "full"  # "full" transmits downlinks, "rx_only" never does
    demod_paths: int = DEMOD_PATHS_DEFAULT
    backhaul_delay_us: SimTime = 20_000
    rx_power_dbm: dict[str, float] = field(default_factory=dict)

    # runtime state
    tx_busy_until: SimTime = 0
    active: dict[int, Reception] = field(default_factory=dict)
    finished: dict[int, str] = field(default_factory=dict)  # early loss causes
    # uid -> (sf, power, end_us) per channel for every frame on the air,
    # whether or not it holds a demod path: dropped frames still radiate.
    on_air: dict[int, dict[int, tuple[int, float, SimTime]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.role not in ("full", "rx_only"):
            raise ValueError(f"{self.id}: role must be 'full' or 'rx_only'")
        if self.demod_paths < 1:
            raise ValueError(f"{self.id}: demod_paths must be >= 1")

    def _power_of(self, source: str) -> float:
        return self.rx_power_dbm.get(source, 0.0)

    def on_uplink_start(self, tx: Transmission, now: SimTime) -> None:
        """Register an arriving uplink.

        The frame joins the channel's interference set and is stamped onto
        every overlapping reception regardless of whether it wins a
        demodulation path itself.
        """
        channel = self.on_air.setdefault(tx.freq_hz, {})
        ended = [uid for uid, (_sf, _p, end) in channel.items() if end <= now]
        for uid in ended:
            del channel[uid]
        power = self._power_of(tx.source)
        for uid in channel:
            reception = self.active.get(uid)
            if reception is not None:
                reception.interferers.append((tx.params.sf, power))
        interferers_seen = [(sf, p) for (sf, p, _end) in channel.values()]
        channel[tx.uid] = (tx.params.sf, power, tx.end_us)

        if self.tx_busy_until > now:
            self.finished[tx.uid] = CAUSE_TX_BUSY
        elif len(self.active) >= self.demod_paths:
            self.finished[tx.uid] = CAUSE_NO_DEMOD_PATH
        else:
            self.active[tx.uid] = Reception(tx=tx, interferers=interferers_seen)

    def on_uplink_end(self, tx: Transmission, now: SimTime, model: CaptureModel,
                      rng) -> str | None:
        """Close out an uplink; returns this gateway's loss cause, None if decoded."""
        channel = self.on_air.setdefault(tx.freq_hz, {})
        channel.pop(tx.uid, None)
        cause = self.finished.pop(tx.uid, None)
        if cause is not None:
            return cause
        reception = self.active.pop(tx.uid)
        if not decodes_against(model, tx.params.sf, self._power_of(tx.source),
                               reception.interferers, rng):
            return CAUSE_COLLISION
        return None

    def start_downlink(self, now: SimTime, airtime_us: SimTime) -> int:
        """Begin transmitting: abort every active reception, mark the radio busy.

        While the radio transmits, no reception is active.  Returns the number
        of receptions preempted at this instant.
        """
        if self.role == "rx_only":
            raise RuntimeError(f"{self.id} is receive-only and cannot transmit")
        for uid in self.active:
            self.finished[uid] = CAUSE_GW_PREEMPTED
        preempted = len(self.active)
        self.active.clear()
        self.tx_busy_until = now + airtime_us
        return preempted
