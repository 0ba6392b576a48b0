"""Simulated urgent-uplink loss vs the analytic renewal-model prediction.

Runs the shipped downlink-priority scenario (8 reporting devices soliciting
control downlinks every 70 s through one half-duplex gateway; one of them
also sends 20000 urgent uplinks at SF9) and compares the measured loss rate
against the closed-form prediction computed from the same parameters.

Run: python3 demos/04_sim_vs_model.py   (about 10 s)
"""

import time

from loraguard.analytic import plr_exact_fixed
from loraguard.engine import US_PER_SECOND
from loraguard.phy import RadioParams, airtime_us
from loraguard.scenario import load_scenario, shipped_scenario_path
from loraguard.simulation import Simulation


def main() -> None:
    scenario = load_scenario(shipped_scenario_path("test2_dl_priority"))
    reporters = [d for d in scenario.devices if d.rp_period_us is not None]
    sender = scenario.device("ed8")
    assert sender.assignment is not None

    dcp_airtimes = [airtime_us(RadioParams(sf=d.rp_sf), scenario.dcp_payload_len)
                    / US_PER_SECOND for d in reporters]
    up_air = airtime_us(RadioParams(sf=sender.assignment[1]),
                        sender.up_payload_len) / US_PER_SECOND
    period = reporters[0].rp_period_us / US_PER_SECOND
    sigma = reporters[0].clock_sigma_us / US_PER_SECOND

    predicted = plr_exact_fixed(dcp_airtimes, up_air, period, sigma)
    print(f"Scenario: {scenario.name} (seed {scenario.seed})")
    print(f"  {len(reporters)} reporting devices, control downlink "
          f"{dcp_airtimes[0] * 1000:.1f} ms each {period:.0f} s")
    print(f"  urgent uplink {up_air * 1000:.1f} ms at SF{sender.assignment[1]}")
    print(f"\nAnalytic prediction: PLR = {predicted.plr:.4%}")

    print(f"\nSimulating {scenario.stop.ups} urgent uplinks ...")
    started = time.perf_counter()
    report = Simulation(scenario).run()
    elapsed = time.perf_counter() - started
    up = report["kinds"]["UP"]
    lo, hi = up["plr_ci95"]
    print(f"  done in {elapsed:.1f} s")
    print(f"  delivered {up['delivered']} / {up['generated']}, "
          f"losses by cause: {up['losses']}")
    print(f"  measured PLR = {up['plr']:.4%}   95% CI [{lo:.4%}, {hi:.4%}]")

    inside = lo <= predicted.plr <= hi
    print(f"\nPrediction {'inside' if inside else 'OUTSIDE'} the simulation's "
          "95% confidence interval.")


if __name__ == "__main__":
    main()
