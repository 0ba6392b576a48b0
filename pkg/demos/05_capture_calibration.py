"""Synchronized-pair collisions reproduce the calibrated capture table.

Two cluster devices alarm at exactly the same instant, so every urgent
uplink collides with its partner's.  Under the empirical capture model each
frame survives its interferer with a calibrated per-SF-pair probability;
running 20000 such pairs recovers the configured joint-loss rates:

  both at SF7 (same channel)       -> both lost ~29.66% of the time
  one SF7, one SF8 (same channel)  -> both lost ~0.12% of the time

Run: python3 demos/05_capture_calibration.py   (a few seconds)
"""

import collections

from loraguard.metrics import wilson_interval
from loraguard.scenario import load_scenario, shipped_scenario_path
from loraguard.simulation import Simulation

TARGETS = {
    "calibration_pairs_sf7": 0.2966,
    "calibration_pairs_sf7_sf8": 0.0012,
}


def main() -> None:
    for name, target in TARGETS.items():
        scenario = load_scenario(shipped_scenario_path(name))
        sfs = sorted(d.assignment[1] for d in scenario.devices if d.assignment)
        print(f"{name}: SF pair {sfs}, target joint loss {target:.2%}")
        sim = Simulation(scenario)
        sim.run()

        pairs = collections.defaultdict(list)
        for outcome in sim.up_outcomes:
            pairs[outcome.trigger_us].append(outcome)
        both_lost = sum(1 for group in pairs.values()
                        if not any(o.delivered for o in group))
        n = len(pairs)
        lo, hi = wilson_interval(both_lost, n)
        verdict = "contains" if lo <= target <= hi else "MISSES"
        print(f"  {n} synchronized pairs, both lost in {both_lost} "
              f"-> {both_lost / n:.4%}")
        print(f"  95% CI [{lo:.4%}, {hi:.4%}] {verdict} the configured {target:.2%}\n")

    print("The same machinery drives every overlap in the full simulator; these")
    print("scenarios just isolate it from duty-cycle and downlink interference.")


if __name__ == "__main__":
    main()
