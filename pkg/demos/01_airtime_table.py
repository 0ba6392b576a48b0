"""Time-on-air across spreading factors, and the urgent-uplink SF cut-off.

A 37-byte frame roughly doubles in airtime with each SF step.  Urgent uplinks must
stay under a 500 ms airtime budget, which is why alarm traffic is confined
to SF7-SF10 while SF11/SF12 (with low-data-rate optimization auto-enabled)
are reserved for robustness-over-latency uses like the second receive window.

Run: python3 demos/01_airtime_table.py
"""

from loraguard.phy import RadioParams, airtime_us

BUDGET_US = 500_000
PAYLOAD = 37


def main() -> None:
    print(f"Time-on-air of a {PAYLOAD}-byte frame, 125 kHz, CR 4/5, 8-symbol preamble\n")
    print(f"{'SF':>3} {'symbol time':>12} {'airtime':>12}  {'LDRO':>4}  urgent budget (500 ms)")
    for sf in range(7, 13):
        params = RadioParams(sf=sf)
        air = airtime_us(params, PAYLOAD)
        verdict = "within" if air <= BUDGET_US else "EXCEEDS"
        print(f"{sf:>3} {params.symbol_time_us / 1000:>9.3f} ms "
              f"{air / 1000:>9.3f} ms  {'on' if params.ldro else 'off':>4}  {verdict}")

    print("\nBandwidth cuts airtime proportionally (SF9, same frame):")
    for bw in (125_000, 250_000, 500_000):
        air = airtime_us(RadioParams(sf=9, bw_hz=bw), PAYLOAD)
        print(f"  {bw // 1000:>3} kHz -> {air / 1000:>8.3f} ms")

    print("\nCoding rate trades airtime for redundancy (SF9, 125 kHz):")
    for cr in (1, 2, 3, 4):
        air = airtime_us(RadioParams(sf=9, coding_rate=cr), PAYLOAD)
        print(f"  CR 4/{4 + cr} -> {air / 1000:>8.3f} ms")


if __name__ == "__main__":
    main()
