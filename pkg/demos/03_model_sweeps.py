"""Analytic urgent-uplink loss model: sweeps over population, period, jitter.

An urgent uplink of airtime D is lost when it overlaps a downlink control
packet (airtime tau) that each of N reporting devices solicits once per
period T.  The renewal model integrates the residual-time density of each
device's cycle; the quick approximation N*(tau+D)/T is accurate when the
blocking fraction is small.

Run: python3 demos/03_model_sweeps.py
"""

from loraguard.analytic import PlrModelParams, plr_approx, plr_exact_fixed, plr_marginal

TAU = 0.082176   # 37-byte SF7 downlink control packet, seconds
UP = 0.267264    # 37-byte SF9 urgent uplink, seconds
T = 70.0         # report period, seconds
SIGMA = 0.05     # report clock jitter, seconds


def main() -> None:
    print(f"Fixed airtimes: tau = {TAU * 1000:.1f} ms (control downlink), "
          f"D = {UP * 1000:.1f} ms (urgent uplink)\n")

    print(f"PLR vs number of reporting devices (T = {T:.0f} s):")
    print(f"{'N':>4} {'exact':>9} {'approx':>9} {'rel err':>9}  regime")
    for n in (1, 2, 4, 8, 16, 32):
        exact = plr_exact_fixed([TAU] * n, UP, T, SIGMA)
        approx = plr_approx(n, TAU, UP, T)
        rel = abs(approx.plr - exact.plr) / exact.plr
        regime = "ok" if approx.in_regime else "outside validity regime"
        print(f"{n:>4} {exact.plr:>9.5f} {approx.plr:>9.5f} {rel:>9.2%}  {regime}")

    print(f"\nPLR vs report period (N = 8):")
    print(f"{'T [s]':>6} {'exact PLR':>10}")
    for period in (30.0, 50.0, 70.0, 120.0, 300.0):
        exact = plr_exact_fixed([TAU] * 8, UP, period, SIGMA)
        print(f"{period:>6.0f} {exact.plr:>10.5f}")

    print(f"\nClock jitter barely matters while sigma << T (N = 8, T = {T:.0f} s):")
    base = plr_exact_fixed([TAU] * 8, UP, T, 0.0).plr
    for sigma in (0.0, 0.007, 0.05, 0.7):
        plr = plr_exact_fixed([TAU] * 8, UP, T, sigma).plr
        print(f"  sigma = {sigma * 1000:>6.1f} ms -> PLR {plr:.6f} "
              f"(shift {abs(plr - base) / base:.4%})")

    print("\nMixed downlink airtimes via the marginal evaluator")
    print("(half the control packets at SF7, half at SF8):")
    params = PlrModelParams(
        n_senders=8, period_s=T, sigma_s=SIGMA,
        dcp_airtimes=((0.082176, 0.5), (0.143872, 0.5)),
        up_airtimes=((UP, 1.0),))
    mixed = plr_marginal(params)
    lo = plr_exact_fixed([0.082176] * 8, UP, T, SIGMA).plr
    hi = plr_exact_fixed([0.143872] * 8, UP, T, SIGMA).plr
    print(f"  all-SF7 {lo:.5f}  <  mixture {mixed.plr:.5f}  <  all-SF8 {hi:.5f}")


if __name__ == "__main__":
    main()
