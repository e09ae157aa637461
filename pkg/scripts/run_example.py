"""Print the worked trip's itinerary, heat ledger and static-path comparison."""
import argparse

from heatpath.activity import Demographic
from heatpath.baseline import HeatCategoryTable, additive_exposure, baseline_trajectory, dijkstra_route
from heatpath.exposure import simulate_heat
from heatpath.fixtures import EXAMPLE_DEPART, EXAMPLE_DEST, EXAMPLE_ORIGIN, worked_example_bundle
from heatpath.transit import plan_trip, trace_trajectory


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--no-nws", action="store_true", help="skip the heat-index adjustments")
    args = ap.parse_args(argv)
    b = worked_example_bundle()
    it = plan_trip(b.net, EXAMPLE_ORIGIN, EXAMPLE_DEST, EXAMPLE_DEPART, access_mode="bike")
    traj = trace_trajectory(b.net, it, "example")
    led = simulate_heat(traj, Demographic.AVERAGE_ADULT, b.field, nws=not args.no_nws)
    print(f"{'period':<10}{'mode':<9}{'t_min':>7}{'HI':>8}{'rho':>11}{'eta':>11}{'P':>11}{'D':>8}  flag")
    for p in led.periods:
        hi = "" if p.hi_mean is None else f"{p.hi_mean:.1f}"
        print(f"{p.kind:<10}{p.mode:<9}{p.duration_min:>7.1f}{hi:>8}{p.rho:>11.3g}{p.eta:>11.3g}"
              f"{p.burden:>11.4g}{p.deficit:>8.3f}  {int(p.flag)}")
    print(f"E_HI {led.e_hi:.3f} min  P_max {led.p_max:.4g}  R_HI {int(led.r_hi)}  "
          f"continued {led.continued_min:.2f} min")
    path = dijkstra_route(b.net, EXAMPLE_ORIGIN, EXAMPLE_DEST, access_mode="bike")
    btraj = baseline_trajectory(path, EXAMPLE_DEPART, "example")
    cats = HeatCategoryTable.from_csv()
    print(f"timetabled {traj.duration_s / 60:.1f} min, static {btraj.duration_s / 60:.1f} min; additive score "
          f"{additive_exposure(traj, b.field, cats).total:.1f} vs {additive_exposure(btraj, b.field, cats).total:.1f}")


if __name__ == "__main__":
    main()
