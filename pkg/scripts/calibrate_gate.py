"""Sweep latch hold positions on the standard gate and find the bounce/coalesce release points."""
import argparse

from marblegate import calibrate, netlist


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--netlist", default="gate")
    ap.add_argument("--sweep", type=int, default=8, help="number of hold positions in the sweep")
    args = ap.parse_args()

    spec = netlist.load(netlist.resolve(args.netlist))
    length = min(r.length for r in spec.ramps)
    print("hold_mm,impact_mps,outcome")
    for i in range(args.sweep):
        hold = length - 2.0 - i * 1.0
        rec = calibrate.impact(spec, hold)
        print(f"{hold:.3f},{rec.event.normal_speed:.5f},{rec.outcome}")

    slow = calibrate.calibrate(spec, 0.21)
    fast = calibrate.calibrate(spec, spec.physics_config().v_coalesce, above=True)
    print(f"\n0.21 m/s: hold {slow.hold:.4f} mm -> {slow.speed:.5f} m/s, {slow.outcome}")
    print(f"0.29 m/s: hold {fast.hold:.4f} mm -> {fast.speed:.5f} m/s, {fast.outcome}")


if __name__ == "__main__":
    main()
