"""Volume of a marble over time for each coating under the constant-rate evaporation model."""
import argparse

from marblegate.lifetime import apply_evaporation, time_to_dryout
from marblegate.physics import CoatingKind, Marble, Vec2, standard_coating


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--volume", type=float, default=10.0, help="initial volume, uL")
    ap.add_argument("--step", type=float, default=10.0, help="minutes between rows")
    args = ap.parse_args()

    marbles = {k: Marble(k.value, Vec2(0, 0), Vec2(0, 0), args.volume, standard_coating(k)) for k in CoatingKind}
    horizon = max(time_to_dryout(m) for m in marbles.values())
    print("minutes," + ",".join(k.value for k in marbles))
    t = 0.0
    while t <= horizon + args.step:
        print(f"{t:g}," + ",".join(f"{apply_evaporation(m, t).volume:.4f}" for m in marbles.values()))
        t += args.step
    print()
    for k, m in sorted(marbles.items(), key=lambda kv: time_to_dryout(kv[1])):
        print(f"{k.value:9s} dries out after {time_to_dryout(m):.2f} min")


if __name__ == "__main__":
    main()
