"""Write SVG trajectory overlays and trace CSVs for the bundled circuits."""
import argparse
import os

from marblegate import logic, netlist
from marblegate.physics import CollisionModel
from marblegate.trace import to_svg

RUNS = [
    ("gate", {"A": 1, "B": 0}, None, "gate_A"),
    ("gate", {"A": 0, "B": 1}, None, "gate_B"),
    ("gate", {"A": 1, "B": 1}, None, "gate_AB_ssm"),
    ("gate", {"A": 1, "B": 1}, CollisionModel.BBM, "gate_AB_bbm"),
    ("gate", {"A": 1, "B": 1}, CollisionModel.FUSION_ONLY, "gate_AB_fusion"),
    ("half_adder", {"A": 1, "B": 1}, None, "half_adder_11"),
    ("full_adder", {"A": 1, "B": 1, "Cin": 0}, None, "full_adder_110"),
    ("full_adder", {"A": 0, "B": 1, "Cin": 1}, None, "full_adder_011"),
    ("full_adder", {"A": 0, "B": 1, "Cin": 0}, None, "full_adder_010"),
    ("full_adder", {"A": 1, "B": 1, "Cin": 1}, None, "full_adder_111"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    specs = {}
    for name, assignment, model, stem in RUNS:
        spec = specs.setdefault(name, netlist.load(netlist.bundled_path(name)))
        row = logic.run_row(spec, assignment, model=model, sample_hz=120.0)
        with open(os.path.join(args.out, stem + ".svg"), "w") as fh:
            fh.write(to_svg(row.trace))
        with open(os.path.join(args.out, stem + ".csv"), "w") as fh:
            fh.write(row.trace.to_csv())
        finals = ", ".join(f"{k}={v:.2f}" for k, v in logic.final_positions(row.trace).items())
        print(f"{stem:16s} {row.status:6s} {row.outputs}  final x: {finals}")

    gate = specs["gate"]
    for model in (None, CollisionModel.BBM):
        runs = [logic.run_row(gate, a, model=model).trace for a in ({"A": 1, "B": 1}, {"A": 1, "B": 0}, {"A": 0, "B": 1})]
        print(f"model {model.value if model else 'ssm'}: classified as {logic.classify_model(*runs).value}")


if __name__ == "__main__":
    main()
