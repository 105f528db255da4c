"""Measured decoy error of the rotation-family entangling probe against theta.

Writes CSV rows ``theta, z_measured, z_predicted, x_measured, x_predicted``.

    python3 scripts/entangle_sweep.py --steps 9 --output rot.csv
"""

import argparse
import csv
import math
import sys

from qsdc.adversaries import rotation_params
from qsdc.harness import ScenarioConfig, run_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=9)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--channel-decoys", type=int, default=200)
    ap.add_argument("--seed", type=int, default=3 << 40)
    ap.add_argument("--output")
    args = ap.parse_args()

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["theta", "z_measured", "z_predicted", "x_measured", "x_predicted"])
    for i in range(args.steps):
        theta = (math.pi / 2) * i / max(1, args.steps - 1)
        params = rotation_params(theta)
        cfg = ScenarioConfig(protocol="modified", attack="entangle-measure", ue=f"rot:{theta!r}", n=8,
                             channel_decoys=args.channel_decoys, trials=args.trials, base_seed=args.seed)
        agg = run_scenario(cfg)
        writer.writerow([f"{theta:.6g}", f"{agg.mean('z_decoy_error_rate'):.6g}", f"{params.predicted_z_error:.6g}",
                         f"{agg.mean('x_decoy_error_rate'):.6g}", f"{params.predicted_x_error:.6g}"])
    if args.output:
        out.close()


if __name__ == "__main__":
    main()
