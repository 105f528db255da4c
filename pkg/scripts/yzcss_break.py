"""Intercept-resend and impersonation against the original protocol.

    python3 scripts/yzcss_break.py --trials 1000 --message-bits 16
"""

import argparse

from qsdc.harness import ScenarioConfig, run_scenario
from qsdc.report import summary_lines


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--message-bits", type=int, default=16)
    ap.add_argument("--seed", type=int, default=1 << 40)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for attack in ("intercept-resend", "impersonation"):
        cfg = ScenarioConfig(protocol="yzcss", attack=attack, n=args.message_bits,
                             trials=args.trials, base_seed=args.seed)
        print("\n".join(summary_lines(run_scenario(cfg, args.workers))))
        print()


if __name__ == "__main__":
    main()
