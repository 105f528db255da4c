"""Every attack against the modified protocol, one summary row each.

    python3 scripts/modified_security.py --trials 500 --message-bits 16 --id-bits 8
"""

import argparse

from qsdc.harness import ScenarioConfig, run_scenario

COLUMNS = ("decoy_error_rate", "detected", "eve_bit_accuracy", "alice_accepts_bob", "message_bit_error_rate")


def fmt(x):
    return "-" if x is None else f"{x:.4f}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--message-bits", type=int, default=16)
    ap.add_argument("--id-bits", type=int, default=8)
    ap.add_argument("--channel-decoys", type=int, default=32)
    ap.add_argument("--dos-p", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=2 << 40)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    runs = [
        ("none", {}),
        ("intercept-resend", {}),
        ("impersonation", {}),
        ("mitm", {}),
        ("dos", {"dos_p": args.dos_p}),
        ("dos", {"dos_p": args.dos_p, "threshold": 1.0, "auth_tolerance": args.id_bits}),
        ("entangle-measure", {"ue": "identity"}),
        ("entangle-measure", {"ue": "cnot"}),
    ]
    print(f"{'attack':<34}" + "".join(f"{c:>24}" for c in COLUMNS))
    for attack, extra in runs:
        cfg = ScenarioConfig(protocol="modified", attack=attack, n=args.message_bits, k=args.id_bits,
                             channel_decoys=args.channel_decoys, trials=args.trials, base_seed=args.seed, **extra)
        agg = run_scenario(cfg, args.workers)
        label = attack + "".join(f" {k}={v}" for k, v in extra.items())
        print(f"{label:<34}" + "".join(f"{fmt(agg.mean(c)):>24}" for c in COLUMNS))


if __name__ == "__main__":
    main()
