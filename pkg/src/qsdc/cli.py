"""Command-line entry point.

    qsdc run --protocol yzcss --attack intercept-resend --message-bits 16 --trials 1000
    qsdc sweep --protocol modified --message-bits 4,8,16 --id-bits 2,4,8
    qsdc verify-paper-examples

Exit codes: 0 ok, 1 ``--assert`` failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import operator
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .harness import ATTACKS, METRICS, PROTOCOLS, AggregateReport, ConfigError, ScenarioConfig, run_scenario
from .report import emit_report, summary_lines
from .worked_examples import verify_worked_examples

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# flag name -> ScenarioConfig field
FLAG_FIELDS = {
    "protocol": "protocol",
    "attack": "attack",
    "message_bits": "n",
    "id_bits": "k",
    "channel_decoys": "channel_decoys",
    "trials": "trials",
    "seed": "base_seed",
    "dos_p": "dos_p",
    "ue": "ue",
    "threshold": "threshold",
    "auth_tolerance": "auth_tolerance",
    "integrity_fraction": "integrity_fraction",
}
LIST_FLAGS = ("message_bits", "id_bits")

_OPS = {"==": operator.eq, "!=": operator.ne, ">=": operator.ge, "<=": operator.le, ">": operator.gt, "<": operator.lt}
_ASSERT_RE = re.compile(r"^\s*([a-z_]+)\s*(==|!=|>=|<=|>|<)\s*([-+0-9.eE]+)\s*$")


@dataclass(frozen=True)
class Assertion:
    metric: str
    op: str
    value: float

    def check(self, agg: AggregateReport) -> bool:
        mean = agg.mean(self.metric)
        return mean is not None and _OPS[self.op](mean, self.value)

    def __str__(self) -> str:
        return f"{self.metric}{self.op}{self.value:g}"


@dataclass
class CliInvocation:
    subcommand: str
    configs: list[ScenarioConfig] = field(default_factory=list)
    output: Path | None = None
    fmt: str = "json"
    asserts: list[Assertion] = field(default_factory=list)
    workers: int = 1
    quiet: bool = False


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _ue(text: str) -> str:
    if text in ("identity", "cnot") or re.fullmatch(r"rot:[-+0-9.eE]+", text):
        return text
    raise argparse.ArgumentTypeError("expected identity, cnot or rot:<theta>")


def _assertion(text: str) -> Assertion:
    m = _ASSERT_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"malformed assertion {text!r}")
    metric, op, value = m.groups()
    if metric not in METRICS:
        raise argparse.ArgumentTypeError(f"unknown metric {metric!r}")
    try:
        return Assertion(metric, op, float(value))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number in {text!r}") from None


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with the same keys as the flags")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--attack", choices=ATTACKS)
    p.add_argument("--message-bits", type=_int_list, metavar="N")
    p.add_argument("--id-bits", type=_int_list, metavar="K")
    p.add_argument("--channel-decoys", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="base seed (default: $QSDC_SEED or 0)")
    p.add_argument("--dos-p", type=float)
    p.add_argument("--ue", type=_ue, help="identity | cnot | rot:<theta>")
    p.add_argument("--threshold", type=float)
    p.add_argument("--auth-tolerance", type=int)
    p.add_argument("--integrity-fraction", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", type=Path)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--assert", dest="asserts", action="append", type=_assertion, default=[])
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsdc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    _add_scenario_flags(sub.add_parser("run", help="run one scenario"))
    _add_scenario_flags(sub.add_parser("sweep", help="run a grid over message and identity lengths"))
    sub.add_parser("verify-paper-examples", help="replay the three worked examples")
    return parser


def _load_config_file(path: Path, parser: argparse.ArgumentParser) -> dict:
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        parser.error(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        parser.error(f"config {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        parser.error("config file must hold a JSON object")
    out = {}
    for key, value in raw.items():
        flag = key.replace("-", "_")
        if flag not in FLAG_FIELDS:
            parser.error(f"unknown config key {key!r}")
        if flag in LIST_FLAGS and not isinstance(value, list):
            value = [value]
        out[flag] = value
    return out


def parse_invocation(argv: Sequence[str] | None = None) -> CliInvocation:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "verify-paper-examples":
        return CliInvocation("verify-paper-examples")

    values = _load_config_file(args.config, parser) if args.config else {}
    for flag in FLAG_FIELDS:
        v = getattr(args, flag)
        if v is not None:
            values[flag] = v
    if "seed" not in values:
        env = os.environ.get("QSDC_SEED")
        try:
            values["seed"] = int(env) if env else 0
        except ValueError:
            parser.error(f"QSDC_SEED must be an integer, got {env!r}")

    ns = values.get("message_bits", [8])
    ks = values.get("id_bits", [None])
    if args.subcommand == "run" and (len(ns) != 1 or len(ks) != 1):
        parser.error("run takes a single --message-bits and --id-bits value")
    fixed = {FLAG_FIELDS[f]: v for f, v in values.items() if f not in LIST_FLAGS}

    configs = []
    for n, k in itertools.product(ns, ks):
        if args.subcommand == "sweep" and k is not None and k > n:
            continue
        try:
            configs.append(ScenarioConfig(n=n, k=k, **fixed))
        except (ConfigError, ValueError, TypeError) as exc:
            parser.error(str(exc))
    if not configs:
        parser.error("sweep grid has no valid (N, k) combination")
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    return CliInvocation(
        subcommand=args.subcommand,
        configs=configs,
        output=args.output,
        fmt=args.format,
        asserts=list(args.asserts),
        workers=args.workers,
        quiet=args.quiet,
    )


def run_verify(out=None) -> int:
    out = out or sys.stdout
    start = time.perf_counter()
    results = verify_worked_examples()
    for r in results:
        print(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: {r.detail}", file=out)
    print(f"{sum(r.ok for r in results)}/{len(results)} examples match "
          f"({time.perf_counter() - start:.3f} s)", file=out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_ASSERT


def run_invocation(inv: CliInvocation, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if inv.subcommand == "verify-paper-examples":
        return run_verify(out)
    aggs = [run_scenario(c, inv.workers) for c in inv.configs]
    if not inv.quiet:
        for agg in aggs:
            print("\n".join(summary_lines(agg)), file=out)
    if inv.output is not None:
        payload = emit_report(aggs[0] if inv.subcommand == "run" else aggs, inv.fmt)
        try:
            inv.output.write_bytes(payload)
        except OSError as exc:
            print(f"error: cannot write {inv.output}: {exc}", file=err)
            return EXIT_IO
    failed = [(a, agg) for agg in aggs for a in inv.asserts if not a.check(agg)]
    for a, agg in failed:
        s = agg.scenario
        print(f"assertion failed: {a} (got {agg.mean(a.metric)}) for N={s['n']} k={s['k']}", file=err)
    return EXIT_ASSERT if failed else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    return run_invocation(parse_invocation(argv))


if __name__ == "__main__":
    sys.exit(main())
