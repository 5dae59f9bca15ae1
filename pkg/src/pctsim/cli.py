"""Command-line entry point.

Three subcommands:

  run        execute one scenario file, write risk/ledger/world CSVs, a
             summary table, and a comparison figure
  scorecard  run the full property suite (or a subset), diff against the
             expected matrices, write scorecard.csv plus a heatmap; exit 0
             only when the diff is empty
  adoption   measure the detection-vs-adoption curve and render it

Exits 0 on success, 1 on simulation or diff failure, 2 on unparsable
input. The default output directory comes from PCTSIM_OUT, falling back
to ./pctsim-out.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .protocol.spec import ALL_PROTOCOLS
from .sim.scenario import Scenario, ScenarioError, load_scenario
from .sim.engine import run as run_sim
from .sim.curves import detection_rate_vs_adoption
from .analysis.scorecard import (
    ExpectedMatrixError,
    build_scorecard,
    load_expected,
    scorecard_diff,
)
from .analysis import report


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get("PCTSIM_OUT", "pctsim-out"))


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(
            args.scenario,
            overrides={"protocol": args.protocol, "rng_seed": args.seed},
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = _out_dir(args.out)
    try:
        result = run_sim(scenario)
    except Exception as exc:  # simulation failure
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    formats = set((args.format or "csv,table,png").split(","))
    written = []
    if "csv" in formats:
        written += report.write_run_csvs(result, out)
        if scenario.adversaries:
            written += report.write_run_adversary_csvs(result, out)
    if "png" in formats:
        written.append(report.render_run_figure(result, out))
    if "table" in formats:
        oracle = result.oracle
        print(f"protocol: {result.protocol.value}")
        print(f"users: {scenario.num_users}  days: {scenario.num_days}  seed: {scenario.rng_seed}")
        print(f"exposed (detected): {len(result.exposed)}  exposed (oracle): {len(oracle.exposed)}")
        missed = sorted(frozenset(oracle.exposed) - result.exposed)
        extra = sorted(result.exposed - frozenset(oracle.exposed))
        print(f"missed: {missed}  spurious: {extra}")
        if result.failed_days:
            print(f"failed days: {result.failed_days}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_scorecard(args) -> int:
    try:
        expected = load_expected(args.expected)
    except ExpectedMatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    only = None
    if args.only:
        names = {p.value for p in ALL_PROTOCOLS}
        only = [p.strip() for p in args.only.split(",")]
        unknown = [p for p in only if p not in names]
        if unknown:
            print(f"error: unknown protocol names {unknown}", file=sys.stderr)
            return 2
    out = _out_dir(args.out)
    try:
        card = build_scorecard(
            protocols=only, seed=args.seed or 0, progress=lambda p: print(f"  running {p} ...")
        )
    except Exception as exc:
        print(f"suite run failed: {exc}", file=sys.stderr)
        return 1
    diffs = scorecard_diff(card, expected, only=only)
    formats = set((args.format or "csv,table,png").split(","))
    if "csv" in formats:
        print(f"wrote {report.write_scorecard_csv(card, diffs, out)}")
        print(f"wrote {report.write_diff_csv(diffs, out)}")
        print(f"wrote {report.write_leakage_csv(card, out)}")
        print(f"wrote {report.write_attacks_csv(card, out)}")
    if "png" in formats:
        print(f"wrote {report.render_scorecard_figure(card, out)}")
    if "table" in formats:
        print(report.scorecard_table(card))
    if diffs:
        print(f"\n{len(diffs)} cell(s) differ from the expected matrices:")
        for d in diffs:
            print(f"  {d.section}/{d.protocol}/{d.cell}: computed={d.computed} expected={d.expected}")
        return 1
    print("\nscorecard matches the expected matrices cell-for-cell")
    return 0


def cmd_adoption(args) -> int:
    points = [float(x) for x in (args.p or "0.3,0.5,0.7,1.0").split(",")]
    scenario = Scenario(
        num_users=2200,
        num_days=6,
        new_patients_per_day=0,
        contacts_per_user_per_day=1,
        protocol=args.protocol or "agreed-server-sdh",
        rng_seed=args.seed or 2026,
        group_kind="toy",
    )
    curve = detection_rate_vs_adoption(scenario, points)
    out = _out_dir(args.out)
    for path in report.write_adoption_outputs(curve, out):
        print(f"wrote {path}")
    for pt in curve:
        print(f"p={pt.adoption:.2f}  rate={pt.rate:.4f}  reference={pt.reference:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pctsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path")
    p_run.add_argument("--protocol", help="override the scenario's protocol")
    p_run.add_argument("--seed", type=int, help="override the scenario's seed")
    p_run.add_argument("--out", help="output directory (default $PCTSIM_OUT or ./pctsim-out)")
    p_run.add_argument("--format", help="comma set of csv,table,png (default all)")
    p_run.set_defaults(func=cmd_run)

    p_card = sub.add_parser("scorecard", help="run the full suite and diff against expectations")
    p_card.add_argument("--expected", help="directory of expected matrices (default packaged)")
    p_card.add_argument("--only", help="comma list of protocol names to restrict the suite")
    p_card.add_argument("--seed", type=int, help="suite seed (default 0)")
    p_card.add_argument("--out", help="output directory")
    p_card.add_argument("--format", help="comma set of csv,table,png (default all)")
    p_card.set_defaults(func=cmd_scorecard)

    p_adopt = sub.add_parser("adoption", help="measure the detection-vs-adoption curve")
    p_adopt.add_argument("--p", help="comma list of adoption rates")
    p_adopt.add_argument("--protocol", help="protocol to measure (default agreed-server-sdh)")
    p_adopt.add_argument("--seed", type=int)
    p_adopt.add_argument("--out", help="output directory")
    p_adopt.set_defaults(func=cmd_adoption)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
