"""Command-line front end: ``hetwsn run`` and ``hetwsn compare``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from hetwsn.engine import SimulationConfig, run_fast
from hetwsn.metrics import comparison_report, export_csv
from hetwsn.protocols import ProtocolKind
from hetwsn.scenario import PRESETS, Scenario, ScenarioError, load_file, resolve


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetwsn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=sorted(PRESETS), help="parameter preset (default case1)")
        p.add_argument("--config", type=Path, help="YAML/JSON scenario file")
        p.add_argument("--rounds", type=int, dest="max_rounds", help="maximum number of rounds")
        p.add_argument("--out", help="output directory (default results)")

    run = sub.add_parser("run", help="run one simulation")
    common(run)
    run.add_argument("--protocol", choices=[k.value for k in ProtocolKind])
    run.add_argument("--seed", type=int)

    cmp_ = sub.add_parser("compare", help="run every protocol x seed cell and compare")
    common(cmp_)
    cmp_.add_argument("--protocol", action="append", dest="protocols",
                      choices=[k.value for k in ProtocolKind],
                      help="protocol to include; repeat for several")
    seeds = cmp_.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=int, help="use seeds 0..N-1")
    seeds.add_argument("--seed", type=int, help="a single seed")
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def _scenario(args) -> Scenario:
    file_values = load_file(args.config) if args.config else {}
    overrides = {"max_rounds": args.max_rounds, "out": args.out}
    if args.command == "run":
        overrides.update(protocol=args.protocol, seed=args.seed)
    else:
        overrides["protocols"] = args.protocols
        if args.seeds is not None:
            overrides["seeds"] = args.seeds
        elif args.seed is not None:
            overrides["seeds"] = [args.seed]
    return resolve(file_values, overrides, preset=args.preset)


def run_cell(cfg: SimulationConfig, outdir: Path):
    """Run one (protocol, seed) cell and write its trace and summary."""
    result = run_fast(cfg)
    trace = result.trace
    cell = outdir / cfg.protocol.value / str(cfg.seed)
    cell.mkdir(parents=True, exist_ok=True)
    export_csv(trace, cell / "trace.csv")
    s = trace.summary
    summary = {
        "protocol": cfg.protocol.value,
        "seed": cfg.seed,
        "fnd": s.fnd,
        "hnd": s.hnd,
        "lnd": s.lnd,
        "total_packets": s.total_packets,
        "rounds_simulated": s.rounds_simulated,
        "initial_energy_j": result.initial_total,
        "final_residual_j": trace.rows[-1].residual_j if trace.rows else result.initial_total,
    }
    (cell / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return trace


def _fmt_summary(name: str, s) -> str:
    show = lambda v: "-" if v is None else str(v)  # noqa: E731
    return f"{name}: fnd={show(s.fnd)} hnd={show(s.hnd)} lnd={show(s.lnd)} total_packets={s.total_packets}"


def cmd_run(args) -> int:
    scenario = _scenario(args)
    cfg = scenario.base
    trace = run_cell(cfg, scenario.out)
    print(_fmt_summary(f"{cfg.protocol.value} seed={cfg.seed}", trace.summary))
    print(f"trace written to {scenario.out / cfg.protocol.value / str(cfg.seed) / 'trace.csv'}")
    return 0


def cmd_compare(args) -> int:
    scenario = _scenario(args)
    if len(set(scenario.protocols)) < 2:
        raise ScenarioError("protocols", "compare requires >=2 protocols")
    protocols = list(dict.fromkeys(scenario.protocols))
    cells = [(p, s) for p in protocols for s in scenario.seeds]
    configs = [scenario.config(p, s) for p, s in cells]
    out = scenario.out
    out.mkdir(parents=True, exist_ok=True)

    traces, failed = {}, []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(run_cell, cfg, out) for cfg in configs]
            outcomes = []
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except Exception as exc:  # report every failed cell, keep going
                    outcomes.append(exc)
    else:
        outcomes = []
        for cfg in configs:
            try:
                outcomes.append(run_cell(cfg, out))
            except Exception as exc:
                outcomes.append(exc)
    for (p, s), result in zip(cells, outcomes):
        if isinstance(result, Exception):
            failed.append(f"{p.value}/{s}: {result}")
        else:
            traces[(p, s)] = result

    if failed:
        print(f"{len(failed)} of {len(cells)} runs failed:", file=sys.stderr)
        for line in failed:
            print(f"  {line}", file=sys.stderr)
        return 1

    groups = {p.value: [traces[(p, s)] for s in scenario.seeds] for p in protocols}
    report = comparison_report(groups, out)
    (out / "report.txt").write_text(report)
    print(report, end="")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_compare(args)
    except ScenarioError as exc:
        print(f"hetwsn: bad configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hetwsn: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
