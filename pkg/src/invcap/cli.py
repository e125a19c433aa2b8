"""Command-line entry point: ``invcap {capacity,saturation,simulate,optimize}``.

Exit status is 0 on success, 1 on a domain error (bad scenario, invalid
measurement input) and 2 on a usage error. Results go to stdout and all
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .capacity import AvailabilityRecord, CapacityError, CapacityInput, capacity_estimate, saturation
from .network import NetworkValidationError
from .planner import ALLOCATORS, PlanningError, Strategy
from .scenario import ScenarioError, echo_scenario, emit_trace, load_scenario, strategy_from_name
from .simulation import run


class DomainError(Exception):
    pass


def _display(x: float) -> str:
    return f"{x:.1f}"


def cmd_capacity(args) -> str:
    records = [AvailabilityRecord(i, a, args.span) for i, a in enumerate(args.availability)]
    report = capacity_estimate(CapacityInput(
        cases_closed=args.cases_closed,
        availabilities=records,
        downtime_fraction=args.downtime,
        current_investigators=args.current,
    ))
    return (
        f"average_investigators {_display(report.average_investigators)}\n"
        f"per_investigator_rate {_display(report.per_investigator_rate)}\n"
        f"downtime_fraction {report.downtime_fraction:g}\n"
        f"current_investigators {_display(report.current_investigators)}\n"
        f"capacity {_display(report.capacity)}\n"
    )


def cmd_saturation(args) -> str:
    ratio = saturation(args.requests, args.capacity)
    state = "backlog growing" if ratio > 1 else "within capacity"
    return f"saturation {ratio:.3f} ({state})\n"


def cmd_simulate(args) -> str:
    doc = load_scenario(args.scenario)
    if args.echo_scenario:
        return echo_scenario(doc)
    trace = run(doc.network(), doc.horizon, doc.seed)
    out = emit_trace(trace, args.format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(out)
        except OSError as exc:
            raise DomainError(f"{args.out}: cannot write output: {exc.strerror}") from None
        return ""
    return out


def cmd_optimize(args) -> str:
    doc = load_scenario(args.scenario)
    opt = doc.optimize
    budget = args.budget if args.budget is not None else (opt.budget_units if opt else None)
    unit = args.unit if args.unit is not None else (opt.unit_size if opt else 1.0)
    strategy_name = args.strategy or (opt.strategy if opt else "greedy")
    if budget is None:
        raise DomainError("no budget given: pass --budget or add an optimize block to the scenario")
    strategy = strategy_from_name(strategy_name)
    objective = doc.objective(args.objective)
    network = doc.network()
    kwargs = {"workers": args.workers} if strategy is not Strategy.SATURATION_HEURISTIC else {}
    plan = ALLOCATORS[strategy](network, budget, unit, objective, **kwargs)

    lines = [
        f"strategy {plan.strategy.value}",
        f"objective {objective.describe()} over {objective.horizon} periods (seed {objective.seed})",
        f"budget {plan.budget_units} x {plan.unit_size:g}",
    ]
    for cid in network.ids:
        lines.append(f"  {cid}: +{plan.allocations.get(cid, 0.0):g}")
    lines += [
        f"baseline_value {plan.baseline_value:g}",
        f"objective_value {plan.objective_value:g}",
        f"gain {plan.gain:g}",
        f"evaluations {plan.evaluations}",
    ]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="invcap", description="Investigation capacity, saturation and "
                                                "cross-border request simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="downtime-adjusted capacity from closed cases")
    p.add_argument("--cases-closed", type=float, required=True)
    p.add_argument("--span", type=float, required=True, help="length of the measurement span")
    p.add_argument("--availability", type=float, action="append", required=True,
                   help="one investigator's available time within the span (repeatable)")
    p.add_argument("--downtime", type=float, default=0.0, help="idle fraction in [0, 1)")
    p.add_argument("--current", type=float, default=None,
                   help="current investigator headcount (default: the computed average)")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("saturation", help="incoming requests divided by capacity")
    p.add_argument("--requests", type=float, required=True)
    p.add_argument("--capacity", type=float, required=True)
    p.set_defaults(func=cmd_saturation)

    p = sub.add_parser("simulate", help="run a scenario and emit its trace")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None, help="write to this file instead of stdout")
    p.add_argument("--format", choices=["csv", "summary"], default="csv")
    p.add_argument("--echo-scenario", action="store_true",
                   help="print the parsed scenario with defaults filled in and exit")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="allocate a capacity budget across countries")
    p.add_argument("--scenario", required=True)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--unit", type=float, default=None)
    p.add_argument("--strategy", choices=sorted(["greedy", "brute", "saturation"]), default=None)
    p.add_argument("--objective", default=None, help="own:ID or global")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = args.func(args)
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (CapacityError, PlanningError, NetworkValidationError, DomainError, ValueError) as exc:
        print(f"invcap {args.command}: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
