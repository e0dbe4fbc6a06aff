"""citybrain command line.

Exit status: 0 success, 1 runtime error, 2 invalid input (unparseable or
invalid scenario, unreadable file, corrupt log, bad flags).
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from .errors import CityBrainError, CorruptRecord, InvalidParams, ScenarioError
from .eventlog import EventKind, EventLog, log_digest, read_log, write_log
from .iq import STANDARD_CATEGORIES, category_title, compute_city_iq
from .kernel import simulate
from .reflex import ARC_TYPES, Outcome, traces_from_log
from .report import ReportBundle, emit_report
from .scenario import ScenarioConfig, bundled_names, bundled_scenario, load_scenario, parse_scale_params

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Raised for anything that should end the command with exit status 2."""


_timestamps = False


def _err(msg: str) -> None:
    if _timestamps:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        msg = f"{stamp} {msg}"
    print(msg, file=sys.stderr)


def _load(source: str) -> ScenarioConfig:
    """Load a scenario from a path, or a bundled one by name."""
    path = Path(source)
    if not path.exists() and source in bundled_names():
        return bundled_scenario(source)
    try:
        return load_scenario(path)
    except OSError as exc:
        raise InputError(f"IoError: cannot read {source}: {exc.strerror or exc}") from None
    except ScenarioError as exc:
        lines = [f"{source}: invalid scenario ({len(exc.issues)} issue(s))"]
        lines += [f"  {issue}" for issue in exc.issues]
        raise InputError("\n".join(lines)) from None


def parse_seed_range(text: str) -> list[int]:
    """``"3..6"`` -> ``[3, 4, 5, 6]`` (inclusive)."""
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed bounds must be integers: {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return list(range(a, b + 1))


def summarize(log: EventLog) -> dict:
    traces = traces_from_log(log)
    outcomes = Counter(t.outcome for t in traces)
    failed_at = Counter(t.failed_stage.value for t in traces if t.outcome is Outcome.Failed)
    dropped = Counter(r.detail.get("reason", "?") for r in log.of_kind(EventKind.MessageDropped))
    return {
        "traces": len(traces),
        "outcomes": {o.value: outcomes.get(o, 0) for o in Outcome},
        "failed_at": dict(sorted(failed_at.items())),
        "sent": log.count(EventKind.MessageSent),
        "delivered": log.count(EventKind.MessageDelivered),
        "dropped": sum(dropped.values()),
        "dropped_by_reason": dict(sorted(dropped.items())),
    }


def format_summary(name: str, seed: int, log: EventLog, digest: str) -> str:
    s = summarize(log)
    o = s["outcomes"]
    lines = [
        f"scenario {name}  seed {seed}",
        f"  traces: {s['traces']}  Completed {o['Completed']}  Suppressed {o['Suppressed']}"
        f"  FailedAtStage {o['FailedAtStage']}",
    ]
    if s["failed_at"]:
        lines.append("  failed at: " + ", ".join(f"{k} {v}" for k, v in s["failed_at"].items()))
    lines.append(f"  messages: Sent {s['sent']}  Delivered {s['delivered']}  Dropped {s['dropped']}")
    if s["dropped_by_reason"]:
        lines.append("  dropped by reason: " + ", ".join(f"{k} {v}" for k, v in s["dropped_by_reason"].items()))
    lines.append(f"  log digest: {digest}")
    return "\n".join(lines)


def _log_path(template: str | None, seed: int, many: bool) -> str | None:
    if template is None:
        return None
    if many and "{seed}" not in template:
        raise InputError("--log-out needs a {seed} placeholder when running several seeds")
    return template.replace("{seed}", str(seed))


def _run_one(scenario: ScenarioConfig, seed: int, log_out: str | None, strict: bool) -> str:
    sim = simulate(scenario, seed, strict=strict)
    digest = write_log(sim.log, log_out) if log_out else log_digest(sim.log)
    return format_summary(scenario.name, seed, sim.log, digest)


# -- subcommands ----------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    print(
        f"{args.scenario}: ok ({len(scenario.neurons)} neurons, {len(scenario.arcs)} arcs, "
        f"{len(scenario.stimuli)} stimuli)"
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    seeds = args.seeds if args.seeds is not None else [args.seed]
    many = len(seeds) > 1
    paths = [_log_path(args.log_out, s, many) for s in seeds]
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, scenario, s, p, args.strict) for s, p in zip(seeds, paths)]
            summaries = [f.result() for f in futures]
    else:
        summaries = [_run_one(scenario, s, p, args.strict) for s, p in zip(seeds, paths)]
    print("\n".join(summaries))
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    params = scenario.scale
    if args.scale_params:
        try:
            text = Path(args.scale_params).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"IoError: cannot read {args.scale_params}: {exc.strerror or exc}") from None
        try:
            params = parse_scale_params(text)
        except ScenarioError as exc:
            raise InputError(
                "\n".join([f"{args.scale_params}: invalid scale parameters"] + [f"  {i}" for i in exc.issues])
            ) from None

    if args.log_in:
        try:
            log = read_log(args.log_in)
        except OSError as exc:
            raise InputError(f"IoError: cannot read {args.log_in}: {exc.strerror or exc}") from None
        except CorruptRecord as exc:
            raise InputError(f"{args.log_in}: corrupt log: {exc}") from None
        started = log.of_kind(EventKind.RunStarted)
        if not started:
            raise InputError(f"{args.log_in}: log has no RunStarted record")
        if started[0].subjects != (scenario.name,):
            raise InputError(
                f"{args.log_in}: log was recorded for scenario {started[0].subjects[0]!r}, not {scenario.name!r}"
            )
        seed = started[0].detail.get("seed")
        graph = scenario.build_graph()
    else:
        seed = args.seed
        sim = simulate(scenario, seed)
        log, graph = sim.log, sim.graph
        if args.log_out:
            write_log(log, args.log_out)

    try:
        report = compute_city_iq(graph, log, scenario.census, params, scenario.activeness_window)
    except InvalidParams as exc:
        raise InputError(f"invalid scale parameters: {exc}") from None
    bundle = ReportBundle(report, log_digest(log), scenario.name, seed)
    text = emit_report(bundle, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_arc_types(args: argparse.Namespace) -> int:
    print("Cloud reflex arc types")
    print(f"{'#':>2}  {'letters':<7}  {'receptor -> effector':<22}  example")
    for t in ARC_TYPES:
        print(f"{t.ordinal:>2}  {t.label:<7}  {t.name:<22}  {t.example}")
    print()
    print("Standard categories")
    for i, name in enumerate(STANDARD_CATEGORIES, start=1):
        print(f"{i:>2}  {name:<24}  {category_title(name)}")
    return EXIT_OK


def cmd_scenarios(args: argparse.Namespace) -> int:
    for name in bundled_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citybrain", description="City Brain simulator and City IQ scoring.")
    parser.add_argument("--timestamps", action="store_true", help="prefix diagnostics with a UTC timestamp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a scenario file")
    p.add_argument("scenario", help="scenario path or bundled scenario name")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate a scenario and summarize the run")
    p.add_argument("scenario")
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, default=0)
    seeds.add_argument("--seeds", type=parse_seed_range, metavar="A..B", help="inclusive seed sweep")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for a seed sweep")
    p.add_argument("--log-out", metavar="PATH", help="write the event log; use {seed} in sweeps")
    p.add_argument("--strict", action="store_true", help="fail (exit 1) if events remain at the horizon")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="compute the City IQ report")
    p.add_argument("scenario")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--seed", type=int, default=0)
    source.add_argument("--log-in", metavar="PATH", help="score an existing event log instead of running")
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--scale-params", metavar="PATH", help="JSON file overriding the scenario's scale block")
    p.add_argument("--log-out", metavar="PATH", help="also write the event log of the fresh run")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_score)

    for name in ("arc-types", "list-arc-types"):
        p = sub.add_parser(name, help="list the nine arc types and the standard categories")
        p.set_defaults(func=cmd_arc_types)

    p = sub.add_parser("scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv: list[str] | None = None) -> int:
    global _timestamps
    parser = build_parser()
    args = parser.parse_args(argv)
    _timestamps = args.timestamps
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except InputError as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    except CityBrainError as exc:
        _err(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    except OSError as exc:
        _err(f"IoError: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
