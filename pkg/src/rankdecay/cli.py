"""Command line interface: ``rankdecay {process,query,alpha,simulate,genlog}``.

Machine-readable output goes to stdout as JSON, diagnostics to stderr.
Exit codes: 0 success, 2 bad input (flags, log, snapshot), 3 snapshot
version mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .core import alpha_from_half_life
from .events import generate_log, read_log, write_log
from .exceptions import LogFormatError, SnapshotError, SnapshotVersionError, UnsortedLogError
from .simulation import SimConfig, run_sweep, sweep_summary, write_metrics_csv, write_summary_json, write_trajectory_csv
from .snapshot import Snapshot, load_snapshot, save_snapshot
from .table import EngineConfig, compute_alphas_from_log, process_log, top_k

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERSION = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _load_snapshot(path):
    try:
        return load_snapshot(path)
    except SnapshotVersionError as exc:
        raise CliError(f"{path}: {exc}", EXIT_VERSION) from None
    except (OSError, SnapshotError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _read_log(path):
    try:
        return read_log(path)
    except (OSError, LogFormatError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _engine_overrides(args):
    return {
        "alpha_rec": args.alpha_rec,
        "alpha_checkout": args.alpha_checkout,
        "alpha_cart": args.alpha_cart,
        "epsilon": args.epsilon,
        "insertion": args.insertion,
        "period_of_interest": args.period_of_interest,
        "recent_window": args.recent_window,
        "propagate": args.propagate,
    }


def _resolve_config(base, args):
    try:
        cfg = base
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = cfg.replace(**json.load(fh))
        return cfg.replace(**_engine_overrides(args))
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}") from None


def cmd_process(args):
    snap = _load_snapshot(args.snapshot_in) if args.snapshot_in else Snapshot()
    config = _resolve_config(snap.config, args)
    events = _read_log(args.log)
    if args.auto_alpha:
        try:
            alphas = compute_alphas_from_log(events, config.period_of_interest, config)
            config = config.replace(**alphas.to_dict())
        except ValueError as exc:
            print(f"warning: keeping configured alphas ({exc})", file=sys.stderr)
    try:
        table, recents, stats = process_log(snap.table, events, config, snap.recents)
    except UnsortedLogError as exc:
        raise CliError(f"{args.log}: {exc}") from None
    created = max([snap.created_at] + [ev.ts for ev in events if isinstance(ev.ts, int) and ev.ts > 0])
    try:
        save_snapshot(args.snapshot_out, Snapshot(table, recents, config, created_at=created))
    except OSError as exc:
        raise CliError(f"{args.snapshot_out}: {exc}") from None
    if stats.rejected:
        print(f"warning: rejected {stats.rejected} malformed event(s)", file=sys.stderr)
    _emit(stats.to_dict())
    return EXIT_OK


def cmd_query(args):
    snap = _load_snapshot(args.snapshot)
    _emit([[item, p] for item, p in top_k(snap.table, args.anchor, args.k)])
    return EXIT_OK


def cmd_alpha(args):
    if args.half_life is not None:
        try:
            _emit({"alpha": alpha_from_half_life(args.half_life)})
        except ValueError as exc:
            raise CliError(str(exc)) from None
        return EXIT_OK
    events = _read_log(args.log)
    try:
        alphas = compute_alphas_from_log(events, args.period_of_interest)
    except ValueError as exc:
        raise CliError(f"{args.log}: {exc}") from None
    _emit(alphas.to_dict())
    return EXIT_OK


def cmd_simulate(args):
    try:
        config = SimConfig(
            n=args.n,
            alpha=args.alpha,
            days=args.days,
            mu=args.mu,
            eps_walk=args.eps_walk,
            seed=args.seed,
            record_trajectory=args.trajectory_out is not None,
        )
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid simulation settings: {exc}") from None
    if args.seeds < 1:
        raise CliError("--seeds must be at least 1")
    if args.trajectory_out and args.seeds > 1:
        raise CliError("--trajectory-out requires a single seed")
    results = run_sweep(config, range(args.seed, args.seed + args.seeds), jobs=args.jobs)
    summary = results[0].summary() if len(results) == 1 else sweep_summary(results)
    if args.metrics_out:
        write_metrics_csv(results, args.metrics_out, with_seed=len(results) > 1)
    if args.summary_out:
        write_summary_json(summary, args.summary_out)
    if args.trajectory_out:
        write_trajectory_csv(results[0], args.trajectory_out)
    _emit(summary)
    return EXIT_OK


def cmd_genlog(args):
    try:
        events = generate_log(
            n_items=args.items,
            n_anchors=args.anchors,
            n_events=args.events,
            seed=args.seed,
            start_ts=args.start_ts,
            checkout_rate=args.checkout_rate,
            cart_rate=args.cart_rate,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.out in (None, "-"):
        for ev in events:
            sys.stdout.write(ev.to_json() + "\n")
    else:
        write_log(events, args.out)
    return EXIT_OK


def _add_engine_flags(p):
    g = p.add_argument_group("engine configuration (overrides snapshot and --config)")
    g.add_argument("--config", help="JSON file with the snapshot config schema")
    g.add_argument("--alpha-rec", type=float)
    g.add_argument("--alpha-checkout", type=float)
    g.add_argument("--alpha-cart", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--insertion", choices=["max_entropy", "min_prob"])
    g.add_argument("--period-of-interest", type=int, metavar="MS")
    g.add_argument("--recent-window", type=int, metavar="MS")
    g.add_argument("--propagate", action=argparse.BooleanOptionalAction, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="rankdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="replay an event log onto a snapshot")
    p.add_argument("--log", required=True, help="JSON Lines event log")
    p.add_argument("--snapshot-in", help="previous snapshot (default: empty state)")
    p.add_argument("--snapshot-out", required=True)
    p.add_argument("--auto-alpha", action="store_true", help="re-estimate decay parameters from this log")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("query", help="top-k recommendations of an anchor")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--anchor", required=True)
    p.add_argument("-k", "--k", type=int, default=10)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("alpha", help="decay parameter from a half-life or an event log")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--log")
    mode.add_argument("--half-life", type=float)
    p.add_argument("--period-of-interest", type=int, default=EngineConfig().period_of_interest, metavar="MS")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("simulate", help="simplex random-walk evaluation")
    defaults = SimConfig()
    p.add_argument("--n", type=int, default=defaults.n)
    p.add_argument("--alpha", type=float, default=None, help="default: half-life of one mean phase")
    p.add_argument("--days", type=int, default=defaults.days)
    p.add_argument("--mu", type=float, default=defaults.mu)
    p.add_argument("--eps-walk", type=float, default=defaults.eps_walk)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--seeds", type=int, default=1, help="sweep seeds seed .. seed+SEEDS-1")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--metrics-out")
    p.add_argument("--summary-out")
    p.add_argument("--trajectory-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("genlog", help="write a synthetic event log")
    p.add_argument("--items", type=int, default=50)
    p.add_argument("--anchors", type=int, default=20)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-ts", type=int, default=1_700_000_000_000)
    p.add_argument("--checkout-rate", type=float, default=0.03)
    p.add_argument("--cart-rate", type=float, default=0.07)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_genlog)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rankdecay {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
