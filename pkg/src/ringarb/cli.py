"""Command-line driver.

Exit codes: 0 success, 1 input error, 3 nothing found (``scan`` with no
profitable ring, ``optimal`` on an unprofitable ring).

File formats
------------
market (``--market``)
    ``{"pools": [{"id", "token0", "token1", "reserve0", "reserve1",
    "fee_in_ppm", "fee_out_ppm", "lp_supply"}], "unique_pairs": true}``;
    amounts are decimal strings, fees are retained parts per million
    (997000 means 0.3% input fee).
events (``--events``)
    JSON Lines, one swap per line: ``{"tx_id", "block", "log_index",
    "token_in", "token_out", "amount_in", "amount_out"}``.
scenarios (``--scenarios``)
    JSON array of ``{"pool": <pool>, "target_ratio": "1.2",
    "ring_swap": {"input_token": "A", "amount": "50"} | null}``.
cycle (``--cycle``)
    comma-separated ``pool_id:input_token`` legs, e.g. ``XY:X,YZ:Y,ZX:Z``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from ringarb.amm import UNISWAP_V2, FeeParams
from ringarb.analysis import compare_convergence, convergence_csv, exhaust_ring_arbitrage, load_scenarios
from ringarb.cycles import Cycle, cycle_hops, find_cycles, marginal_at_zero, optimal_input
from ringarb.errors import NotProfitable, RingArbError
from ringarb.fees import market_fee_threshold
from ringarb.marketfile import load_market, market_to_dict
from ringarb.numeric import format_decimal, parse_decimal
from ringarb.synthetic import random_market
from ringarb.traces import classify_transactions, parse_events, revenue_summary

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONE = 3

log = logging.getLogger("ringarb")


class InputError(Exception):
    pass


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _amount(text: str, name: str) -> Fraction:
    try:
        return parse_decimal(text)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None


def _market(args):
    if not args.market:
        raise InputError("--market is required")
    return load_market(args.market)


def parse_cycle(text: str) -> Cycle:
    legs = []
    for part in text.split(","):
        pool_id, sep, token = part.strip().rpartition(":")
        if not sep or not pool_id or not token:
            raise InputError(f"bad cycle leg {part!r}; expected pool_id:input_token")
        legs.append((pool_id, token))
    return Cycle.of(*legs)


def cmd_scan(args) -> int:
    market = _market(args)
    found = find_cycles(
        market,
        start_token=args.start,
        max_hops=args.max_hops,
        mode=args.mode,
        prefilter=args.prefilter,
        min_profit=_amount(args.min_profit, "min-profit"),
    )
    rows = [o.to_dict() for o in found]
    if args.format == "csv":
        _emit(
            _csv(
                ["cycle", "direction", "index", "marginal", "optimal_input", "expected_profit"],
                [[">".join(o.cycle.pool_ids), *list(r.values())[1:]] for o, r in zip(found, rows)],
            )
        )
    else:
        _emit(_json({"opportunities": rows}))
    return EXIT_OK if found else EXIT_NONE


def cmd_optimal(args) -> int:
    market = _market(args)
    if not args.cycle:
        raise InputError("--cycle is required")
    cycle = parse_cycle(args.cycle)
    view = market.to_float() if args.mode == "float" else market
    cycle_hops(cycle, view)
    marginal = marginal_at_zero(cycle, view)
    try:
        delta, profit = optimal_input(cycle, view)
    except NotProfitable:
        delta, profit = Fraction(0), Fraction(0)
    row = {
        "cycle": cycle.to_list(),
        "marginal": format_decimal(marginal),
        "optimal_input": format_decimal(delta),
        "expected_profit": format_decimal(profit),
    }
    if args.format == "csv":
        _emit(_csv(["cycle", "marginal", "optimal_input", "expected_profit"],
                   [[">".join(cycle.pool_ids), row["marginal"], row["optimal_input"], row["expected_profit"]]]))
    else:
        _emit(_json(row))
    return EXIT_OK if profit > 0 else EXIT_NONE


def cmd_fee_threshold(args) -> int:
    report = market_fee_threshold(_market(args), args.max_hops)
    _emit(report.to_csv() if args.format == "csv" else _json(report.to_dict()))
    return EXIT_OK


def cmd_converge(args) -> int:
    if not args.scenarios:
        raise InputError("--scenarios is required")
    reports = [compare_convergence(s) for s in load_scenarios(args.scenarios)]
    if args.format == "csv":
        _emit(convergence_csv(reports) or "scenario\n")
    else:
        _emit(_json({"reports": [r.to_row() for r in reports]}))
    return EXIT_OK


def cmd_ingest(args) -> int:
    if not args.events:
        raise InputError("--events is required")
    try:
        with open(args.events, "rb") as fh:
            events, errors = parse_events(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.events}: {exc.strerror}") from None
    for err in errors:
        print(f"warning: line {err.line}: {err.reason}", file=sys.stderr)
    cyclic, rejected = classify_transactions(events, _amount(args.slack, "slack"))
    summary = revenue_summary(cyclic, args.unit)
    if args.format == "csv":
        _emit(summary.to_csv())
    else:
        doc = summary.to_dict()
        doc["cycles"] = [
            {
                "tx_id": c.tx_id,
                "tokens": c.tokens,
                "input": format_decimal(c.input),
                "output": format_decimal(c.output),
                "revenue": format_decimal(c.revenue),
            }
            for c in cyclic
            if c.start_token == args.unit
        ]
        doc["non_cyclic_transactions"] = rejected
        doc["parse_errors"] = len(errors)
        _emit(_json(doc))
    return EXIT_OK


def cmd_simulate(args) -> int:
    fees = FeeParams.from_ppm(args.fee_ppm) if args.fee_ppm is not None else UNISWAP_V2
    market = random_market(args.tokens, args.pools, seed=args.seed, fees=fees, noise=args.noise)
    report = exhaust_ring_arbitrage(
        market,
        args.max_hops,
        min_profit=_amount(args.min_profit, "min-profit"),
        max_rounds=args.rounds,
        mode=args.mode,
    )
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(_json(market_to_dict(market)) + "\n")
    rows = [
        {
            "cycle": ">".join(cycle.pool_ids),
            "start_token": cycle.start_token,
            "profit": format_decimal(profit),
            "rate_product_before": format_decimal(before),
            "rate_product_after": format_decimal(after),
        }
        for cycle, profit, before, after in report.executions
    ]
    if args.format == "csv":
        header = ["cycle", "start_token", "profit", "rate_product_before", "rate_product_after"]
        _emit(_csv(header, [[r[h] for h in header] for r in rows]))
    else:
        _emit(
            _json(
                {
                    "seed": args.seed,
                    "executions": rows,
                    "exhausted": report.exhausted,
                    "total_by_token": {t: format_decimal(v) for t, v in report.total_by_token.items()},
                }
            )
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringarb",
        description="Ring arbitrage analysis for constant-product markets.",
        epilog=__doc__.split("File formats", 1)[1].strip("-\n "),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, market=True):
        if market:
            p.add_argument("--market", help="market JSON file")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    def hops(p, default):
        p.add_argument("--max-hops", type=int, default=default, help=f"longest ring (default {default})")

    p = sub.add_parser("scan", help="list profitable rings, best first")
    common(p)
    hops(p, 4)
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--min-profit", default="0")
    p.add_argument("--start", help="only rings starting at this token")
    p.add_argument("--prefilter", action="store_true", help="prune tokens with a Bellman-Ford pass first")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("optimal", help="optimal input and profit of one ring")
    common(p)
    p.add_argument("--cycle", help="pool_id:input_token,...")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("fee-threshold", help="per-hop fee rate at which every ring stops paying")
    common(p)
    hops(p, 4)
    p.set_defaults(func=cmd_fee_threshold)

    p = sub.add_parser("converge", help="direct versus ring-interposed convergence to a target ratio")
    common(p, market=False)
    p.add_argument("--scenarios", help="scenario JSON array")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("ingest", help="find cyclic transactions in a swap log")
    common(p, market=False)
    p.add_argument("--events", help="JSON Lines swap log")
    p.add_argument("--unit", default="USDC", help="summarise rings starting in this token")
    p.add_argument("--slack", default="0", help="tolerated gap between chained amounts")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", help="exhaust ring arbitrage on a seeded random market")
    common(p, market=False)
    hops(p, 3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tokens", type=int, default=10)
    p.add_argument("--pools", type=int, default=25)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--fee-ppm", type=int, help="retained input share in ppm (default 997000)")
    p.add_argument("--mode", choices=("exact", "float"), default="float")
    p.add_argument("--min-profit", default="0.000001")
    p.add_argument("--rounds", type=int, default=1000, help="most rings to execute")
    p.add_argument("--dump", help="write the generated market here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    if getattr(args, "max_hops", 2) < 2:
        print("error: --max-hops must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, RingArbError, OSError) as exc:
        message = exc.strerror if isinstance(exc, OSError) and exc.strerror else str(exc)
        where = f" {exc.filename}" if isinstance(exc, OSError) and exc.filename else ""
        print(f"error:{where} {message}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
