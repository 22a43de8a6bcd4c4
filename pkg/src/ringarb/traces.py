"""Reconstruct cyclic transactions from exported swap events.

Input is JSON Lines, one swap per line::

    {"tx_id": "0xab..", "block": 11151407, "log_index": 12,
     "token_in": "USDC", "token_out": "USDT",
     "amount_in": "285.71", "amount_out": "285.64"}

Within one transaction, consecutive swaps (by log index) chain when the
previous output token and amount are exactly the next input token and
amount; a chain that returns to its first input token is a cyclic
transaction.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from typing import Iterable, NamedTuple

from ringarb.errors import NoValidEvents, ParseError
from ringarb.numeric import format_decimal, format_fixed, parse_decimal, to_fraction

FIELDS = ("tx_id", "block", "log_index", "token_in", "token_out", "amount_in", "amount_out")


@dataclass(frozen=True)
class SwapEvent:
    tx_id: str
    block: int
    log_index: int
    token_in: str
    token_out: str
    amount_in: Fraction
    amount_out: Fraction

    def to_json(self) -> str:
        """One JSONL record; amounts are rounded to 36 fractional digits."""
        return json.dumps(
            {
                "tx_id": self.tx_id,
                "block": self.block,
                "log_index": self.log_index,
                "token_in": self.token_in,
                "token_out": self.token_out,
                "amount_in": format_fixed(self.amount_in),
                "amount_out": format_fixed(self.amount_out),
            }
        )


class ParseResult(NamedTuple):
    events: list[SwapEvent]
    errors: list[ParseError]


def _event_from_obj(obj) -> SwapEvent:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    missing = [f for f in FIELDS if f not in obj]
    if missing:
        raise ValueError(f"missing {', '.join(missing)}")
    for key in ("tx_id", "token_in", "token_out"):
        if not isinstance(obj[key], str) or not obj[key]:
            raise ValueError(f"{key} must be a non-empty string")
    for key in ("block", "log_index"):
        if isinstance(obj[key], bool) or not isinstance(obj[key], int) or obj[key] < 0:
            raise ValueError(f"{key} must be a non-negative integer")
    if obj["token_in"] == obj["token_out"]:
        raise ValueError("token_in equals token_out")
    amounts = {}
    for key in ("amount_in", "amount_out"):
        amounts[key] = parse_decimal(obj[key])
        if amounts[key] <= 0:
            raise ValueError(f"{key} must be positive")
    return SwapEvent(
        obj["tx_id"], obj["block"], obj["log_index"], obj["token_in"], obj["token_out"],
        amounts["amount_in"], amounts["amount_out"],
    )


def parse_events(lines: Iterable[str | bytes]) -> ParseResult:
    """Parse JSON Lines into events sorted by (block, tx_id, log_index).

    Blank lines are skipped.  Every other malformed line becomes a
    :class:`ParseError` carrying its 1-based line number; if there was content
    but no line parsed, :class:`NoValidEvents` is raised.
    """
    events: list[SwapEvent] = []
    errors: list[ParseError] = []
    seen: set[tuple[str, int]] = set()
    for number, raw in enumerate(lines, start=1):
        try:
            text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
            if not text.strip():
                continue
            event = _event_from_obj(json.loads(text))
        except (ValueError, TypeError, RecursionError) as exc:
            errors.append(ParseError(number, str(exc) or type(exc).__name__))
            continue
        key = (event.tx_id, event.log_index)
        if key in seen:
            errors.append(ParseError(number, f"duplicate log {event.log_index} in {event.tx_id}"))
            continue
        seen.add(key)
        events.append(event)
    if errors and not events:
        raise NoValidEvents(errors)
    events.sort(key=lambda e: (e.block, e.tx_id, e.log_index))
    return ParseResult(events, errors)


@dataclass(frozen=True)
class CyclicTransaction:
    tx_id: str
    legs: tuple[SwapEvent, ...]

    @property
    def start_token(self) -> str:
        return self.legs[0].token_in

    @property
    def input(self) -> Fraction:
        return self.legs[0].amount_in

    @property
    def output(self) -> Fraction:
        return self.legs[-1].amount_out

    @property
    def revenue(self) -> Fraction:
        return self.output - self.input

    @property
    def tokens(self) -> list[str]:
        return [leg.token_in for leg in self.legs] + [self.legs[-1].token_out]


def _chains(prev: SwapEvent, nxt: SwapEvent, slack: Fraction) -> bool:
    return prev.token_out == nxt.token_in and abs(prev.amount_out - nxt.amount_in) <= slack


def split_transaction(legs: list[SwapEvent], slack: Fraction = Fraction(0)) -> list[CyclicTransaction]:
    """Cut one transaction's swaps into maximal chained segments that close on their start token."""
    found = []
    i = 0
    while i < len(legs):
        j = i
        while j + 1 < len(legs) and _chains(legs[j], legs[j + 1], slack):
            j += 1
        close = next((k for k in range(j, i, -1) if legs[k].token_out == legs[i].token_in), None)
        if close is None:
            i += 1
            continue
        found.append(CyclicTransaction(legs[i].tx_id, tuple(legs[i : close + 1])))
        i = close + 1
    return found


def classify_transactions(
    events: Iterable[SwapEvent], slack=0
) -> tuple[list[CyclicTransaction], list[str]]:
    """(cyclic transactions, ids of transactions with swaps but no closed chain)."""
    slack = to_fraction(slack)
    ordered = sorted(events, key=lambda e: (e.tx_id, e.log_index))
    cyclic: list[CyclicTransaction] = []
    rejected: list[str] = []
    for tx_id, group in groupby(ordered, key=lambda e: e.tx_id):
        found = split_transaction(list(group), slack)
        if found:
            cyclic.extend(found)
        else:
            rejected.append(tx_id)
    return cyclic, rejected


def group_cyclic_transactions(events: Iterable[SwapEvent], slack=0) -> list[CyclicTransaction]:
    return classify_transactions(events, slack)[0]


@dataclass(frozen=True)
class RevenueSummary:
    unit_token: str
    count: int
    total_revenue: Fraction
    mean_revenue: Fraction
    length_histogram: dict[int, int]

    def to_dict(self, significant: int = 18) -> dict:
        return {
            "unit_token": self.unit_token,
            "count": self.count,
            "total_revenue": format_decimal(self.total_revenue, significant),
            "mean_revenue": format_decimal(self.mean_revenue, significant),
            "length_histogram": {str(k): v for k, v in self.length_histogram.items()},
        }

    def to_csv(self, significant: int = 18) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["unit_token", "count", "total_revenue", "mean_revenue", "length", "cycles"])
        hist = self.length_histogram or {0: 0}
        for length, n in hist.items():
            writer.writerow(
                [
                    self.unit_token,
                    self.count,
                    format_decimal(self.total_revenue, significant),
                    format_decimal(self.mean_revenue, significant),
                    length,
                    n,
                ]
            )
        return buf.getvalue()


def revenue_summary(cyclics: Iterable[CyclicTransaction], unit_token: str) -> RevenueSummary:
    """Count, total and mean revenue of the cycles that start in ``unit_token``."""
    mine = [c for c in cyclics if c.start_token == unit_token]
    total = sum((c.revenue for c in mine), Fraction(0))
    hist: dict[int, int] = {}
    for c in mine:
        hist[len(c.legs)] = hist.get(len(c.legs), 0) + 1
    mean = total / len(mine) if mine else Fraction(0)
    return RevenueSummary(unit_token, len(mine), total, mean, dict(sorted(hist.items())))


def events_from_fills(tx_id: str, block: int, fills, first_log_index: int = 0) -> list[SwapEvent]:
    """Swap events for the legs of an executed ring (see ``cycles.execute_ring``)."""
    return [
        SwapEvent(tx_id, block, first_log_index + i, f.token_in, f.token_out,
                  Fraction(f.amount_in), Fraction(f.amount_out))
        for i, f in enumerate(fills)
    ]
