"""Fee thresholds that switch ring arbitrage off.

A ring with ``hops`` legs and arbitrage index ``I > 1`` has a positive slope
at zero exactly when ``(r1*r2)**hops * I > 1``.  The largest per-hop rate that
removes it is therefore ``I ** (-1/hops)``; the market-wide threshold is the
minimum of that value over every ring considered.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from ringarb.amm import FeeParams, Market
from ringarb.composition import resolve_path
from ringarb.cycles import (
    Cycle,
    _index,
    enumerate_cycles,
    marginal_at_zero,
    optimal_input,
    reverse_cycle,
)
from ringarb.errors import InvalidCycle, InvalidFee, NoArbitrageDirection, NotProfitable
from ringarb.numeric import Number, exact_root, format_decimal

REL_WIDTH = Fraction(1, 10**15)


def _oriented_index(cycle: Cycle, market: Market) -> tuple[Fraction, str]:
    try:
        hops = resolve_path(cycle.legs, market)
    except (KeyError, ValueError) as exc:
        raise InvalidCycle(str(exc)) from exc
    if cycle.n_hops < 2 or hops[-1].token_out != hops[0].token_in:
        raise InvalidCycle("not a closed ring")
    index = Fraction(_index(hops))
    if index == 1:
        raise NoArbitrageDirection("ring is balanced: index is exactly 1")
    return (index, "forward") if index > 1 else (1 / index, "reverse")


def threshold_for_index(index: Fraction, hops: int) -> Fraction:
    """Largest ``r`` with ``r**hops * index <= 1``, to 1e-15 relative width.

    Exact when ``index`` is a perfect ``hops``-th power; otherwise the lower end
    of a bisection bracket on the exact polynomial, so the returned rate never
    leaves a positive slope behind.
    """
    index = Fraction(index)
    if index <= 1:
        raise NoArbitrageDirection(f"index {index} does not exceed 1")
    root = exact_root(1 / index, hops)
    if root is not None:
        return root

    def excess(r: Fraction) -> Fraction:
        return r**hops * index - 1

    guess = math.exp(-(math.log(index.numerator) - math.log(index.denominator)) / hops)
    lo, hi = Fraction(guess * (1 - 1e-12)), Fraction(guess * (1 + 1e-12))
    if not (excess(lo) <= 0 < excess(hi)):
        lo, hi = Fraction(0), Fraction(1)
    while hi - lo > REL_WIDTH * lo or lo == 0:
        mid = (lo + hi) / 2
        if excess(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def cycle_fee_threshold(cycle: Cycle, market: Market) -> Fraction:
    """Per-hop fee rate ``r1*r2`` at or below which this ring (in its profitable orientation) dies."""
    index, _ = _oriented_index(cycle, market)
    return threshold_for_index(index, cycle.n_hops)


@dataclass(frozen=True)
class CycleThreshold:
    cycle: Cycle
    direction: str
    index: Fraction
    n_hops: int
    threshold: Fraction


@dataclass(frozen=True)
class FeeThresholdReport:
    per_cycle: list[CycleThreshold]
    market_threshold: Fraction

    def to_dict(self, significant: int = 18) -> dict:
        return {
            "market_threshold": format_decimal(self.market_threshold, significant),
            "per_cycle": [
                {
                    "cycle": c.cycle.to_list(),
                    "direction": c.direction,
                    "index": format_decimal(c.index, significant),
                    "hops": c.n_hops,
                    "threshold": format_decimal(c.threshold, significant),
                }
                for c in self.per_cycle
            ],
        }

    def to_csv(self, significant: int = 18) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["cycle", "index", "hops", "threshold"])
        for c in self.per_cycle:
            writer.writerow(
                [
                    ">".join(c.cycle.pool_ids),
                    format_decimal(c.index, significant),
                    c.n_hops,
                    format_decimal(c.threshold, significant),
                ]
            )
        return buf.getvalue()


def market_fee_threshold(market: Market, max_hops: int = 4) -> FeeThresholdReport:
    """Thresholds for every unbalanced ring up to ``max_hops`` legs and their minimum."""
    rows = []
    for cycle in enumerate_cycles(market, max_hops):
        index, direction = _oriented_index_or_none(cycle, market)
        if index is None:
            continue
        ring = cycle if direction == "forward" else reverse_cycle(cycle, market)
        rows.append(CycleThreshold(ring, direction, index, cycle.n_hops, threshold_for_index(index, cycle.n_hops)))
    rows.sort(key=lambda c: (c.threshold, c.cycle.pool_ids))
    return FeeThresholdReport(rows, min((c.threshold for c in rows), default=Fraction(1)))


def _oriented_index_or_none(cycle: Cycle, market: Market):
    try:
        return _oriented_index(cycle, market)
    except NoArbitrageDirection:
        return None, None


@dataclass(frozen=True)
class SweepRow:
    fee: Fraction
    marginal: Number
    optimal_profit: Number


def sweep_fee_profitability(market: Market, cycle: Cycle, fee_grid: Iterable) -> list[SweepRow]:
    """Slope at zero and best achievable profit of one ring for each input-side rate ``r1`` (``r2 = 1``)."""
    rows = []
    for value in fee_grid:
        r = Fraction(value)
        if not 0 < r <= 1:
            raise InvalidFee(f"fee rate must lie in (0, 1], got {value}")
        fees = FeeParams(r, Fraction(1))
        priced = market.with_pools(*(replace(market.pool(p), fees=fees) for p in cycle.pool_ids))
        marginal = marginal_at_zero(cycle, priced)
        profit: Number = Fraction(0)
        if marginal > 0:
            try:
                profit = optimal_input(cycle, priced)[1]
            except NotProfitable:
                pass
        rows.append(SweepRow(r, marginal, profit))
    return rows
