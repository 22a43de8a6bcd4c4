"""Closed- and open-market analysis of ring arbitrage.

* :func:`detect_pair_arbitrage` looks for the "buy directly, sell through an
  intermediate" pair of trades across a token triangle.
* :func:`compare_convergence` contrasts a pool that is moved to a target
  reserve ratio by one trade with the same pool first hit by a ring leg and
  then corrected, and reports what each path leaves behind for LPs.
* :func:`balance_report` and :func:`exhaust_ring_arbitrage` track how rings
  pull rate products back toward 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from ringarb.amm import Market, Pool, apply_swap, swap_output
from ringarb.composition import resolve_path
from ringarb.cycles import (
    Cycle,
    _index,
    enumerate_cycles,
    execute_ring,
    find_cycles,
    reverse_cycle,
)
from ringarb.errors import InvalidCycle, InvalidRatio, MarketFileError, Reverted
from ringarb.marketfile import pool_from_dict
from ringarb.numeric import Number, format_decimal, parse_decimal, sqrt_fraction

# -- closed market: pair arbitrage -------------------------------------------

GRID_EXPONENTS = [e / 2 for e in range(-18, 1)]  # 1e-9 .. 1 of the buy pool's input reserve


@dataclass(frozen=True)
class PairArbitrage:
    """Buy ``target`` for ``base`` in one pool, sell it back to ``base`` via ``via``."""

    base: str
    target: str
    via: str
    buy_pool: str
    sell_pools: tuple[str, str]
    amount_in: Fraction
    bought: Fraction
    received: Fraction

    @property
    def profit(self) -> Fraction:
        return self.received - self.amount_in


def _pair_configs(market: Market):
    """Every (base, buy pool, two sell pools) arrangement on every token triangle."""
    for cycle in enumerate_cycles(market, max_hops=3):
        if cycle.n_hops != 3:
            continue
        for ring in (cycle, reverse_cycle(cycle, market)):
            for k in range(3):
                legs = ring.legs[k:] + ring.legs[:k]
                yield legs


def _trade_chain(market: Market, legs, amount):
    out = amount
    amounts = []
    for leg in legs:
        out = swap_output(market.pools[leg.pool_id], leg.input_token, out)
        amounts.append(out)
    return amounts


def detect_pair_arbitrage(market: Market) -> PairArbitrage | None:
    """Search for a profitable buy-direct / sell-via-two-hops trade pair.

    The search scans a log-spaced grid of input sizes in binary64 and confirms
    every promising point with exact arithmetic.  Returns the confirmed
    witness with the largest exact profit, or None.
    """
    view = market.to_float()
    best: PairArbitrage | None = None
    for legs in _pair_configs(market):
        buy, sell1, sell2 = legs
        base = buy.input_token
        scale = float(market.pools[buy.pool_id].oriented(base)[0])
        for e in GRID_EXPONENTS:
            amount = scale * 10.0**e
            if _trade_chain(view, legs, amount)[-1] - amount <= -1e-12 * amount:
                continue
            exact_in = Fraction(amount)
            bought, _, received = _trade_chain(market, legs, exact_in)
            if received > exact_in:
                target = market.pools[buy.pool_id].other(base)
                witness = PairArbitrage(
                    base=base,
                    target=target,
                    via=market.pools[sell1.pool_id].other(target),
                    buy_pool=buy.pool_id,
                    sell_pools=(sell1.pool_id, sell2.pool_id),
                    amount_in=exact_in,
                    bought=bought,
                    received=received,
                )
                if best is None or witness.profit > best.profit:
                    best = witness
    return best


# -- open market: convergence to a target ratio -----------------------------

CLASSES = ("same-direction-then-reverse", "reverse-then-same", "same-direction-both")


@dataclass(frozen=True)
class Trade:
    input_token: str
    amount_in: Fraction
    amount_out: Fraction


@dataclass(frozen=True)
class ConvergenceScenario:
    """A pool, an optional ring leg through it, and the reserve ratio token0/token1 traders push toward."""

    pool: Pool
    target_ratio: Fraction
    ring_swap: tuple[str, Fraction] | None = None

    def __post_init__(self) -> None:
        if not self.target_ratio > 0:
            raise InvalidRatio(f"target ratio must be positive, got {self.target_ratio}")
        if self.ring_swap is not None:
            token, amount = self.ring_swap
            self.pool.other(token)
            if not amount > 0:
                raise ValueError("ring swap amount must be positive")


@dataclass(frozen=True)
class ConvergenceReport:
    initial_product: Fraction
    product_direct: Fraction
    product_with_ring: Fraction
    fees_direct: Fraction
    fees_with_ring: Fraction
    scenario_class: str | None
    direct: Trade | None
    ring: Trade | None
    corrective: Trade | None

    def to_row(self, significant: int = 18) -> dict:
        fmt = lambda v: format_decimal(v, significant)  # noqa: E731
        return {
            "scenario_class": self.scenario_class or "",
            "initial_product": fmt(self.initial_product),
            "product_direct": fmt(self.product_direct),
            "product_with_ring": fmt(self.product_with_ring),
            "fees_direct": fmt(self.fees_direct),
            "fees_with_ring": fmt(self.fees_with_ring),
        }


def trade_to_ratio(pool: Pool, target_ratio: Fraction) -> Trade | None:
    """The single swap that moves ``reserve0/reserve1`` to ``target_ratio``.

    Selling ``d`` of the token whose share must grow, with input reserve ``x``
    and output reserve ``y``, reaches ratio ``k`` (input over output) when
    ``r1*d**2 + (x + r1*x - k*y*r1*(1-r2))*d + x*(x - k*y) = 0``; the positive
    root is taken.  The square root is rational-exact for perfect squares and
    otherwise accurate to roughly 2**-256 relative.
    """
    if not target_ratio > 0:
        raise InvalidRatio(f"target ratio must be positive, got {target_ratio}")
    if pool.is_empty:
        raise InvalidRatio(f"pool {pool.id!r} is empty")
    current = pool.reserve0 / pool.reserve1
    if current == target_ratio:
        return None
    if current < target_ratio:
        token, k = pool.token0, Fraction(target_ratio)
    else:
        token, k = pool.token1, 1 / Fraction(target_ratio)
    x, y = pool.oriented(token)
    r1, r2 = pool.fees.r1, pool.fees.r2
    b = x + r1 * x - k * y * r1 * (1 - r2)
    c = x * (x - k * y)
    d = (sqrt_fraction(b * b - 4 * r1 * c) - b) / (2 * r1)
    if not d > 0:
        raise InvalidRatio(f"ratio {target_ratio} is not reachable by one trade")
    return Trade(token, d, swap_output(pool, token, d))


def _run(pool: Pool, trade: Trade | None) -> Pool:
    if trade is None:
        return pool
    return apply_swap(pool, trade.input_token, trade.amount_in)[0]


def _fee_value(pool: Pool, trade: Trade | None, target_ratio: Fraction) -> Fraction:
    """Fees a trade leaves in the pool, valued in token0 at the target ratio."""
    if trade is None:
        return Fraction(0)
    r1, r2 = pool.fees.r1, pool.fees.r2
    fee_in = (1 - r1) * trade.amount_in
    fee_out = (1 / r2 - 1) * trade.amount_out
    if trade.input_token == pool.token0:
        return fee_in + fee_out * target_ratio
    return fee_in * target_ratio + fee_out


def compare_convergence(scenario: ConvergenceScenario) -> ConvergenceReport:
    """Direct convergence versus ring leg plus corrective trade.

    Classes follow the pair (ring leg, corrective trade): the ring leg either
    moves the pool the same way as the direct trade would and overshoots the
    target (corrected by a reverse trade), or moves it the other way (corrected
    by a larger same-direction trade), or moves it the same way without reaching
    the target (corrected by a further same-direction trade).
    """
    pool, k = scenario.pool, Fraction(scenario.target_ratio)
    direct = trade_to_ratio(pool, k)
    after_direct = _run(pool, direct)
    initial = pool.reserve0 * pool.reserve1
    product_direct = after_direct.reserve0 * after_direct.reserve1
    fees_direct = _fee_value(pool, direct, k)
    if scenario.ring_swap is None:
        return ConvergenceReport(
            initial, product_direct, product_direct, fees_direct, fees_direct, None, direct, None, None
        )
    token, amount = scenario.ring_swap
    ring_pool, ring_out = apply_swap(pool, token, Fraction(amount))
    ring = Trade(token, Fraction(amount), ring_out)
    corrective = trade_to_ratio(ring_pool, k)
    final = _run(ring_pool, corrective)
    if direct is not None and direct.input_token == token:
        if corrective is not None and corrective.input_token != token:
            klass = "same-direction-then-reverse"
        else:
            klass = "same-direction-both"
    else:
        klass = "reverse-then-same"
    return ConvergenceReport(
        initial_product=initial,
        product_direct=product_direct,
        product_with_ring=final.reserve0 * final.reserve1,
        fees_direct=fees_direct,
        fees_with_ring=_fee_value(pool, ring, k) + _fee_value(ring_pool, corrective, k),
        scenario_class=klass,
        direct=direct,
        ring=ring,
        corrective=corrective,
    )


def scenario_from_dict(obj: dict, where: str = "scenario") -> ConvergenceScenario:
    """``{"pool": {...}, "target_ratio": "1.2", "ring_swap": {"input_token": "A", "amount": "50"} | null}``"""
    if not isinstance(obj, dict):
        raise MarketFileError(f"{where}: expected an object")
    pool = pool_from_dict(obj.get("pool"), f"{where}.pool")
    try:
        ratio = parse_decimal(obj["target_ratio"])
        ring = obj.get("ring_swap")
        ring_swap = None
        if ring is not None:
            ring_swap = (ring["input_token"], parse_decimal(ring["amount"]))
        return ConvergenceScenario(pool, ratio, ring_swap)
    except (KeyError, TypeError, ValueError) as exc:
        raise MarketFileError(f"{where}: {exc}") from None


def load_scenarios(path) -> list[ConvergenceScenario]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MarketFileError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise MarketFileError("scenario file must hold a JSON array")
    return [scenario_from_dict(s, f"[{i}]") for i, s in enumerate(doc)]


def convergence_csv(reports: Iterable[ConvergenceReport]) -> str:
    buf = io.StringIO()
    writer = None
    for i, report in enumerate(reports):
        row = {"scenario": i, **report.to_row()}
        if writer is None:
            writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
            writer.writeheader()
        writer.writerow(row)
    return buf.getvalue()


# -- balance ----------------------------------------------------------------


def rate_product(market: Market, cycle: Cycle) -> Fraction:
    """Product of directed exchange rates (output/input reserves) around the cycle."""
    try:
        hops = resolve_path(cycle.legs, market)
    except (KeyError, ValueError) as exc:
        raise InvalidCycle(str(exc)) from exc
    if hops[-1].token_out != hops[0].token_in:
        raise InvalidCycle("not a closed ring")
    return _index(hops)


def balance_report(market_before: Market, market_after: Market, cycle: Cycle) -> tuple[Number, Number]:
    return rate_product(market_before, cycle), rate_product(market_after, cycle)


@dataclass
class BenefitReport:
    """Outcome of executing the best ring repeatedly until none is left."""

    market: Market
    executions: list[tuple[Cycle, Fraction, Number, Number]] = field(default_factory=list)
    exhausted: bool = False

    @property
    def total_by_token(self) -> dict[str, Fraction]:
        totals: dict[str, Fraction] = {}
        for cycle, profit, _, _ in self.executions:
            totals[cycle.start_token] = totals.get(cycle.start_token, Fraction(0)) + profit
        return dict(sorted(totals.items()))


def exhaust_ring_arbitrage(
    market: Market,
    max_hops: int = 3,
    *,
    min_profit: Number = Fraction(1, 10**12),
    max_rounds: int = 1000,
    mode: str = "exact",
) -> BenefitReport:
    """Greedily execute the most profitable ring at its optimal size until none remains.

    Each round runs :func:`find_cycles` and executes the first opportunity
    (highest expected profit, ties by pool ids).  ``exhausted`` is False when
    ``max_rounds`` ran out first or the best ring failed to commit.

    Exact reserve denominators grow geometrically with every executed ring,
    so long runs should use ``mode="float"``.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    report = BenefitReport(market.to_float() if mode == "float" else market)
    for _ in range(max_rounds):
        opportunities = find_cycles(report.market, max_hops=max_hops, min_profit=min_profit)
        if not opportunities:
            report.exhausted = True
            break
        best = opportunities[0]
        before = rate_product(report.market, best.cycle)
        try:
            result = execute_ring(report.market, best.cycle, best.optimal_input)
        except Reverted:
            break
        report.market = result.market
        report.executions.append((best.cycle, result.profit, before, rate_product(result.market, best.cycle)))
    return report
