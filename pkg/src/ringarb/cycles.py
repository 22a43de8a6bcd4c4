"""Ring (cyclic) arbitrage: profitability, sizing, atomic execution and search.

A cycle is a closed trading path over distinct pools.  Its utility for an
input ``d`` is the composed virtual-pool output minus ``d``; the utility is
strictly concave, so the sign of its slope at zero decides whether any
profitable input exists, and that slope has the closed form
``(r1*r2)**hops * index - 1`` where ``index`` is the product of the pools'
output/input reserve ratios around the cycle.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from ringarb.amm import Market, Pool, apply_swap
from ringarb.composition import SwapLeg, VirtualPool, chain, resolve_path, virtual_swap_output
from ringarb.errors import (
    FeeMismatch,
    InvalidCycle,
    NotProfitable,
    Reverted,
    TokenMismatch,
    UnknownPool,
    UnknownToken,
)
from ringarb.numeric import Number, format_decimal

log = logging.getLogger(__name__)

DEFAULT_MAX_HOPS = 4
BRACKET_REL = 1e-12


@dataclass(frozen=True)
class Cycle:
    legs: tuple[SwapLeg, ...]

    @classmethod
    def of(cls, *legs: tuple[str, str]) -> "Cycle":
        """Build from ``(pool_id, input_token)`` pairs."""
        return cls(tuple(SwapLeg(p, t) for p, t in legs))

    @property
    def n_hops(self) -> int:
        return len(self.legs)

    @property
    def start_token(self) -> str:
        return self.legs[0].input_token

    @property
    def pool_ids(self) -> tuple[str, ...]:
        return tuple(leg.pool_id for leg in self.legs)

    def to_list(self) -> list[dict]:
        return [leg.to_dict() for leg in self.legs]


def cycle_hops(cycle: Cycle, market: Market) -> list[VirtualPool]:
    """Directed pools along the cycle, after checking that it is a valid ring."""
    if cycle.n_hops < 2:
        raise InvalidCycle("a cycle needs at least two legs")
    try:
        hops = resolve_path(cycle.legs, market)
    except (UnknownPool, UnknownToken, TokenMismatch, ValueError) as exc:
        raise InvalidCycle(str(exc)) from exc
    if hops[-1].token_out != hops[0].token_in:
        raise InvalidCycle(f"path ends in {hops[-1].token_out!r}, not {hops[0].token_in!r}")
    if any(h.fees != hops[0].fees for h in hops):
        raise FeeMismatch("all pools on a cycle must share one fee schedule")
    return hops


def reverse_cycle(cycle: Cycle, market: Market) -> Cycle:
    """The same ring traded in the opposite orientation, from the same start token."""
    legs = []
    for leg in reversed(cycle.legs):
        pool = market.pool(leg.pool_id)
        legs.append(SwapLeg(leg.pool_id, pool.other(leg.input_token)))
    return Cycle(tuple(legs))


def compose_cycle(cycle: Cycle, market: Market) -> VirtualPool:
    hops = cycle_hops(cycle, market)
    vp = hops[0]
    for hop in hops[1:]:
        vp = chain(vp, hop)
    return vp


def cycle_utility(cycle: Cycle, market: Market, delta: Number) -> Number:
    """Net gain, in start-token units, of pushing ``delta`` around the ring."""
    return virtual_swap_output(compose_cycle(cycle, market), delta) - delta


def _index(hops: Sequence[VirtualPool]) -> Number:
    num, den = 1, 1
    for h in hops:
        num *= h.reserve_out
        den *= h.reserve_in
    return num / den if not isinstance(num, int) else Fraction(num, den)


def arbitrage_index(cycle: Cycle, market: Market) -> Number:
    """Product of output/input reserve ratios around the cycle (fee independent)."""
    return _index(cycle_hops(cycle, market))


def _marginal(hops: Sequence[VirtualPool]) -> Number:
    return hops[0].fees.rate ** len(hops) * _index(hops) - 1


def marginal_at_zero(cycle: Cycle, market: Market) -> Number:
    """Slope of the cycle utility at zero input."""
    return _marginal(cycle_hops(cycle, market))


def is_profitable(cycle: Cycle, market: Market) -> bool:
    return marginal_at_zero(cycle, market) > 0


def best_direction(cycle: Cycle, market: Market) -> Cycle | None:
    """The profitable orientation of the ring, or None; at most one can qualify."""
    if is_profitable(cycle, market):
        return cycle
    reverse = reverse_cycle(cycle, market)
    if is_profitable(reverse, market):
        return reverse
    return None


# -- sizing -----------------------------------------------------------------


@dataclass(frozen=True)
class Sizing:
    """Optimal input on a virtual pool with a bracket around the true optimum.

    ``certified`` is True when the utility slope was checked to be positive at
    ``lower`` and negative at ``upper``.
    """

    delta: Number
    profit: Number
    lower: Number
    upper: Number
    certified: bool


def _slope(vp: VirtualPool, d: Number) -> Number:
    r1, r2 = vp.fees.r1, vp.fees.r2
    s = vp.reserve_in + r1 * d
    return r1 * r2 * vp.reserve_out * vp.reserve_in / (s * s) - 1


def _curvature(vp: VirtualPool, d: Number) -> Number:
    r1, r2 = vp.fees.r1, vp.fees.r2
    s = vp.reserve_in + r1 * d
    return -2 * r1 * r1 * r2 * vp.reserve_out * vp.reserve_in / (s * s * s)


def size_virtual(vp: VirtualPool, *, max_polish: int = 4) -> Sizing:
    """Maximise ``virtual_swap_output(vp, d) - d`` over ``d >= 0``.

    Setting the slope to zero gives ``d* = (sqrt(r1*r2*x*z) - x) / r1``.  The
    root is taken in binary64, then polished with Newton steps evaluated in
    the pool's own arithmetic (exact for rational pools) until the relative
    bracket ``d*(1 -+ 1e-12)`` provably straddles the optimum.
    """
    conv = Fraction if isinstance(vp.reserve_in, Fraction) else float
    x, z = float(vp.reserve_in), float(vp.reserve_out)
    if _slope(vp, 0) <= 0:
        raise NotProfitable("utility slope at zero is not positive")
    d = (math.sqrt(float(vp.fees.rate) * x * z) - x) / float(vp.fees.r1)
    lo = hi = d
    certified = False
    for attempt in range(max_polish + 1):
        if d > 0:
            lo, hi = d * (1 - BRACKET_REL), d * (1 + BRACKET_REL)
            if _slope(vp, conv(lo)) > 0 > _slope(vp, conv(hi)):
                certified = True
                break
        if attempt == max_polish:
            break
        # cancellation can push the float root to <= 0; restart just right of zero
        point = conv(d) if d > 0 else conv(x * 1e-16)
        d = float(point - _slope(vp, point) / _curvature(vp, point))
    if not d > 0:
        raise NotProfitable("optimal input underflows to zero")
    delta = conv(d)
    profit = virtual_swap_output(vp, delta) - delta
    return Sizing(delta, profit, conv(lo), conv(hi), certified)


def optimal_input(cycle: Cycle, market: Market) -> tuple[Number, Number]:
    """(optimal input, utility at that input) for a profitable cycle."""
    s = size_virtual(compose_cycle(cycle, market))
    return s.delta, s.profit


# -- atomic execution -------------------------------------------------------


@dataclass(frozen=True)
class Fill:
    pool_id: str
    token_in: str
    token_out: str
    amount_in: Number
    amount_out: Number


@dataclass(frozen=True)
class RingExecution:
    market: Market
    profit: Number
    fills: tuple[Fill, ...]


def execute_ring(market: Market, cycle: Cycle, delta: Number, min_profit: Number = 0) -> RingExecution:
    """Trade ``delta`` around the ring leg by leg, all or nothing.

    The ring commits only if the realised profit is strictly positive and at
    least ``min_profit``; otherwise :class:`Reverted` is raised and the caller's
    market is left untouched.
    """
    cycle_hops(cycle, market)
    if delta <= 0:
        raise ValueError(f"ring input must be positive, got {delta}")
    touched: list[Pool] = []
    fills: list[Fill] = []
    amount = delta
    for leg in cycle.legs:
        pool = market.pool(leg.pool_id)
        updated, out = apply_swap(pool, leg.input_token, amount)
        touched.append(updated)
        fills.append(Fill(leg.pool_id, leg.input_token, pool.other(leg.input_token), amount, out))
        amount = out
    profit = amount - delta
    if profit <= 0 or profit < min_profit:
        raise Reverted(profit, min_profit)
    return RingExecution(market.with_pools(*touched), profit, tuple(fills))


# -- search -----------------------------------------------------------------


@dataclass(frozen=True)
class ArbOpportunity:
    cycle: Cycle
    direction: str
    index: Number
    marginal_at_zero: Number
    optimal_input: Number
    expected_profit: Number

    def to_dict(self, significant: int = 18) -> dict:
        return {
            "cycle": self.cycle.to_list(),
            "direction": self.direction,
            "index": format_decimal(self.index, significant),
            "marginal": format_decimal(self.marginal_at_zero, significant),
            "optimal_input": format_decimal(self.optimal_input, significant),
            "expected_profit": format_decimal(self.expected_profit, significant),
        }


def enumerate_cycles(
    market: Market,
    max_hops: int = DEFAULT_MAX_HOPS,
    start_token: str | None = None,
    tokens: set[str] | None = None,
) -> Iterator[Cycle]:
    """Yield every simple ring of 2..max_hops legs once, in one fixed orientation.

    Rings visit distinct tokens and distinct pools.  Unanchored rings start at
    their smallest token; anchored rings start at ``start_token``.  Of the two
    orientations the one whose first pool id sorts before its last is kept.
    ``tokens`` restricts the search to a subset of tokens.
    """
    if max_hops < 2:
        raise ValueError("max_hops must be at least 2")
    nbrs: dict[str, list[tuple[str, str]]] = {}
    for pid in sorted(market.pools):
        pool = market.pools[pid]
        if pool.is_empty:
            continue
        if tokens is not None and not (pool.token0 in tokens and pool.token1 in tokens):
            continue
        nbrs.setdefault(pool.token0, []).append((pool.token1, pid))
        nbrs.setdefault(pool.token1, []).append((pool.token0, pid))

    anchored = start_token is not None
    starts = [start_token] if anchored else sorted(nbrs)
    for s in starts:
        if s not in nbrs:
            continue
        closers: dict[str, list[str]] = {}
        for other, pid in nbrs[s]:
            closers.setdefault(other, []).append(pid)
        legs: list[SwapLeg] = []
        used: set[str] = set()
        on_path = {s}

        def walk(t: str) -> Iterator[Cycle]:
            depth = len(legs)
            if depth >= 1:
                for pid in closers.get(t, ()):
                    if pid not in used and legs[0].pool_id < pid:
                        yield Cycle((*legs, SwapLeg(pid, t)))
            if depth + 1 >= max_hops:
                return
            for u, pid in nbrs[t]:
                if u in on_path or pid in used or (not anchored and u < s):
                    continue
                legs.append(SwapLeg(pid, t))
                used.add(pid)
                on_path.add(u)
                yield from walk(u)
                on_path.discard(u)
                used.discard(pid)
                legs.pop()

        yield from walk(s)


def arbitrage_tokens(market: Market, slack: float = 1e-9) -> set[str]:
    """Tokens in connected components that contain a profitable ring of any length.

    Runs Bellman-Ford on edge weights ``-ln(r1*r2*spot_rate)`` from a virtual
    source.  ``slack`` is subtracted from every weight so that rings sitting on
    the profitability boundary are kept rather than pruned.
    """
    tokens = market.tokens
    index = {t: i for i, t in enumerate(tokens)}
    src, dst, weight = [], [], []
    for pool in market.pools.values():
        if pool.is_empty:
            continue
        ln_rate = math.log(float(pool.fees.rate))
        ln0, ln1 = math.log(float(pool.reserve0)), math.log(float(pool.reserve1))
        i, j = index[pool.token0], index[pool.token1]
        src += [i, j]
        dst += [j, i]
        weight += [-(ln_rate + ln1 - ln0) - slack, -(ln_rate + ln0 - ln1) - slack]
    if not src:
        return set()
    src_a, dst_a, w = np.array(src), np.array(dst), np.array(weight)
    dist = np.zeros(len(tokens))
    for _ in range(len(tokens)):
        relaxed = dist.copy()
        np.minimum.at(relaxed, dst_a, dist[src_a] + w)
        if np.array_equal(relaxed, dist):
            return set()
        dist = relaxed
    hot = {tokens[k] for k in dst_a[dist[src_a] + w < dist[dst_a]]}
    found: set[str] = set()
    for seed in sorted(hot):
        if seed in found:
            continue
        queue = deque([seed])
        found.add(seed)
        while queue:
            t = queue.popleft()
            for pid in market.adjacency.get(t, ()):
                u = market.pools[pid].other(t)
                if u not in found:
                    found.add(u)
                    queue.append(u)
    return found


def find_cycles(
    market: Market,
    start_token: str | None = None,
    max_hops: int = DEFAULT_MAX_HOPS,
    *,
    mode: str = "exact",
    prefilter: bool = False,
    min_profit: Number = 0,
) -> list[ArbOpportunity]:
    """All profitable rings up to ``max_hops`` legs, best expected profit first.

    ``mode="float"`` evaluates on the binary64 view of the market.  Ties in
    profit are broken by the ring's pool-id sequence.  Rings whose pools carry
    different fee schedules are skipped.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    view = market.to_float() if mode == "float" else market
    allowed = arbitrage_tokens(market) if prefilter else None
    if allowed is not None and not allowed:
        return []
    found: list[ArbOpportunity] = []
    for cycle in enumerate_cycles(view, max_hops, start_token, allowed):
        try:
            hops = cycle_hops(cycle, view)
        except FeeMismatch:
            log.debug("skipping mixed-fee ring %s", cycle.pool_ids)
            continue
        index = _index(hops)
        rate_n = hops[0].fees.rate ** len(hops)
        if rate_n * index > 1:
            direction, ring, ring_index = "forward", cycle, index
        elif rate_n / index > 1:
            direction, ring = "reverse", reverse_cycle(cycle, view)
            ring_index = 1 / index
        else:
            continue
        try:
            sizing = size_virtual(compose_cycle(ring, view))
        except NotProfitable:
            continue
        if sizing.profit <= 0 or sizing.profit < min_profit:
            continue
        found.append(
            ArbOpportunity(ring, direction, ring_index, rate_n * ring_index - 1, sizing.delta, sizing.profit)
        )
    found.sort(key=lambda o: o.cycle.pool_ids)
    found.sort(key=lambda o: o.expected_profit, reverse=True)
    return found
