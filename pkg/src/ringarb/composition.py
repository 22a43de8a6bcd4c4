"""Fold a multi-hop trading path into one equivalent constant-product pool."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ringarb.amm import FeeParams, Market, Pool
from ringarb.errors import EmptyPool, FeeMismatch, InvalidAmount, TokenMismatch
from ringarb.numeric import Number


@dataclass(frozen=True)
class SwapLeg:
    pool_id: str
    input_token: str

    def to_dict(self) -> dict:
        return {"pool_id": self.pool_id, "input_token": self.input_token}


@dataclass(frozen=True)
class VirtualPool:
    """A directed pool: pay ``token_in`` against ``reserve_in``, receive from ``reserve_out``."""

    reserve_in: Number
    reserve_out: Number
    fees: FeeParams
    token_in: str | None = None
    token_out: str | None = None

    @classmethod
    def from_pool(cls, pool: Pool, input_token: str) -> "VirtualPool":
        x, y = pool.oriented(input_token)
        return cls(x, y, pool.fees, input_token, pool.other(input_token))


def virtual_swap_output(vp: VirtualPool, delta_in: Number) -> Number:
    if vp.reserve_in <= 0 or vp.reserve_out <= 0:
        raise EmptyPool("virtual pool has no liquidity")
    if delta_in < 0:
        raise InvalidAmount(f"negative swap input {delta_in}")
    r1, r2 = vp.fees.r1, vp.fees.r2
    return r1 * r2 * vp.reserve_out * delta_in / (vp.reserve_in + r1 * delta_in)


def chain(first: VirtualPool, second: VirtualPool) -> VirtualPool:
    """Compose two directed pools traded back to back.

    With ``r = r1*r2`` the two-hop trade through (x1, y1) then (y2, z2) behaves
    like a single pool with reserves
    ``x1*y2 / (y2 + r*y1)`` and ``r*y1*z2 / (y2 + r*y1)``.
    """
    if first.token_out is not None and second.token_in is not None and first.token_out != second.token_in:
        raise TokenMismatch(f"leg pays out {first.token_out!r} but next leg takes {second.token_in!r}")
    if first.fees != second.fees:
        raise FeeMismatch(f"cannot compose pools with fees {first.fees} and {second.fees}")
    if min(first.reserve_in, first.reserve_out, second.reserve_in, second.reserve_out) <= 0:
        raise EmptyPool("cannot compose an empty pool")
    r = first.fees.rate
    denom = second.reserve_in + r * first.reserve_out
    return VirtualPool(
        reserve_in=first.reserve_in * second.reserve_in / denom,
        reserve_out=r * first.reserve_out * second.reserve_out / denom,
        fees=first.fees,
        token_in=first.token_in,
        token_out=second.token_out,
    )


def compose_pair(first: tuple[Pool, str], second: tuple[Pool, str]) -> VirtualPool:
    """Virtual pool for ``(pool, input_token)`` followed by ``(pool, input_token)``."""
    return chain(VirtualPool.from_pool(*first), VirtualPool.from_pool(*second))


def resolve_path(legs: Sequence[SwapLeg], market: Market) -> list[VirtualPool]:
    """Look legs up in the market and check that they chain over distinct pools."""
    if not legs:
        raise ValueError("a trading path needs at least one leg")
    seen: set[str] = set()
    hops = []
    for leg in legs:
        if leg.pool_id in seen:
            raise ValueError(f"pool {leg.pool_id!r} appears twice in the path")
        seen.add(leg.pool_id)
        hop = VirtualPool.from_pool(market.pool(leg.pool_id), leg.input_token)
        if hops and hops[-1].token_out != hop.token_in:
            raise TokenMismatch(
                f"leg through {leg.pool_id!r} takes {hop.token_in!r}, previous leg pays {hops[-1].token_out!r}"
            )
        hops.append(hop)
    return hops


def compose_path(legs: Sequence[SwapLeg], market: Market) -> VirtualPool:
    """Left fold of :func:`chain` over the path; a single leg is returned as-is."""
    hops = resolve_path(legs, market)
    vp = hops[0]
    for hop in hops[1:]:
        vp = chain(vp, hop)
    return vp
