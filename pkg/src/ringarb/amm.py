"""Constant-product liquidity pools and the market that holds them.

Everything here is an immutable value: operations return new pools and
markets instead of editing them.  Reserves are normally exact ``Fraction``
values; ``Market.to_float`` gives a binary64 view of the same state for
search code that does not need exact identities.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Mapping

from ringarb.errors import (
    DuplicatePair,
    EmptyPool,
    IdenticalTokens,
    InsufficientLpBalance,
    InvalidAmount,
    InvalidFee,
    UnknownPool,
    UnknownToken,
    ZeroDeposit,
)
from ringarb.numeric import Number, exact_root, to_fraction

PPM = 1_000_000


@dataclass(frozen=True)
class FeeParams:
    """Retained fractions of a trade: ``r1`` on the input side, ``r2`` on the output side."""

    r1: Number
    r2: Number = Fraction(1)

    def __post_init__(self) -> None:
        for name in ("r1", "r2"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise InvalidFee(f"{name} must lie in (0, 1], got {value}")

    @classmethod
    def from_ppm(cls, fee_in_ppm: int, fee_out_ppm: int = PPM) -> "FeeParams":
        for value in (fee_in_ppm, fee_out_ppm):
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidFee(f"fee ppm must be an integer, got {value!r}")
        return cls(Fraction(fee_in_ppm, PPM), Fraction(fee_out_ppm, PPM))

    @property
    def rate(self) -> Number:
        return self.r1 * self.r2

    def to_ppm(self) -> tuple[int, int]:
        return int(Fraction(self.r1) * PPM), int(Fraction(self.r2) * PPM)

    def to_float(self) -> "FeeParams":
        return FeeParams(float(self.r1), float(self.r2))


UNISWAP_V2 = FeeParams(Fraction(997, 1000), Fraction(1))
NO_FEE = FeeParams(Fraction(1), Fraction(1))


@dataclass(frozen=True)
class Pool:
    id: str
    token0: str
    token1: str
    reserve0: Number
    reserve1: Number
    fees: FeeParams
    lp_supply: Number = Fraction(0)

    def __post_init__(self) -> None:
        if not self.token0 or not self.token1:
            raise ValueError("token symbols must be non-empty")
        if self.token0 == self.token1:
            raise IdenticalTokens(f"pool {self.id!r} pairs {self.token0!r} with itself")
        if self.reserve0 < 0 or self.reserve1 < 0 or self.lp_supply < 0:
            raise InvalidAmount(f"pool {self.id!r} has a negative balance")

    @property
    def tokens(self) -> tuple[str, str]:
        return self.token0, self.token1

    @property
    def is_empty(self) -> bool:
        return self.reserve0 <= 0 or self.reserve1 <= 0

    def other(self, token: str) -> str:
        if token == self.token0:
            return self.token1
        if token == self.token1:
            return self.token0
        raise UnknownToken(f"{token!r} is not traded in pool {self.id!r}")

    def oriented(self, input_token: str) -> tuple[Number, Number]:
        """(input-side reserve, output-side reserve) for a trade paying ``input_token``."""
        if input_token == self.token0:
            return self.reserve0, self.reserve1
        if input_token == self.token1:
            return self.reserve1, self.reserve0
        raise UnknownToken(f"{input_token!r} is not traded in pool {self.id!r}")

    def with_oriented(self, input_token: str, reserve_in: Number, reserve_out: Number) -> "Pool":
        if input_token == self.token0:
            return replace(self, reserve0=reserve_in, reserve1=reserve_out)
        return replace(self, reserve0=reserve_out, reserve1=reserve_in)

    def to_float(self) -> "Pool":
        return replace(
            self,
            reserve0=float(self.reserve0),
            reserve1=float(self.reserve1),
            fees=self.fees.to_float(),
            lp_supply=float(self.lp_supply),
        )


def swap_output(pool: Pool, input_token: str, delta_in: Number) -> Number:
    """Amount paid out for ``delta_in`` of ``input_token``; the pool is not changed."""
    x, y = pool.oriented(input_token)
    if x <= 0 or y <= 0:
        raise EmptyPool(f"pool {pool.id!r} has no liquidity")
    if delta_in < 0:
        raise InvalidAmount(f"negative swap input {delta_in}")
    r1, r2 = pool.fees.r1, pool.fees.r2
    return r1 * r2 * y * delta_in / (x + r1 * delta_in)


def apply_swap(pool: Pool, input_token: str, delta_in: Number) -> tuple[Pool, Number]:
    """Execute a swap and return the updated pool together with the output amount."""
    if delta_in <= 0:
        raise InvalidAmount(f"swap input must be positive, got {delta_in}")
    out = swap_output(pool, input_token, delta_in)
    x, y = pool.oriented(input_token)
    return pool.with_oriented(input_token, x + delta_in, y - out), out


def spot_rate(pool: Pool, input_token: str) -> Number:
    """Marginal pre-fee price of the input token in output-token units."""
    x, y = pool.oriented(input_token)
    if x <= 0 or y <= 0:
        raise EmptyPool(f"pool {pool.id!r} has no liquidity")
    return y / x


# -- market -----------------------------------------------------------------


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Market:
    """A registry of pools with a token adjacency index and LP-token ledger.

    ``unique_pairs`` mirrors the factory rule of one pool per token pair.  It can
    be switched off to model several venues quoting the same pair, which is the
    only way to obtain two-hop cycles.
    """

    pools: Mapping[str, Pool] = field(default_factory=dict)
    adjacency: Mapping[str, frozenset[str]] = field(default_factory=dict)
    lp_balances: Mapping[tuple[str, str], Number] = field(default_factory=dict)
    unique_pairs: bool = True

    @classmethod
    def from_pools(
        cls,
        pools: Iterable[Pool],
        *,
        unique_pairs: bool = True,
        lp_balances: Mapping[tuple[str, str], Number] | None = None,
    ) -> "Market":
        registry: dict[str, Pool] = {}
        adjacency: dict[str, set[str]] = {}
        seen: set[tuple[str, str]] = set()
        for pool in pools:
            if pool.id in registry:
                raise ValueError(f"duplicate pool id {pool.id!r}")
            pair = _pair(pool.token0, pool.token1)
            if unique_pairs and pair in seen:
                raise DuplicatePair(f"a pool for {pair[0]}/{pair[1]} already exists")
            seen.add(pair)
            registry[pool.id] = pool
            adjacency.setdefault(pool.token0, set()).add(pool.id)
            adjacency.setdefault(pool.token1, set()).add(pool.id)
        return cls(
            pools=registry,
            adjacency={t: frozenset(ids) for t, ids in adjacency.items()},
            lp_balances=dict(lp_balances or {}),
            unique_pairs=unique_pairs,
        )

    @property
    def tokens(self) -> list[str]:
        return sorted(self.adjacency)

    def pool(self, pool_id: str) -> Pool:
        try:
            return self.pools[pool_id]
        except KeyError:
            raise UnknownPool(f"no pool with id {pool_id!r}") from None

    def pools_between(self, a: str, b: str) -> list[Pool]:
        ids = self.adjacency.get(a, frozenset()) & self.adjacency.get(b, frozenset())
        return [self.pools[i] for i in sorted(ids)]

    def lp_balance(self, provider: str, pool_id: str) -> Number:
        return self.lp_balances.get((provider, pool_id), Fraction(0))

    def with_pools(self, *updated: Pool) -> "Market":
        """Replace pools by id; token pairs must be unchanged."""
        pools = dict(self.pools)
        for pool in updated:
            old = self.pool(pool.id)
            if old.tokens != pool.tokens:
                raise ValueError("with_pools cannot change a pool's tokens")
            pools[pool.id] = pool
        return replace(self, pools=pools)

    def with_fees(self, fees: FeeParams) -> "Market":
        """Same reserves, with one fee schedule applied to every pool."""
        return replace(self, pools={i: replace(p, fees=fees) for i, p in self.pools.items()})

    def to_float(self) -> "Market":
        return replace(
            self,
            pools={i: p.to_float() for i, p in self.pools.items()},
            lp_balances={k: float(v) for k, v in self.lp_balances.items()},
        )


def create_pool(
    market: Market,
    token0: str,
    token1: str,
    fees: FeeParams,
    pool_id: str | None = None,
) -> tuple[Market, str]:
    """Register an empty pool for a new token pair."""
    if token0 == token1:
        raise IdenticalTokens(f"cannot pair {token0!r} with itself")
    if market.unique_pairs and market.pools_between(token0, token1):
        raise DuplicatePair(f"a pool for {token0}/{token1} already exists")
    if pool_id is None:
        pool_id = f"{token0}/{token1}"
        n = 2
        while pool_id in market.pools:
            pool_id = f"{token0}/{token1}#{n}"
            n += 1
    elif pool_id in market.pools:
        raise ValueError(f"duplicate pool id {pool_id!r}")
    pool = Pool(pool_id, token0, token1, Fraction(0), Fraction(0), fees)
    pools = dict(market.pools)
    pools[pool_id] = pool
    adjacency = dict(market.adjacency)
    for token in (token0, token1):
        adjacency[token] = adjacency.get(token, frozenset()) | {pool_id}
    return replace(market, pools=pools, adjacency=adjacency), pool_id


def initial_mint(amount0: Number, amount1: Number, digits: int = 36) -> Fraction:
    """LP tokens minted by the first deposit: the geometric mean of both amounts.

    Exact when ``amount0 * amount1`` is a perfect rational square, otherwise
    rounded to ``digits`` significant digits.
    """
    product = to_fraction(amount0) * to_fraction(amount1)
    root = exact_root(product, 2)
    if root is not None:
        return root
    with localcontext() as ctx:
        ctx.prec = digits
        approx = (Decimal(product.numerator) / Decimal(product.denominator)).sqrt()
    return Fraction(approx)


def add_liquidity(
    market: Market,
    provider: str,
    pool_id: str,
    delta_x: Number,
    delta_y: Number | None = None,
    *,
    mint_digits: int = 36,
) -> tuple[Market, Number]:
    """Deposit ``delta_x`` of token0 and the matching token1 amount; return LP tokens minted.

    For a non-empty pool the token1 amount is implied by the reserve ratio and
    ``delta_y`` may be omitted.  The first deposit into an empty pool needs both
    amounts and mints their geometric mean.
    """
    pool = market.pool(pool_id)
    if delta_x <= 0:
        raise ZeroDeposit(f"deposit must be positive, got {delta_x}")
    if pool.is_empty:
        if delta_y is None or delta_y <= 0:
            raise ZeroDeposit("the first deposit needs a positive amount of both tokens")
        minted = initial_mint(delta_x, delta_y, mint_digits)
    else:
        implied = delta_x * pool.reserve1 / pool.reserve0
        if delta_y is not None and delta_y != implied:
            raise InvalidAmount(f"deposit ratio mismatch: expected {implied} of {pool.token1}")
        if pool.lp_supply <= 0:
            raise InvalidAmount(f"pool {pool_id!r} holds reserves but has no LP supply")
        delta_y = implied
        minted = pool.lp_supply * delta_x / pool.reserve0
    new_pool = replace(
        pool,
        reserve0=pool.reserve0 + delta_x,
        reserve1=pool.reserve1 + delta_y,
        lp_supply=pool.lp_supply + minted,
    )
    balances = dict(market.lp_balances)
    key = (provider, pool_id)
    balances[key] = balances.get(key, Fraction(0)) + minted
    return replace(market.with_pools(new_pool), lp_balances=balances), minted


def remove_liquidity(
    market: Market, provider: str, pool_id: str, delta_c: Number
) -> tuple[Market, Number, Number]:
    """Burn ``delta_c`` LP tokens and return the proportional share of both reserves."""
    pool = market.pool(pool_id)
    if delta_c <= 0:
        raise InvalidAmount(f"burn amount must be positive, got {delta_c}")
    balance = market.lp_balance(provider, pool_id)
    if delta_c > balance:
        raise InsufficientLpBalance(f"{provider!r} holds {balance} LP tokens, asked to burn {delta_c}")
    share = delta_c / pool.lp_supply
    dx, dy = pool.reserve0 * share, pool.reserve1 * share
    new_pool = replace(
        pool,
        reserve0=pool.reserve0 - dx,
        reserve1=pool.reserve1 - dy,
        lp_supply=pool.lp_supply - delta_c,
    )
    balances = dict(market.lp_balances)
    remaining = balance - delta_c
    if remaining:
        balances[(provider, pool_id)] = remaining
    else:
        del balances[(provider, pool_id)]
    return replace(market.with_pools(new_pool), lp_balances=balances), dx, dy


def swap(market: Market, pool_id: str, input_token: str, delta_in: Number) -> tuple[Market, Number]:
    """Market-level wrapper around :func:`apply_swap`."""
    pool, out = apply_swap(market.pool(pool_id), input_token, delta_in)
    return market.with_pools(pool), out
