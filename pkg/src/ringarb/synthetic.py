"""Seeded random markets for simulation, benchmarks and property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from ringarb.amm import UNISWAP_V2, FeeParams, Market, Pool


def token_names(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"T{i:0{width}d}" for i in range(n)]


def random_pairs(rng: random.Random, tokens: list[str], n_pools: int) -> list[tuple[str, str]]:
    """``n_pools`` distinct unordered pairs; a spanning path comes first so the graph is connected."""
    limit = len(tokens) * (len(tokens) - 1) // 2
    if n_pools > limit:
        raise ValueError(f"{len(tokens)} tokens allow at most {limit} pools")
    order = tokens[:]
    rng.shuffle(order)
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()

    def add(a: str, b: str) -> None:
        key = (a, b) if a < b else (b, a)
        if a != b and key not in seen:
            seen.add(key)
            pairs.append(key)

    for a, b in zip(order, order[1:]):
        if len(pairs) == n_pools:
            break
        add(a, b)
    while len(pairs) < n_pools:
        add(rng.choice(tokens), rng.choice(tokens))
    return pairs


def random_market(
    n_tokens: int,
    n_pools: int,
    *,
    seed: int = 0,
    fees: FeeParams = UNISWAP_V2,
    balanced: bool = False,
    noise: float = 0.2,
    reserve_range: tuple[int, int] = (1_000, 1_000_000),
) -> Market:
    """A connected market of integer-reserve pools.

    Each token gets an integer price.  Balanced markets set every pool's
    reserves proportional to the inverse prices, so every ring has index
    exactly 1.  Otherwise each reserve is scaled by an independent factor in
    ``[1 - noise, 1 + noise]``, rounded to an integer.
    """
    rng = random.Random(seed)
    tokens = token_names(n_tokens)
    price = {t: rng.randint(1, 1000) for t in tokens}
    pools = []
    for a, b in random_pairs(rng, tokens, n_pools):
        depth = rng.randint(*reserve_range)
        ra, rb = depth * price[b], depth * price[a]
        if not balanced:
            ra = max(1, round(ra * rng.uniform(1 - noise, 1 + noise)))
            rb = max(1, round(rb * rng.uniform(1 - noise, 1 + noise)))
        pools.append(Pool(f"{a}/{b}", a, b, Fraction(ra), Fraction(rb), fees))
    return Market.from_pools(pools)


def random_triangle(rng: random.Random, fees: FeeParams = UNISWAP_V2, lo: int = 1, hi: int = 10_000) -> Market:
    """Three tokens A, B, C fully connected with independent random integer reserves."""
    pools = [
        Pool(f"{a}/{b}", a, b, Fraction(rng.randint(lo, hi)), Fraction(rng.randint(lo, hi)), fees)
        for a, b in (("A", "B"), ("B", "C"), ("A", "C"))
    ]
    return Market.from_pools(pools)
