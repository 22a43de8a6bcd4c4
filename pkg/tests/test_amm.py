from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import amounts, fee_params, reserves
from oracles import cp_output
from ringarb.amm import (
    NO_FEE,
    UNISWAP_V2,
    FeeParams,
    Market,
    Pool,
    add_liquidity,
    apply_swap,
    create_pool,
    initial_mint,
    remove_liquidity,
    spot_rate,
    swap,
    swap_output,
)
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


def pool(x, y, fees=UNISWAP_V2, c=0):
    return Pool("AB", "A", "B", Fraction(x), Fraction(y), fees, Fraction(c))


def market_with(x, y, c, holder="lp"):
    return Market.from_pools([pool(x, y, c=c)], lp_balances={(holder, "AB"): Fraction(c)})


# -- fees -------------------------------------------------------------------


@pytest.mark.parametrize("r1, r2", [(0, 1), (Fraction(11, 10), 1), (1, 0), (1, -1)])
def test_fee_params_reject_out_of_range(r1, r2):
    with pytest.raises(InvalidFee):
        FeeParams(Fraction(r1), Fraction(r2))


def test_fee_params_from_ppm():
    assert FeeParams.from_ppm(997_000) == UNISWAP_V2
    assert UNISWAP_V2.to_ppm() == (997_000, 1_000_000)
    with pytest.raises(InvalidFee):
        FeeParams.from_ppm(1.5)


# -- create_pool ------------------------------------------------------------


def test_create_pool_registers_empty_pool():
    market, pid = create_pool(Market.from_pools([]), "A", "B", UNISWAP_V2)
    assert len(market.pools) == 1
    assert (market.pool(pid).reserve0, market.pool(pid).reserve1) == (0, 0)
    assert market.adjacency == {"A": {pid}, "B": {pid}}


def test_create_pool_rejects_duplicate_pair_either_order():
    market, _ = create_pool(Market.from_pools([]), "A", "B", UNISWAP_V2)
    with pytest.raises(DuplicatePair):
        create_pool(market, "A", "B", UNISWAP_V2)
    with pytest.raises(DuplicatePair):
        create_pool(market, "B", "A", UNISWAP_V2)


def test_create_pool_rejects_identical_tokens():
    with pytest.raises(IdenticalTokens):
        create_pool(Market.from_pools([]), "A", "A", UNISWAP_V2)


def test_parallel_pools_when_pairs_may_repeat():
    market = Market.from_pools([], unique_pairs=False)
    market, first = create_pool(market, "A", "B", UNISWAP_V2)
    market, second = create_pool(market, "A", "B", UNISWAP_V2)
    assert first != second
    assert len(market.pools_between("B", "A")) == 2


# -- swaps ------------------------------------------------------------------


def test_swap_output_frozen_value():
    assert swap_output(pool(1000, 1000), "A", Fraction(100)) == Fraction(997000, 10997)


def test_swap_output_zero_input_is_zero():
    assert swap_output(pool(1000, 1000), "B", Fraction(0)) == 0


def test_input_fee_is_three_per_mille():
    # the retained input 997 trades like a fee-free deposit of 997
    assert swap_output(pool(5000, 8000), "A", Fraction(1000)) == swap_output(pool(5000, 8000, NO_FEE), "A", Fraction(997))


def test_apply_swap_frozen_reserves():
    updated, out = apply_swap(pool(1000, 1000), "A", Fraction(100))
    assert (updated.reserve0, updated.reserve1) == (1100, 1000 - Fraction(997000, 10997))
    assert out == Fraction(997000, 10997)
    assert updated.lp_supply == 0


def test_apply_swap_no_fee_keeps_product():
    updated, _ = apply_swap(pool(100, 100, NO_FEE), "A", Fraction(100))
    assert (updated.reserve0, updated.reserve1) == (200, 50)


def test_apply_swap_rejects_zero():
    with pytest.raises(InvalidAmount):
        apply_swap(pool(10, 10), "A", Fraction(0))


def test_swap_errors():
    with pytest.raises(UnknownToken):
        swap_output(pool(10, 10), "C", Fraction(1))
    with pytest.raises(EmptyPool):
        swap_output(pool(0, 0), "A", Fraction(1))
    with pytest.raises(UnknownPool):
        swap(Market.from_pools([pool(10, 10)]), "nope", "A", Fraction(1))


def test_spot_rate():
    p = pool(100, 400)
    assert spot_rate(p, "A") == 4
    assert spot_rate(p, "B") == Fraction(1, 4)
    assert spot_rate(pool(7, 7), "A") == 1


@given(x=reserves, y=reserves, d=amounts, fees=fee_params(), side=st.sampled_from("AB"))
def test_constant_product_identity(x, y, d, fees, side):
    p = pool(x, y, fees)
    updated, out = apply_swap(p, side, d)
    X, Y = p.oriented(side)
    X2, Y2 = updated.oriented(side)
    assert X * Y == (X + fees.r1 * d) * (Y - out / fees.r2)
    assert out == cp_output(X, Y, d, fees.r1, fees.r2)
    assert 0 < out < Y
    assert (X2, Y2) == (X + d, Y - out)


@given(x=reserves, y=reserves, d=amounts, fees=fee_params())
def test_product_grows_exactly_when_fees_bite(x, y, d, fees):
    p = pool(x, y, fees)
    updated, _ = apply_swap(p, "A", d)
    before, after = x * y, updated.reserve0 * updated.reserve1
    if fees.rate < 1:
        assert after > before
    else:
        assert after == before


@given(x=reserves, y=reserves, a=amounts, b=amounts, fees=fee_params())
def test_output_increasing_and_concave(x, y, a, b, fees):
    p = pool(x, y, fees)
    if a == b:
        return
    lo, hi = min(a, b), max(a, b)
    assert swap_output(p, "A", lo) < swap_output(p, "A", hi)
    mid = swap_output(p, "A", (a + b) / 2)
    assert mid > (swap_output(p, "A", a) + swap_output(p, "A", b)) / 2


# -- liquidity --------------------------------------------------------------


def test_add_liquidity_frozen_example():
    market, minted = add_liquidity(market_with(100, 400, 50), "bob", "AB", Fraction(10))
    p = market.pool("AB")
    assert minted == 5
    assert (p.reserve0, p.reserve1, p.lp_supply) == (110, 440, 55)
    assert market.lp_balance("bob", "AB") == 5


def test_add_liquidity_rejects_zero_and_bad_ratio():
    with pytest.raises(ZeroDeposit):
        add_liquidity(market_with(100, 400, 50), "bob", "AB", Fraction(0))
    with pytest.raises(InvalidAmount):
        add_liquidity(market_with(100, 400, 50), "bob", "AB", Fraction(10), Fraction(41))


def test_first_deposit_mints_geometric_mean():
    market, pid = create_pool(Market.from_pools([]), "A", "B", UNISWAP_V2)
    market, minted = add_liquidity(market, "alice", pid, Fraction(9), Fraction(4))
    assert minted == 6
    assert market.pool(pid).lp_supply == 6
    with pytest.raises(ZeroDeposit):
        add_liquidity(create_pool(Market.from_pools([]), "A", "B", UNISWAP_V2)[0], "a", "A/B", Fraction(9))


def test_initial_mint_irrational_root_is_close():
    minted = initial_mint(Fraction(2), Fraction(1))
    assert abs(minted * minted - 2) < Fraction(1, 10**34)


def test_remove_liquidity_frozen_example():
    market = market_with(110, 440, 55, holder="other")
    market = Market.from_pools(
        market.pools.values(), lp_balances={("other", "AB"): Fraction(50), ("bob", "AB"): Fraction(5)}
    )
    market, dx, dy = remove_liquidity(market, "bob", "AB", Fraction(5))
    assert (dx, dy) == (10, 40)
    assert market.pool("AB").lp_supply == 50
    assert market.lp_balance("bob", "AB") == 0


def test_remove_everything():
    market, dx, dy = remove_liquidity(market_with(110, 440, 55), "lp", "AB", Fraction(55))
    assert (dx, dy) == (110, 440)
    assert market.pool("AB").is_empty


def test_remove_more_than_held():
    with pytest.raises(InsufficientLpBalance):
        remove_liquidity(market_with(110, 440, 55), "lp", "AB", Fraction(56))


@given(x=reserves, y=reserves, d=amounts)
def test_add_remove_round_trip_and_ratio(x, y, d):
    market = market_with(x, y, 1000)
    market2, minted = add_liquidity(market, "bob", "AB", d)
    p = market2.pool("AB")
    assert p.reserve1 / p.reserve0 == y / x
    market3, dx, dy = remove_liquidity(market2, "bob", "AB", minted)
    assert (dx, dy) == (d, d * y / x)
    p3 = market3.pool("AB")
    assert (p3.reserve0, p3.reserve1) == (x, y)


@given(
    ca=amounts,
    cb=amounts,
    trades=st.lists(st.tuples(st.sampled_from("AB"), amounts), min_size=1, max_size=5),
)
def test_fee_share_is_proportional(ca, cb, trades):
    market = Market.from_pools(
        [pool(1000, 3000, c=ca + cb)], lp_balances={("a", "AB"): ca, ("b", "AB"): cb}
    )
    for token, d in trades:
        market, _ = swap(market, "AB", token, d)
    _, ax, ay = remove_liquidity(market, "a", "AB", ca)
    _, bx, by = remove_liquidity(market, "b", "AB", cb)
    assert ax * cb == bx * ca
    assert ay * cb == by * ca
