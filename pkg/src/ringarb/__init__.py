"""Constant-product AMM arithmetic and ring (cyclic) arbitrage analysis."""

from ringarb.amm import (
    NO_FEE,
    UNISWAP_V2,
    FeeParams,
    Market,
    Pool,
    add_liquidity,
    apply_swap,
    create_pool,
    remove_liquidity,
    swap,
    swap_output,
)
from ringarb.analysis import (
    ConvergenceReport,
    ConvergenceScenario,
    balance_report,
    compare_convergence,
    detect_pair_arbitrage,
    exhaust_ring_arbitrage,
)
from ringarb.composition import SwapLeg, VirtualPool, compose_path, virtual_swap_output
from ringarb.cycles import (
    ArbOpportunity,
    Cycle,
    arbitrage_index,
    cycle_utility,
    execute_ring,
    find_cycles,
    marginal_at_zero,
    optimal_input,
)
from ringarb.errors import RingArbError
from ringarb.fees import cycle_fee_threshold, market_fee_threshold, sweep_fee_profitability
from ringarb.marketfile import load_market
from ringarb.traces import group_cyclic_transactions, parse_events, revenue_summary

__all__ = [
    "NO_FEE", "UNISWAP_V2", "FeeParams", "Market", "Pool", "add_liquidity", "apply_swap",
    "create_pool", "remove_liquidity", "swap", "swap_output",
    "ConvergenceReport", "ConvergenceScenario", "balance_report", "compare_convergence",
    "detect_pair_arbitrage", "exhaust_ring_arbitrage",
    "SwapLeg", "VirtualPool", "compose_path", "virtual_swap_output",
    "ArbOpportunity", "Cycle", "arbitrage_index", "cycle_utility", "execute_ring", "find_cycles",
    "marginal_at_zero", "optimal_input",
    "RingArbError",
    "cycle_fee_threshold", "market_fee_threshold", "sweep_fee_profitability",
    "load_market",
    "group_cyclic_transactions", "parse_events", "revenue_summary",
]
