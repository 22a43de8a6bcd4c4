import json
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES, FORWARD
from ringarb.cycles import execute_ring, find_cycles, optimal_input
from ringarb.errors import NoValidEvents
from ringarb.synthetic import random_market
from ringarb.traces import (
    SwapEvent,
    classify_transactions,
    events_from_fills,
    group_cyclic_transactions,
    parse_events,
    revenue_summary,
)


def line(tx="0x1", block=1, log=0, tin="A", tout="B", ain="1", aout="2"):
    return json.dumps(
        {"tx_id": tx, "block": block, "log_index": log, "token_in": tin, "token_out": tout, "amount_in": ain, "amount_out": aout}
    )


def legs(*hops, tx="0x1"):
    """hops: (token_in, token_out, amount_in, amount_out)"""
    return [line(tx, 1, i, *h) for i, h in enumerate(hops)]


def fig_ring():
    with open(FIXTURES / "fig_ring.jsonl", "rb") as fh:
        return parse_events(fh).events


# -- parsing ----------------------------------------------------------------


def test_empty_input():
    assert parse_events([]) == ([], [])
    assert parse_events(["", "  \n"]) == ([], [])


def test_one_event_exact_amounts():
    events, errors = parse_events([line(ain="285.71", aout="0.000000000000000000000000000000000001")])
    assert errors == []
    assert events[0].amount_in == Fraction(28571, 100)
    assert events[0].amount_out == Fraction(1, 10**36)


def test_bad_lines_are_reported_with_numbers():
    lines = [line(), line(log=1, ain="-1"), "{not json", line(log=2, tin="A", tout="A"), line(log=0), line(log=3, ain="0")]
    events, errors = parse_events(lines)
    assert len(events) == 1
    assert [e.line for e in errors] == [2, 3, 4, 5, 6]
    assert "duplicate" in errors[3].reason


def test_only_bad_lines_is_fatal():
    with pytest.raises(NoValidEvents) as info:
        parse_events(["nope", line(ain="x")])
    assert len(info.value.errors) == 2


def test_events_sorted():
    lines = [line("0xb", 2, 0), line("0xa", 2, 1), line("0xa", 2, 0), line("0xz", 1, 9)]
    events, _ = parse_events(lines)
    assert [(e.block, e.tx_id, e.log_index) for e in events] == [(1, "0xz", 9), (2, "0xa", 0), (2, "0xa", 1), (2, "0xb", 0)]


def _non_blank(blob: bytes) -> bool:
    try:
        return bool(blob.decode("utf-8").strip())
    except UnicodeDecodeError:
        return True


@given(st.lists(st.binary(max_size=200), max_size=20))
def test_parse_is_total_on_bytes(blobs):
    try:
        events, errors = parse_events(blobs)
    except NoValidEvents as exc:
        events, errors = [], exc.errors
    assert len(events) + len(errors) == sum(map(_non_blank, blobs))


# -- grouping ---------------------------------------------------------------


def test_fig_ring():
    (ring,) = group_cyclic_transactions(fig_ring())
    assert ring.tokens == ["USDC", "USDT", "SEAL", "KP3R", "USDC"]
    assert (ring.input, ring.output, ring.revenue) == (Fraction("285.71"), Fraction("303.68"), Fraction("17.97"))


def test_open_path_is_not_cyclic():
    events, _ = parse_events(legs(("A", "B", "1", "2"), ("B", "C", "2", "3")))
    cyclic, rejected = classify_transactions(events)
    assert cyclic == [] and rejected == ["0x1"]


def test_broken_amount_chain_is_rejected():
    events, _ = parse_events(legs(("A", "B", "1", "2"), ("B", "C", "2.0001", "3"), ("C", "A", "3", "4")))
    assert group_cyclic_transactions(events) == []
    assert len(group_cyclic_transactions(events, slack=Fraction(1, 1000))) == 1


def test_two_rings_in_one_transaction():
    events, _ = parse_events(
        legs(("A", "B", "1", "2"), ("B", "A", "2", "3"), ("C", "D", "5", "6"), ("D", "E", "6", "7"), ("E", "C", "7", "8"))
    )
    rings = group_cyclic_transactions(events)
    assert [len(r.legs) for r in rings] == [2, 3]
    assert [r.revenue for r in rings] == [2, 3]


@given(
    link=st.integers(1, 2),
    side=st.sampled_from(["in", "out"]),
    bump=st.fractions(min_value=Fraction(-1, 2), max_value=Fraction(1, 2), max_denominator=10**9).filter(bool),
)
def test_any_perturbation_breaks_the_chain(link, side, bump):
    amounts = [Fraction(10), Fraction(20), Fraction(30), Fraction(11)]
    tokens = ["A", "B", "C", "A"]
    events = [SwapEvent("0x1", 1, i, tokens[i], tokens[i + 1], amounts[i], amounts[i + 1]) for i in range(3)]
    assert len(group_cyclic_transactions(events)) == 1
    if side == "in":
        events[link] = replace(events[link], amount_in=events[link].amount_in + bump)
    else:
        events[link - 1] = replace(events[link - 1], amount_out=events[link - 1].amount_out + bump)
    assert group_cyclic_transactions(events) == []


# -- summary ----------------------------------------------------------------


def test_summary_empty():
    s = revenue_summary([], "USDC")
    assert (s.count, s.total_revenue, s.mean_revenue, s.length_histogram) == (0, 0, 0, {})


def test_summary_fig_ring():
    s = revenue_summary(group_cyclic_transactions(fig_ring()), "USDC")
    assert (s.count, s.total_revenue, s.length_histogram) == (1, Fraction("17.97"), {4: 1})
    assert s.to_dict()["total_revenue"] == "17.97"


def test_summary_histogram_and_filter():
    with open(FIXTURES / "mixed_events.jsonl", "rb") as fh:
        events, errors = parse_events(fh)
    assert len(errors) == 2
    cyclic, rejected = classify_transactions(events)
    assert rejected == ["0xc3"]
    s = revenue_summary(cyclic, "USDC")
    assert s.length_histogram == {3: 1, 4: 1}
    assert s.total_revenue == Fraction("2.9")
    assert revenue_summary(cyclic, "DAI").count == 0


def test_round_trip_from_execution(i65_market):
    delta, _ = optimal_input(FORWARD, i65_market)
    result = execute_ring(i65_market, FORWARD, delta)
    events = events_from_fills("0xsim", 7, result.fills)
    (ring,) = group_cyclic_transactions(events)
    assert ring.revenue == result.profit
    assert [e.log_index for e in events] == [0, 1, 2]


def test_jsonl_round_trip_of_decimal_amounts():
    events = fig_ring()
    again, errors = parse_events([e.to_json() for e in events])
    assert errors == [] and again == events


@given(seed=st.integers(0, 10**6))
def test_round_trip_random_markets(seed):
    market = random_market(4, 6, seed=seed, noise=0.3)
    found = find_cycles(market, max_hops=3)
    if not found:
        return
    result = execute_ring(market, found[0].cycle, found[0].optimal_input)
    (ring,) = group_cyclic_transactions(events_from_fills("0xsim", 1, result.fills))
    assert ring.revenue == result.profit
