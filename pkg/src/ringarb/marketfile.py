"""JSON market definitions.

Schema::

    {"pools": [{"id": "...", "token0": "A", "token1": "B",
                "reserve0": "100.5", "reserve1": "200",
                "fee_in_ppm": 997000, "fee_out_ppm": 1000000,
                "lp_supply": "141.7"}]}

Amounts are decimal strings (parsed exactly); fees are integer parts per
million of the *retained* fraction, so 997000 means r1 = 0.997.
An optional top-level ``"unique_pairs": false`` allows several pools per pair.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from ringarb.amm import PPM, FeeParams, Market, Pool
from ringarb.errors import InvalidFee, MarketFileError, RingArbError
from ringarb.numeric import format_decimal, parse_decimal

_POOL_KEYS = ("id", "token0", "token1", "reserve0", "reserve1", "fee_in_ppm")


def _amount(obj: dict, key: str, where: str) -> Fraction:
    value = obj.get(key, "0")
    if isinstance(value, int) and not isinstance(value, bool):
        value = str(value)
    try:
        return parse_decimal(value)
    except ValueError as exc:
        raise MarketFileError(f"{where}: bad {key}: {exc}") from None


def pool_from_dict(obj: dict, where: str = "pool") -> Pool:
    if not isinstance(obj, dict):
        raise MarketFileError(f"{where}: expected an object")
    missing = [k for k in _POOL_KEYS if k not in obj]
    if missing:
        raise MarketFileError(f"{where}: missing {', '.join(missing)}")
    for key in ("id", "token0", "token1"):
        if not isinstance(obj[key], str) or not obj[key]:
            raise MarketFileError(f"{where}: {key} must be a non-empty string")
    try:
        fees = FeeParams.from_ppm(obj["fee_in_ppm"], obj.get("fee_out_ppm", PPM))
    except InvalidFee as exc:
        raise MarketFileError(f"{where}: {exc}") from None
    try:
        return Pool(
            id=obj["id"],
            token0=obj["token0"],
            token1=obj["token1"],
            reserve0=_amount(obj, "reserve0", where),
            reserve1=_amount(obj, "reserve1", where),
            fees=fees,
            lp_supply=_amount(obj, "lp_supply", where),
        )
    except RingArbError as exc:
        if isinstance(exc, MarketFileError):
            raise
        raise MarketFileError(f"{where}: {exc}") from None


def pool_to_dict(pool: Pool) -> dict:
    fee_in, fee_out = pool.fees.to_ppm()
    return {
        "id": pool.id,
        "token0": pool.token0,
        "token1": pool.token1,
        "reserve0": format_decimal(pool.reserve0, 36),
        "reserve1": format_decimal(pool.reserve1, 36),
        "fee_in_ppm": fee_in,
        "fee_out_ppm": fee_out,
        "lp_supply": format_decimal(pool.lp_supply, 36),
    }


def market_from_dict(doc: dict) -> Market:
    if not isinstance(doc, dict) or not isinstance(doc.get("pools"), list):
        raise MarketFileError('market file must be an object with a "pools" array')
    pools = [pool_from_dict(p, f"pools[{i}]") for i, p in enumerate(doc["pools"])]
    try:
        return Market.from_pools(pools, unique_pairs=doc.get("unique_pairs", True))
    except (RingArbError, ValueError) as exc:
        raise MarketFileError(str(exc)) from None


def market_to_dict(market: Market) -> dict:
    doc: dict = {"pools": [pool_to_dict(market.pools[i]) for i in sorted(market.pools)]}
    if not market.unique_pairs:
        doc["unique_pairs"] = False
    return doc


def load_market(path: str | Path) -> Market:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MarketFileError(f"{path}: invalid JSON: {exc}") from None
    return market_from_dict(doc)


def dump_market(market: Market, path: str | Path) -> None:
    Path(path).write_text(json.dumps(market_to_dict(market), indent=2) + "\n", encoding="utf-8")
