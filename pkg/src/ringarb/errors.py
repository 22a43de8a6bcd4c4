"""Exception hierarchy shared by every ringarb module."""

from __future__ import annotations


class RingArbError(Exception):
    """Base class for all errors raised by ringarb."""


# -- pools and markets ------------------------------------------------------


class IdenticalTokens(RingArbError, ValueError):
    pass


class DuplicatePair(RingArbError, ValueError):
    pass


class UnknownToken(RingArbError, KeyError):
    pass


class UnknownPool(RingArbError, KeyError):
    pass


class EmptyPool(RingArbError, ValueError):
    pass


class InvalidAmount(RingArbError, ValueError):
    pass


class ZeroDeposit(InvalidAmount):
    pass


class InsufficientLpBalance(RingArbError, ValueError):
    pass


class InvalidFee(RingArbError, ValueError):
    pass


# -- paths and cycles -------------------------------------------------------


class TokenMismatch(RingArbError, ValueError):
    pass


class FeeMismatch(RingArbError, ValueError):
    pass


class InvalidCycle(RingArbError, ValueError):
    pass


class NotProfitable(RingArbError):
    pass


class Reverted(RingArbError):
    """An atomic ring did not clear its profit floor; no state was changed."""

    def __init__(self, realized_profit, min_profit) -> None:
        super().__init__(
            f"ring reverted: realized profit {realized_profit} < minimum {min_profit}"
        )
        self.realized_profit = realized_profit
        self.min_profit = min_profit


class NoArbitrageDirection(RingArbError, ValueError):
    pass


class InvalidRatio(RingArbError, ValueError):
    pass


# -- files ------------------------------------------------------------------


class MarketFileError(RingArbError, ValueError):
    pass


class ParseError(RingArbError, ValueError):
    """A single malformed line in an event log."""

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class NoValidEvents(RingArbError, ValueError):
    """Raised when an event stream had content but not one parseable line."""

    def __init__(self, errors: list[ParseError]) -> None:
        super().__init__(f"no valid events ({len(errors)} malformed lines)")
        self.errors = errors
