"""Per-instrument limit order book with price-time priority.

Each side keeps a sorted list of price ticks plus a FIFO list of resting
orders per tick. Orders arrive in gateway seq order, so FIFO insertion equals
(price, arrival_ts, seq_no) priority. Everything is integer; there is no
float anywhere in book state.

Sides maintain an aggregate quantity per price level and a mutation version
counter so the implied-order refresh can detect top changes in O(1).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field


@dataclass
class Resting:
    """A resting order. `remaining` is mutated via BookSide.fill()."""

    order_id: str
    instrument: str
    side: str  # "buy" | "sell"
    price: int
    qty: int
    remaining: int
    arrival_ts: int
    seq_no: int
    owner: str = "-"
    origin: str = "client"  # client | ats | virtual
    combo_ref: tuple[str, int] | None = None  # (combo_id, leg index) when virtual

    @property
    def is_virtual(self) -> bool:
        return self.origin == "virtual"


class BookSide:
    __slots__ = ("is_bid", "prices", "levels", "level_qty", "version")

    def __init__(self, is_bid: bool):
        self.is_bid = is_bid
        self.prices: list[int] = []  # ascending
        self.levels: dict[int, list[Resting]] = {}
        self.level_qty: dict[int, int] = {}
        self.version = 0  # bumped on any mutation

    def best_price(self) -> int | None:
        if not self.prices:
            return None
        return self.prices[-1] if self.is_bid else self.prices[0]

    def best_level(self) -> list[Resting]:
        return self.levels[self.best_price()]

    def qty_at(self, price: int) -> int:
        return self.level_qty.get(price, 0)

    def insert(self, order: Resting) -> None:
        level = self.levels.get(order.price)
        if level is None:
            bisect.insort(self.prices, order.price)
            self.levels[order.price] = [order]
            self.level_qty[order.price] = order.remaining
        else:
            level.append(order)
            self.level_qty[order.price] += order.remaining
        self.version += 1

    def remove(self, order: Resting) -> None:
        level = self.levels.get(order.price)
        if level is None:
            return
        try:
            level.remove(order)
        except ValueError:
            return
        self.version += 1
        if not level:
            del self.levels[order.price]
            del self.level_qty[order.price]
            idx = bisect.bisect_left(self.prices, order.price)
            if idx < len(self.prices) and self.prices[idx] == order.price:
                self.prices.pop(idx)
        else:
            self.level_qty[order.price] -= order.remaining

    def fill(self, order: Resting, qty: int) -> None:
        """Reduce a resting order in place, maintaining level aggregates."""
        order.remaining -= qty
        self.level_qty[order.price] -= qty
        self.version += 1

    def iter_prices_from_best(self):
        if self.is_bid:
            return reversed(self.prices)
        return iter(self.prices)

    def depth(self) -> int:
        return sum(self.level_qty.values())


@dataclass
class OrderBook:
    instrument: str
    bids: BookSide = field(default_factory=lambda: BookSide(True))
    asks: BookSide = field(default_factory=lambda: BookSide(False))

    def side(self, name: str) -> BookSide:
        return self.bids if name == "buy" else self.asks

    def contra(self, name: str) -> BookSide:
        return self.asks if name == "buy" else self.bids

    def top_signature(self) -> tuple:
        """(bid_px, bid_qty, ask_px, ask_qty) — None price when side empty."""
        bp = self.bids.best_price()
        ap = self.asks.best_price()
        return (
            bp,
            self.bids.qty_at(bp) if bp is not None else 0,
            ap,
            self.asks.qty_at(ap) if ap is not None else 0,
        )
