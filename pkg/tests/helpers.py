"""Shared test utilities: record builders, a driver around the engine, and
the independent brute-force price-time matching oracle."""

from __future__ import annotations

from dataclasses import dataclass

from deskex import wire
from deskex.engine import MatchingEngine


def rec(seq, rtype, *payload) -> str:
    return wire.encode((seq, rtype) + payload)


def rec_order(seq, oid, instr, side, price, qty, ts=0, owner="u", origin="client"):
    return rec(seq, "order", oid, instr, side, price, qty, ts, owner, origin)


def rec_cancel(seq, target, owner="u"):
    return rec(seq, "cancel", target, owner)


def rec_combo(seq, cid, legs, limit, qty, aon=False, ts=0, owner="u", origin="client"):
    return rec(seq, "combo", cid, wire.encode_legs(legs), limit, qty,
               1 if aon else 0, ts, owner, origin)


def rec_spider(seq, sid, members, owner="u"):
    return rec(seq, "spider", sid, ",".join(members), owner)


def rec_meta(seq, instruments):
    return rec(seq, "meta", ",".join(instruments))


class Core:
    """Feeds records straight into a MatchingEngine with auto sequencing."""

    def __init__(self, instruments=("A", "B")):
        self.engine = MatchingEngine()
        self.seq = 0
        self.log: list[str] = []
        self.out: list[str] = []
        self.send_line(rec_meta(1, instruments))

    def send_line(self, line: str) -> list[str]:
        self.seq += 1
        self.log.append(line)
        produced = self.engine.process(wire.decode(line))
        self.out.extend(produced)
        return produced

    def order(self, oid, instr, side, price, qty, ts=0, origin="client"):
        return self.send_line(rec_order(self.seq + 1, oid, instr, side, price, qty,
                                        ts=ts, origin=origin))

    def cancel(self, target):
        return self.send_line(rec_cancel(self.seq + 1, target))

    def combo(self, cid, legs, limit, qty, aon=False):
        return self.send_line(rec_combo(self.seq + 1, cid, legs, limit, qty, aon=aon))

    def spider(self, sid, members):
        return self.send_line(rec_spider(self.seq + 1, sid, members))


def out_types(lines):
    return [wire.split(line)[1] for line in lines]


def trades_of(lines):
    """(instrument, price, qty, buy_id, sell_id) per trade record."""
    out = []
    for line in lines:
        f = wire.split(line)
        if f[1] == "trade":
            out.append((f[4], int(f[5]), int(f[6]), f[7], f[8]))
    return out


def rejects_of(lines):
    return [(wire.split(l)[3], wire.split(l)[4]) for l in lines if wire.split(l)[1] == "reject"]


# ------------------------------------------------------------------ oracle

@dataclass
class OrderSpec:
    order_id: str
    side: str
    price: int
    qty: int
    arrival_ts: int
    seq_no: int


def oracle_match(resting: list[OrderSpec], incoming: OrderSpec):
    """Brute-force price-time-priority matcher over a small book.

    Scans the full contra list every fill to pick the best (price, arrival_ts,
    seq_no) order; completely independent of the engine's book structures.
    Returns ([(price, qty, resting_id), ...], remaining).
    """
    rows = [[o.order_id, o.side, o.price, o.qty, o.arrival_ts, o.seq_no]
            for o in resting if o.side != incoming.side]
    fills = []
    remaining = incoming.qty
    while remaining > 0:
        best = None
        for row in rows:
            if row[3] <= 0:
                continue
            if incoming.side == "buy" and row[2] > incoming.price:
                continue
            if incoming.side == "sell" and row[2] < incoming.price:
                continue
            if best is None:
                best = row
                continue
            if incoming.side == "buy":
                key_new = (row[2], row[4], row[5])
                key_old = (best[2], best[4], best[5])
            else:
                key_new = (-row[2], row[4], row[5])
                key_old = (-best[2], best[4], best[5])
            if key_new < key_old:
                best = row
        if best is None:
            break
        take = min(remaining, best[3])
        fills.append((best[2], take, best[0]))
        best[3] -= take
        remaining -= take
    return fills, remaining
