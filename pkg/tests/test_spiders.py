"""Linked order sets: exclusive-or semantics via the spider object."""

import random

from deskex import wire

from helpers import Core, out_types, rejects_of, trades_of


def test_first_fill_cancels_siblings_same_step():
    core = Core(("A", "B"))
    core.order("o1", "A", "buy", 100, 5)
    core.order("o2", "B", "buy", 200, 5)
    core.spider("sp1", ["o1", "o2"])
    out = core.order("s1", "A", "sell", 100, 2)  # o1 partially fills
    kinds = out_types(out)
    assert "trade" in kinds and "xcancel" in kinds
    x = [wire.split(l) for l in out if wire.split(l)[1] == "xcancel"]
    assert [(f[3], f[4]) for f in x] == [("sp1", "o2")]
    assert "o2" not in core.engine.orders
    assert core.engine.orders["o1"].remaining == 3  # winner stays


def test_spider_idempotent_when_sibling_terminal():
    core = Core(("A", "B"))
    core.order("o1", "A", "buy", 100, 5)
    core.order("o2", "B", "buy", 200, 5)
    core.spider("sp1", ["o1", "o2"])
    core.cancel("o2")  # user cancels a member first
    out = core.order("s1", "A", "sell", 100, 5)
    assert "xcancel" not in out_types(out)  # nothing left to cancel
    assert trades_of(out) == [("A", 100, 5, "o1", "s1")]


def test_spider_rejections():
    core = Core(("A", "B"))
    core.order("o1", "A", "buy", 100, 5)
    out = core.spider("sp1", ["o1"])
    assert rejects_of(out) == [("sp1", "bad_members")]
    out = core.spider("sp2", ["o1", "nope"])
    assert rejects_of(out) == [("sp2", "member_not_live")]
    core.order("o2", "B", "buy", 100, 5)
    core.order("o3", "B", "buy", 100, 5)
    core.spider("sp3", ["o1", "o2"])
    out = core.spider("sp4", ["o2", "o3"])
    assert rejects_of(out) == [("sp4", "member_in_spider")]


def test_both_members_on_one_level_only_one_fills():
    core = Core(("A",))
    core.order("o1", "A", "buy", 100, 3)
    core.order("o2", "A", "buy", 100, 3)
    core.spider("sp1", ["o1", "o2"])
    out = core.order("s1", "A", "sell", 100, 6)  # big enough to hit both
    fills = trades_of(out)
    assert fills == [("A", 100, 3, "o1", "s1")]
    assert "o2" not in core.engine.orders  # canceled before it could trade
    # aggressor residual rests
    assert core.engine.orders["s1"].remaining == 3


def test_random_streams_xor_holds():
    rng = random.Random(23)
    for trial in range(30):
        core = Core(("A", "B"))
        members_by_spider = {}
        next_spider = 0
        for i in range(250):
            roll = rng.random()
            if roll < 0.7:
                instr = rng.choice(("A", "B"))
                side = rng.choice(("buy", "sell"))
                core.order(f"o{i}", instr, side, rng.randint(97, 103),
                           rng.randint(1, 6), ts=i)
            elif roll < 0.85:
                live = [oid for oid, o in core.engine.orders.items()
                        if o.origin == "client" and oid not in core.engine.order_spider
                        and core.engine.filled.get(oid, 0) == 0]
                if len(live) >= 2:
                    k = rng.randint(2, min(4, len(live)))
                    members = rng.sample(live, k)
                    sid = f"sp{next_spider}"
                    next_spider += 1
                    out = core.spider(sid, members)
                    if any(wire.split(l)[1] == "accept" for l in out):
                        members_by_spider[sid] = members
            else:
                core.cancel(f"o{rng.randint(0, i)}")
        filled = core.engine.filled
        for sid, members in members_by_spider.items():
            with_fills = [m for m in members if filled.get(m, 0) > 0]
            assert len(with_fills) <= 1, (trial, sid, with_fills)
