"""Deterministic continuous matching core.

One totally ordered input stream in, one output stream out; the output is a
pure function of the input records, so replaying a transaction log through a
fresh engine reproduces the original output byte for byte. To keep that
contract the engine holds no clock, no RNG and no float state: prices are
integer ticks, quantities integer units, and every emitted id derives from the
causing input seq_no.

Supported contingency machinery:

* combination orders — all legs execute atomically within one logical step,
  greedily from the book tops, while the marginal net cost per combo unit
  stays within the order's net limit;
* virtual (implied) orders — a resting combination posts one derived order per
  leg at the most aggressive price consistent with the other legs' current
  contra tops, re-derived whenever a referenced top changes;
* linked order sets ("spiders") — exclusive-or groups where the first fill
  cancels every sibling in the same logical step.

A small set of halt invariants (crossed book, negative remaining, the poison
test record) raises HaltError: the technical stop preferred over letting a
faulty state compound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import wire
from .book import BookSide, OrderBook, Resting
from .errors import BadRecord, HaltError, ReplayError

_REFRESH_GUARD = 64  # max implied re-derivation passes per event


@dataclass
class Combo:
    combo_id: str
    legs: list[tuple[str, str, int]]  # (instrument, side, ratio)
    net_limit: int
    total_units: int
    remaining_units: int
    aon: bool
    arrival_ts: int
    seq_no: int
    owner: str = "-"
    origin: str = "client"
    virtuals: dict[int, Resting] = field(default_factory=dict)  # leg idx -> live virtual
    derived_sig: tuple | None = None  # contra tops at last derivation
    watch_versions: list | None = None  # contra side versions at last derivation
    contras: list[BookSide] = field(default_factory=list)  # cached per-leg contra sides
    rev: int = 0


@dataclass
class Spider:
    spider_id: str
    members: list[str]
    owner: str = "-"
    triggered: bool = False


class MatchingEngine:
    """Single-threaded deterministic matching service."""

    def __init__(self):
        self.instruments: dict[str, OrderBook] = {}
        self.orders: dict[str, Resting] = {}  # live resting orders incl. virtuals
        self.combos: dict[str, Combo] = {}  # resting combinations
        self.spiders: dict[str, Spider] = {}
        self.order_spider: dict[str, str] = {}
        self.used_ids: set[str] = set()
        self.filled: dict[str, int] = {}  # cumulative filled units per order id
        self.last_seq = 0
        self.out_seq = 0
        self.halted: tuple[int, str] | None = None
        # per-event scratch
        self._cause = 0
        self._out: list[str] = []
        self._trade_n = 0
        self._touched: dict[str, tuple] = {}  # instrument -> pre-event top signature

    # ------------------------------------------------------------------ I/O

    def _emit(self, rtype: str, *payload) -> None:
        self.out_seq += 1
        self._out.append(wire.encode((self.out_seq, rtype, self._cause) + payload))

    def _reject(self, ref: str, reason: str) -> None:
        self._emit("reject", ref, reason)

    def _touch(self, instrument: str) -> None:
        if instrument not in self._touched:
            self._touched[instrument] = self.instruments[instrument].top_signature()

    # ------------------------------------------------------------- dispatch

    def process(self, fields: tuple[str, ...]) -> list[str]:
        """Process one sequenced input record; returns the output lines."""
        if self.halted:
            raise HaltError(self.halted[0], "engine halted")
        seq = int(fields[0])
        rtype = fields[1]
        self._cause = seq
        self._out = []
        self._trade_n = 0
        self._touched = {}
        try:
            try:
                if rtype == "order":
                    self._on_order(fields)
                elif rtype == "cancel":
                    self._on_cancel(fields)
                elif rtype == "combo":
                    self._on_combo(fields)
                elif rtype == "spider":
                    self._on_spider(fields)
                elif rtype == "meta":
                    self._on_meta(fields)
                elif rtype == "poison":
                    raise HaltError(seq, "poison")
                else:
                    self._reject(rtype, "unknown_type")
            except (ValueError, IndexError):
                self._reject(rtype, "malformed")
            if self.combos:
                self._refresh_combos()
            self._emit_quotes()
            self._check_halt_invariants(seq)
        except HaltError as exc:
            self.halted = (exc.seq, exc.reason)
            self._emit("halted", exc.reason)
            raise
        finally:
            self.last_seq = seq
        return self._out

    def take_output(self) -> list[str]:
        """Output lines of the last processed event (also returned by process)."""
        return self._out

    # ------------------------------------------------------------ handlers

    def _on_meta(self, fields) -> None:
        for name in fields[2].split(","):
            if name and name not in self.instruments:
                self.instruments[name] = OrderBook(name)
        self._emit("accept", "meta")

    def _on_order(self, fields) -> None:
        _, _, order_id, instrument, side, price, qty, arrival_ts, owner, origin = fields
        price, qty, arrival_ts = int(price), int(qty), int(arrival_ts)
        if order_id in self.used_ids:
            self._reject(order_id, "duplicate_id")
            return
        if instrument not in self.instruments:
            self._reject(order_id, "unknown_instrument")
            return
        if side not in ("buy", "sell") or qty <= 0 or price <= 0:
            self._reject(order_id, "invalid")
            return
        self.used_ids.add(order_id)
        self._emit("accept", order_id)
        incoming = Resting(order_id, instrument, side, price, qty, qty,
                           arrival_ts, int(fields[0]), owner, origin)
        self._touch(instrument)
        self._match(incoming)
        if incoming.remaining > 0:
            book = self.instruments[instrument]
            book.side(side).insert(incoming)
            self.orders[order_id] = incoming
            self._emit("rest", order_id, instrument, side, price, incoming.remaining)

    def _on_cancel(self, fields) -> None:
        target = fields[2]
        live = self.orders.get(target)
        if live is not None:
            if live.is_virtual:
                self._reject(target, "virtual_order")
                return
            self._touch(live.instrument)
            self._remove_order(live)
            self._emit("cancel_ack", target, live.remaining)
            live.remaining = 0
            return
        combo = self.combos.get(target)
        if combo is not None:
            self._pull_virtuals(combo)
            self._emit("cancel_ack", target, combo.remaining_units)
            del self.combos[target]
            return
        if target in self.used_ids:
            self._reject(target, "terminal")
        else:
            self._reject(target, "unknown")

    def _on_combo(self, fields) -> None:
        _, _, combo_id, legs_text, net_limit, qty, aon, arrival_ts, owner, origin = fields
        if combo_id in self.used_ids:
            self._reject(combo_id, "duplicate_id")
            return
        legs = wire.decode_legs(legs_text)
        instruments = [i for i, _, _ in legs]
        if len(legs) < 2 or len(set(instruments)) != len(legs):
            self._reject(combo_id, "bad_legs")
            return
        if any(i not in self.instruments for i in instruments):
            self._reject(combo_id, "unknown_instrument")
            return
        if any(r < 1 for _, _, r in legs) or int(qty) <= 0:
            self._reject(combo_id, "invalid")
            return
        self.used_ids.add(combo_id)
        self._emit("accept", combo_id)
        combo = Combo(combo_id, legs, int(net_limit), int(qty), int(qty),
                      aon == "1", int(arrival_ts), int(fields[0]), owner, origin)
        combo.contras = [self.instruments[i].contra(s) for i, s, _ in legs]
        for instrument in instruments:
            self._touch(instrument)
        self._execute_combo(combo)
        if combo.remaining_units > 0:
            self.combos[combo_id] = combo
            self._emit("combo_rest", combo_id, combo.remaining_units)
            # virtual orders are derived in the refresh pass of this same event

    def _on_spider(self, fields) -> None:
        _, _, spider_id, members_text, owner = fields
        if spider_id in self.used_ids:
            self._reject(spider_id, "duplicate_id")
            return
        members = members_text.split(",")
        if len(members) < 2 or len(set(members)) != len(members):
            self._reject(spider_id, "bad_members")
            return
        for m in members:
            live = self.orders.get(m)
            if live is None or live.is_virtual:
                self._reject(spider_id, "member_not_live")
                return
            if m in self.order_spider:
                self._reject(spider_id, "member_in_spider")
                return
            if self.filled.get(m, 0) > 0:
                self._reject(spider_id, "member_filled")
                return
        self.used_ids.add(spider_id)
        self.spiders[spider_id] = Spider(spider_id, members, owner)
        for m in members:
            self.order_spider[m] = spider_id
        self._emit("accept", spider_id)

    # ------------------------------------------------------------- matching

    def _match(self, incoming: Resting) -> None:
        """Continuous price-time matching of one incoming (non-virtual) order."""
        book = self.instruments[incoming.instrument]
        contra = book.contra(incoming.side)
        while incoming.remaining > 0:
            best = contra.best_price()
            if best is None:
                return
            if incoming.side == "buy":
                if best > incoming.price:
                    return
            elif best < incoming.price:
                return
            entry = contra.levels[best][0]
            if entry.is_virtual:
                executed = self._execute_via_virtual(incoming, entry)
                if executed == 0:
                    # the implication is stale (sibling depth or net limit no
                    # longer supports it) or trades only in ratio multiples
                    # bigger than the aggressor: pull it so the book cannot
                    # rest crossed; the refresh pass re-derives it afterwards
                    combo = self.combos[entry.combo_ref[0]]
                    self._touch(entry.instrument)
                    self._remove_order(entry)
                    self._emit("virt_pull", entry.order_id, combo.combo_id)
                    del combo.virtuals[entry.combo_ref[1]]
                    combo.derived_sig = None
            else:
                take = min(incoming.remaining, entry.remaining)
                self._fill(entry, take, incoming)
                incoming.remaining -= take

    def _fill(self, resting: Resting, qty: int, aggressor: Resting | None,
              aggressor_id: str | None = None, defer: list[str] | None = None) -> None:
        """Fill a resting order; emits the trade and runs the spider rule."""
        if qty <= 0 or qty > resting.remaining:
            raise HaltError(self._cause, "fill_out_of_range")
        self._trade_n += 1
        trade_id = f"t{self._cause}.{self._trade_n}"
        agg_id = aggressor_id if aggressor_id is not None else aggressor.order_id
        if resting.side == "sell":
            buy_id, sell_id = agg_id, resting.order_id
        else:
            buy_id, sell_id = resting.order_id, agg_id
        self._touch(resting.instrument)
        self._emit("trade", trade_id, resting.instrument, resting.price, qty, buy_id, sell_id)
        side = self.instruments[resting.instrument].side(resting.side)
        side.fill(resting, qty)
        self.filled[resting.order_id] = self.filled.get(resting.order_id, 0) + qty
        self.filled[agg_id] = self.filled.get(agg_id, 0) + qty
        if resting.remaining == 0:
            self._remove_order(resting)
        spider_id = self.order_spider.get(resting.order_id)
        if spider_id is not None:
            if defer is None:
                self._trigger_spider(spider_id)
            elif spider_id not in defer:
                defer.append(spider_id)

    def _remove_order(self, order: Resting) -> None:
        self.instruments[order.instrument].side(order.side).remove(order)
        self.orders.pop(order.order_id, None)

    def _trigger_spider(self, spider_id: str) -> None:
        spider = self.spiders[spider_id]
        if spider.triggered:
            return
        spider.triggered = True
        for member in spider.members:
            live = self.orders.get(member)
            if live is None or self.filled.get(member, 0) > 0:
                continue  # the winner, or already terminal
            self._touch(live.instrument)
            self._remove_order(live)
            self._emit("xcancel", spider_id, member, live.remaining)
            live.remaining = 0

    # ---------------------------------------------------------- combinations

    @staticmethod
    def _sign(side: str) -> int:
        return 1 if side == "buy" else -1

    def _plan_units(self, combo: Combo, want: int,
                    override_leg: int | None = None, override_price: int | None = None):
        """Plan up to `want` combo units against current books without mutating.

        Walks each leg's contra side from the top, skipping virtual orders
        (implied-on-implied is out of scope) and never taking from two members
        of one spider. Stops at the first unit whose marginal net cost exceeds
        net_limit or that cannot source a full ratio on every leg.

        Returns (units, takes, total_cost) where takes is an ordered dict
        keyed (leg_idx, order_id) -> [resting, take_qty].
        """
        consumed: dict[str, int] = {}
        planned_spiders: set[str] = set()
        takes: dict[tuple[int, str], list] = {}
        total_cost = 0
        units = 0
        for _ in range(want):
            unit_cost = 0
            unit_takes: list[tuple[int, Resting, int]] = []
            feasible = True
            for leg_idx, (instrument, side, ratio) in enumerate(combo.legs):
                if leg_idx == override_leg:
                    unit_cost += self._sign(side) * override_price * ratio
                    continue
                need = ratio
                contra = self.instruments[instrument].contra(side)
                for price in contra.iter_prices_from_best():
                    for resting in contra.levels[price]:
                        if resting.is_virtual:
                            continue
                        sid = self.order_spider.get(resting.order_id)
                        if sid is not None and sid in planned_spiders \
                                and resting.order_id not in consumed:
                            # a sibling of this spider is already in the plan;
                            # taking a second member would break the XOR rule
                            continue
                        avail = resting.remaining - consumed.get(resting.order_id, 0)
                        if avail <= 0:
                            continue
                        take = min(avail, need)
                        unit_takes.append((leg_idx, resting, take))
                        unit_cost += self._sign(side) * resting.price * take
                        need -= take
                        if need == 0:
                            break
                    if need == 0:
                        break
                if need > 0:
                    feasible = False
                    break
            if not feasible or unit_cost > combo.net_limit:
                break
            for leg_idx, resting, take in unit_takes:
                consumed[resting.order_id] = consumed.get(resting.order_id, 0) + take
                key = (leg_idx, resting.order_id)
                if key in takes:
                    takes[key][1] += take
                else:
                    takes[key] = [resting, take]
                sid = self.order_spider.get(resting.order_id)
                if sid is not None:
                    planned_spiders.add(sid)
            total_cost += unit_cost
            units += 1
        return units, takes, total_cost

    def _commit_plan(self, combo: Combo, units: int, takes, total_cost: int) -> None:
        defer: list[str] = []
        for (leg_idx, _oid), (resting, take) in takes.items():
            self._fill(resting, take, None, f"{combo.combo_id}.L{leg_idx}", defer)
        combo.remaining_units -= units
        self._emit("combo_exec", combo.combo_id, units, total_cost)
        for spider_id in defer:
            self._trigger_spider(spider_id)

    def _top_cost(self, combo: Combo) -> int | None:
        """Net cost of one combo unit priced purely at the contra tops; a lower
        bound on the first plannable unit's cost (walking deeper only worsens
        it), so `top_cost > net_limit` soundly rules execution out."""
        cost = 0
        for (_, side, ratio), contra in zip(combo.legs, combo.contras):
            top = contra.best_price()
            if top is None:
                return None
            cost += ratio * top if side == "buy" else -ratio * top
        return cost

    def _execute_combo(self, combo: Combo) -> None:
        """Greedy atomic execution from book tops, honoring all_or_none."""
        cost = self._top_cost(combo)
        if cost is None or cost > combo.net_limit:
            return
        want = combo.remaining_units
        units, takes, cost = self._plan_units(combo, want)
        if units == 0:
            return
        if combo.aon and units < combo.remaining_units:
            return
        self._commit_plan(combo, units, takes, cost)

    def _execute_via_virtual(self, incoming: Resting, virt: Resting) -> int:
        """An incoming order hit a resting virtual order: execute the combo
        atomically, the virtual's leg trading against the aggressor at the
        virtual price and every sibling leg against its own book top."""
        combo_id, leg_idx = virt.combo_ref
        combo = self.combos[combo_id]
        ratio = combo.legs[leg_idx][2]
        cap = min(incoming.remaining // ratio, combo.remaining_units,
                  virt.remaining // ratio)
        if combo.aon:
            if cap < combo.remaining_units:
                return 0
            cap = combo.remaining_units
        if cap == 0:
            return 0
        units, takes, cost = self._plan_units(combo, cap, override_leg=leg_idx,
                                              override_price=virt.price)
        if units == 0 or (combo.aon and units < combo.remaining_units):
            return 0
        # leg `leg_idx`: aggressor trades with the virtual order itself
        take = units * ratio
        self._fill(virt, take, incoming)
        incoming.remaining -= take
        self._commit_plan(combo, units, takes, cost)
        if combo.remaining_units == 0:
            self._pull_virtuals(combo)
            del self.combos[combo_id]
        else:
            combo.derived_sig = None  # force re-derivation this event
        return units

    # ------------------------------------------------------- implied orders

    def _contra_sig(self, combo: Combo) -> tuple:
        sig = []
        for contra in combo.contras:
            price = contra.best_price()
            sig.append((price, contra.level_qty.get(price, 0) if price is not None else 0))
        return tuple(sig)

    def _derive_virtuals(self, combo: Combo) -> None:
        """Re-post one implied order per leg at the most aggressive price that
        keeps the net cost within limit against the other legs' contra tops."""
        wanted: dict[int, tuple[int, int]] = {}  # leg -> (price, qty)
        for leg_idx, (instrument, side, ratio) in enumerate(combo.legs):
            others = 0
            defined = True
            for j, (_, side_j, ratio_j) in enumerate(combo.legs):
                if j == leg_idx:
                    continue
                top = combo.contras[j].best_price()
                if top is None:
                    defined = False
                    break
                others += ratio_j * top if side_j == "buy" else -ratio_j * top
            if not defined:
                continue
            if side == "buy":
                # +price*ratio + others <= limit; floor = most aggressive bid
                price = (combo.net_limit - others) // ratio
            else:
                # -price*ratio + others <= limit; ceil = most aggressive offer
                price = max(-(-(others - combo.net_limit) // ratio), 1)
            if price < 1:
                continue
            # never let an implied order cross its own contra top: greedy
            # execution already took everything executable, a crossing price
            # here means depth (not price) blocked it
            own_top = combo.contras[leg_idx].best_price()
            if own_top is not None:
                if side == "buy" and price >= own_top:
                    price = own_top - 1
                elif side == "sell" and price <= own_top:
                    price = own_top + 1
                if price < 1:
                    continue
            wanted[leg_idx] = (price, combo.remaining_units * ratio)
        for leg_idx in range(len(combo.legs)):
            current = combo.virtuals.get(leg_idx)
            want = wanted.get(leg_idx)
            if current is not None and want is not None and \
                    (current.price, current.remaining) == want:
                continue
            if current is not None:
                self._touch(current.instrument)
                self._remove_order(current)
                self._emit("virt_pull", current.order_id, combo.combo_id)
                del combo.virtuals[leg_idx]
            if want is None:
                continue
            instrument, side, _ = combo.legs[leg_idx]
            combo.rev += 1
            vid = f"v{combo.combo_id}.{leg_idx}.{combo.rev}"
            price, qty = want
            virt = Resting(vid, instrument, side, price, qty, qty,
                           combo.arrival_ts, combo.seq_no, combo.owner, "virtual",
                           combo_ref=(combo.combo_id, leg_idx))
            self.used_ids.add(vid)
            self._touch(instrument)
            self.instruments[instrument].side(side).insert(virt)
            self.orders[vid] = virt
            combo.virtuals[leg_idx] = virt
            self._emit("virt", vid, combo.combo_id, instrument, side, price, qty)

    def _pull_virtuals(self, combo: Combo) -> None:
        for leg_idx in sorted(combo.virtuals):
            virt = combo.virtuals[leg_idx]
            self._touch(virt.instrument)
            self._remove_order(virt)
            self._emit("virt_pull", virt.order_id, combo.combo_id)
        combo.virtuals.clear()

    def _refresh_combos(self) -> None:
        """Fixed-point pass: try further execution and re-derive implied
        orders for every resting combo whose referenced tops changed.

        Two-tier change detection keeps the common case cheap: side version
        counters (false positives possible on deep-book changes) gate the
        exact top signature compare, which gates actual re-derivation."""
        for _ in range(_REFRESH_GUARD):
            changed = False
            for combo_id in list(self.combos):
                combo = self.combos.get(combo_id)
                if combo is None:
                    continue
                contras = combo.contras
                wv = combo.watch_versions
                if wv is not None:
                    stale = False
                    for idx, contra in enumerate(contras):
                        if wv[idx] != contra.version:
                            stale = True
                            break
                    if not stale:
                        continue
                sig = self._contra_sig(combo)
                if sig == combo.derived_sig:
                    combo.watch_versions = [s.version for s in contras]
                    continue
                changed = True
                self._execute_combo(combo)
                if combo.remaining_units == 0:
                    self._pull_virtuals(combo)
                    del self.combos[combo_id]
                    continue
                self._derive_virtuals(combo)
                combo.derived_sig = self._contra_sig(combo)
                combo.watch_versions = [s.version for s in contras]
            if not changed:
                return
        # guard exhausted: leave implied prices as-is; next event refreshes

    # ------------------------------------------------------------- snapshots

    def quote_top(self, instrument: str) -> str:
        """Best bid/ask snapshot record at the current seq_no. On-demand
        snapshots are not part of the logged output stream, so they carry no
        output seq and leave engine state untouched."""
        sig = self.instruments[instrument].top_signature()
        return wire.encode((wire.ABSENT, "quote", self.last_seq, instrument,
                            sig[0] if sig[0] is not None else wire.ABSENT, sig[1],
                            sig[2] if sig[2] is not None else wire.ABSENT, sig[3]))

    def _emit_quotes(self) -> None:
        for instrument, pre in self._touched.items():
            sig = self.instruments[instrument].top_signature()
            if sig != pre:
                self._emit("quote", instrument,
                           sig[0] if sig[0] is not None else wire.ABSENT, sig[1],
                           sig[2] if sig[2] is not None else wire.ABSENT, sig[3])

    def book_snapshot(self, instrument: str) -> dict:
        """Resting depth per side, best-first (tests and oracles)."""
        book = self.instruments[instrument]
        out = {}
        for name, side in (("buy", book.bids), ("sell", book.asks)):
            rows = []
            for price in side.iter_prices_from_best():
                for o in side.levels[price]:
                    rows.append((o.order_id, price, o.remaining, o.origin))
            out[name] = rows
        return out

    # ------------------------------------------------------------ invariants

    def _check_halt_invariants(self, seq: int) -> None:
        for instrument in self._touched:
            book = self.instruments[instrument]
            bid, ask = book.bids.best_price(), book.asks.best_price()
            if bid is not None and ask is not None and bid >= ask:
                raise HaltError(seq, f"crossed_book:{instrument}")


# ---------------------------------------------------------------- replay

@dataclass
class ReplayResult:
    engine: MatchingEngine
    output: list[str]
    halted_seq: int | None = None


def replay(lines, nullify: frozenset | set = frozenset(),
           flags: dict[int, str] | None = None) -> ReplayResult:
    """Replay a transaction log through a fresh engine.

    The output is a pure function of the log. Contiguity (seq 1..N) and
    checksums are verified; the first bad record aborts with ReplayError.
    Records whose seq is in `nullify` are skipped with a notice.
    """
    engine = MatchingEngine()
    out: list[str] = []
    expected = 1
    for line in lines:
        try:
            fields = wire.decode(line)
        except BadRecord:
            raise ReplayError(expected, "bad_checksum")
        seq = int(fields[0])
        if seq != expected:
            raise ReplayError(min(seq, expected), "gap")
        expected += 1
        if seq in nullify:
            flag = (flags or {}).get(seq, "clean")
            engine._cause = seq
            engine._out = []
            engine._emit("nullified", flag)
            engine.last_seq = seq
            out.extend(engine._out)
            continue
        try:
            out.extend(engine.process(fields))
        except HaltError as exc:
            out.extend(engine.take_output())
            return ReplayResult(engine, out, exc.seq)
    return ReplayResult(engine, out)


def _introduced_ids(fields: tuple[str, ...]) -> list[str]:
    rtype = fields[1]
    if rtype == "order":
        return [fields[2]]
    if rtype == "combo":
        cid = fields[2]
        return [cid] + [f"{cid}.L{i}" for i in range(len(fields[3].split("+")))]
    if rtype == "spider":
        return [fields[2]]
    return []


def consumed_flags(lines, nullify) -> dict[int, str]:
    """Per-nullified-seq flag: 'consumed' when the record's effects were used
    downstream in the unfiltered replay (its orders traded, or a later record
    references them), else 'clean'."""
    parsed = [wire.decode(line) for line in lines]
    full = replay(lines)
    traded: set[str] = set()
    for line in full.output:
        f = wire.split(line)
        if f[1] == "trade":
            traded.add(f[7])
            traded.add(f[8])
    referenced: dict[str, int] = {}
    for f in parsed:
        seq = int(f[0])
        if f[1] == "cancel":
            referenced.setdefault(f[2], seq)
        elif f[1] == "spider":
            for m in f[3].split(","):
                referenced.setdefault(m, seq)
    flags = {}
    for f in parsed:
        seq = int(f[0])
        if seq not in nullify:
            continue
        ids = _introduced_ids(f)
        consumed = any(i in traded for i in ids) or any(
            i in referenced and referenced[i] > seq for i in ids)
        # virtual children of a combo count as the combo's effects
        if not consumed and f[1] == "combo":
            prefix = f"v{f[2]}."
            consumed = any(t.startswith(prefix) for t in traded)
        flags[seq] = "consumed" if consumed else "clean"
    return flags


def rollback_restart(lines, nullify) -> ReplayResult:
    """Recover the core by replaying the log with the nullified records
    skipped, emitting one notice per skipped record."""
    nullify = set(nullify)
    logged = set()
    for line in lines:
        logged.add(int(wire.decode(line)[0]))
    missing = nullify - logged
    if missing:
        raise ReplayError(min(missing), "nullify_not_logged")
    flags = consumed_flags(lines, nullify)
    return replay(lines, nullify=nullify, flags=flags)
