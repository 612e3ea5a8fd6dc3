"""Canonical line format for logs and wire messages.

One record per line, fields joined by ``|``, closed by an 8-hex-digit CRC32
checksum of everything before it. Replay equality and all log comparisons are
defined over these exact bytes, so the field order per record type is frozen:

Core input records (first field is the global seq_no):

    seq|meta|instr1,instr2,...
    seq|order|order_id|instrument|side|price|qty|arrival_ts|owner|origin
    seq|cancel|target_id|owner
    seq|combo|combo_id|legs|net_limit|qty|aon|arrival_ts|owner|origin
    seq|spider|spider_id|member1,member2,...|owner
    seq|poison|note

``legs`` is ``instrument:side:ratio`` joined by ``+``; ``side`` is ``buy`` or
``sell``; ``aon`` is 0/1; prices are integer ticks, quantities integer units,
``arrival_ts`` integer simulated milliseconds.

Core output records (first field is the output seq, second the record type,
third the causing input seq):

    oseq|accept|cause|ref_id
    oseq|reject|cause|ref_id|reason
    oseq|trade|cause|trade_id|instrument|price|qty|buy_id|sell_id
    oseq|rest|cause|order_id|instrument|side|price|remaining
    oseq|cancel_ack|cause|order_id|canceled
    oseq|xcancel|cause|spider_id|order_id|canceled
    oseq|virt|cause|order_id|combo_id|instrument|side|price|qty
    oseq|virt_pull|cause|order_id|combo_id
    oseq|combo_exec|cause|combo_id|units|net_cost
    oseq|combo_rest|cause|combo_id|remaining
    oseq|quote|cause|instrument|bid_px|bid_qty|ask_px|ask_qty
    oseq|nullified|cause|flag
    oseq|halted|cause|reason

Absent values are ``-``.
"""

from __future__ import annotations

import zlib

from .errors import BadRecord

SEP = "|"
ABSENT = "-"

# Input record types understood by the matching core.
IN_TYPES = ("meta", "order", "cancel", "combo", "spider", "poison")

# Output record types that are market data (disseminated to subscribers).
MARKET_DATA_TYPES = ("trade", "quote")


def checksum(body: str) -> str:
    return format(zlib.crc32(body.encode("ascii")) & 0xFFFFFFFF, "08x")


def encode(fields) -> str:
    """Join fields and append the checksum. Fields are str()-ed."""
    body = SEP.join(str(f) for f in fields)
    return body + SEP + checksum(body)


def decode(line: str) -> tuple[str, ...]:
    """Split a line and verify its checksum."""
    body, sep, ck = line.rpartition(SEP)
    if not sep or checksum(body) != ck:
        raise BadRecord(f"bad checksum: {line!r}")
    return tuple(body.split(SEP))


def split(line: str) -> tuple[str, ...]:
    """Split without checksum verification (for already-trusted lines)."""
    parts = line.split(SEP)
    return tuple(parts[:-1])


def encode_legs(legs) -> str:
    """legs: iterable of (instrument, side, ratio)."""
    return "+".join(f"{i}:{s}:{r}" for i, s, r in legs)


def decode_legs(text: str) -> list[tuple[str, str, int]]:
    out = []
    for part in text.split("+"):
        instrument, side, ratio = part.split(":")
        out.append((instrument, side, int(ratio)))
    return out


_TOKEN_BAD = set("|,:+\n\r ")


def valid_token(text: str) -> bool:
    """True if the text is safe to embed as a single wire field/id."""
    if not text or text == ABSENT:
        return False
    if any(c in _TOKEN_BAD for c in text):
        return False
    return text.isascii()
