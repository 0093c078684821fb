"""Timed message streams and the operators that rework their granularity.

A stream is observed one tick at a time.  During a tick, a channel carries a
finite (possibly empty) sequence of messages; that per-tick sequence is a
*time interval*.  An infinite stream is handled through finite prefixes of an
explicit tick count, so every operator here maps prefixes to prefixes.

All values are immutable; the operators are pure functions.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from itertools import chain
from typing import Iterable, Iterator, Optional, Sequence, Tuple

__all__ = [
    "IDENT_RE",
    "InvalidGranularityError",
    "LengthMismatchError",
    "Message",
    "NonAlignedPrefixError",
    "SplitStrategy",
    "StreamError",
    "StreamPrefix",
    "TimeInterval",
    "delay_stream",
    "interval",
    "join",
    "message_count",
    "split",
    "timed_merge",
    "untimed_abstraction",
]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

EMPTY_INTERVAL: "TimeInterval" = ()


class StreamError(ValueError):
    """Base class for stream-operator failures."""


class InvalidGranularityError(StreamError):
    """Raised when a granularity factor n is not a positive integer."""


class NonAlignedPrefixError(StreamError):
    """Raised when joining a prefix whose length is not a multiple of n."""


class LengthMismatchError(StreamError):
    """Raised when an operator needs equally long prefixes and got unequal ones."""


@dataclass(frozen=True, slots=True)
class Message:
    """One symbolic message: a tag plus an optional integer payload.

    A payload of ``None`` is distinct from a payload of ``0``.
    """

    tag: str
    payload: Optional[int] = None

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.tag):
            raise ValueError(f"invalid message tag: {self.tag!r}")

    def token(self) -> str:
        """Render as the textual token form ``tag`` or ``tag:int``."""
        if self.payload is None:
            return self.tag
        return f"{self.tag}:{self.payload}"

    def __repr__(self) -> str:
        return f"Message({self.token()!r})"


# The content of one channel during one tick: a finite ordered message
# sequence.  The empty tuple is the silent interval.
TimeInterval = Tuple[Message, ...]


def interval(*tokens: str | Message) -> TimeInterval:
    """Build a TimeInterval from message tokens, e.g. ``interval("a", "b:3")``."""
    out = []
    for tok in tokens:
        if isinstance(tok, Message):
            out.append(tok)
        elif ":" in tok:
            tag, _, raw = tok.partition(":")
            out.append(Message(tag, int(raw)))
        else:
            out.append(Message(tok))
    return tuple(out)


@dataclass(frozen=True, slots=True)
class StreamPrefix:
    """The first T ticks of a timed stream on one channel.

    ``intervals[i]`` is the interval observed at tick i; there are no partial
    ticks.  A prefix of length zero is legal and denotes "nothing observed
    yet".
    """

    intervals: Tuple[TimeInterval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[Sequence[Message]]) -> "StreamPrefix":
        return cls(tuple(tuple(iv) for iv in intervals))

    @classmethod
    def empty(cls, ticks: int) -> "StreamPrefix":
        return cls((EMPTY_INTERVAL,) * ticks)

    @property
    def length(self) -> int:
        return len(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[TimeInterval]:
        return iter(self.intervals)

    def __getitem__(self, tick: int) -> TimeInterval:
        return self.intervals[tick]


def _check_granularity(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise InvalidGranularityError(f"granularity must be a positive integer, got {n!r}")


class SplitStrategy(enum.Enum):
    """Placement rule used by :func:`split` when an interval is subdivided."""

    ALL_FIRST = "all-first"
    ALL_LAST = "all-last"
    SPREAD = "spread"

    @classmethod
    def parse(cls, name: str) -> "SplitStrategy":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown split strategy: {name!r}")


def split(s: StreamPrefix, n: int, strategy: SplitStrategy) -> StreamPrefix:
    """Refine time granularity: each tick of ``s`` becomes ``n`` ticks.

    Every source interval with k messages maps to n consecutive result
    intervals, preserving message order.  ALL_FIRST packs the k messages into
    the first sub-interval, ALL_LAST into the last, and SPREAD places message
    j into sub-interval ``j * n // k``.  The result has length ``n * len(s)``
    and carries exactly the same messages, in the same order, as ``s``.
    """
    _check_granularity(n)
    if n == 1:
        return s
    out: list[TimeInterval] = []
    if strategy is SplitStrategy.ALL_FIRST:
        tail = (EMPTY_INTERVAL,) * (n - 1)
        for iv in s.intervals:
            out.append(iv)
            out.extend(tail)
    elif strategy is SplitStrategy.ALL_LAST:
        head = (EMPTY_INTERVAL,) * (n - 1)
        for iv in s.intervals:
            out.extend(head)
            out.append(iv)
    else:
        for iv in s.intervals:
            k = len(iv)
            if k == 0:
                out.extend((EMPTY_INTERVAL,) * n)
                continue
            buckets: list[list[Message]] = [[] for _ in range(n)]
            for j, msg in enumerate(iv):
                buckets[j * n // k].append(msg)
            out.extend(tuple(b) for b in buckets)
    return StreamPrefix(tuple(out))


def join(s: StreamPrefix, n: int) -> StreamPrefix:
    """Coarsen time granularity: every n consecutive ticks of ``s`` become one.

    Result interval i is the in-order concatenation of source intervals
    ``i*n .. i*n+n-1``.  The prefix length must be divisible by n; anything
    else raises :class:`NonAlignedPrefixError` rather than silently dropping
    a partial group.
    """
    _check_granularity(n)
    if n == 1:
        return s
    t = s.length
    if t % n != 0:
        raise NonAlignedPrefixError(f"prefix length {t} is not a multiple of {n}")
    ivs = s.intervals
    out = tuple(
        tuple(chain.from_iterable(ivs[i : i + n])) for i in range(0, t, n)
    )
    return StreamPrefix(out)


def timed_merge(s1: StreamPrefix, s2: StreamPrefix) -> StreamPrefix:
    """Merge two equally long prefixes tick-wise, left messages first."""
    if s1.length != s2.length:
        raise LengthMismatchError(
            f"cannot merge prefixes of lengths {s1.length} and {s2.length}"
        )
    return StreamPrefix(tuple(a + b for a, b in zip(s1.intervals, s2.intervals)))


def untimed_abstraction(s: StreamPrefix) -> Tuple[Message, ...]:
    """Drop all tick boundaries: the plain message sequence of the prefix."""
    return tuple(chain.from_iterable(s.intervals))


def delay_stream(s: StreamPrefix, d: int) -> StreamPrefix:
    """Prefix ``s`` with ``d`` empty ticks; the result has length ``len(s) + d``."""
    if not isinstance(d, int) or d < 0:
        raise StreamError(f"delay must be a nonnegative integer, got {d!r}")
    if d == 0:
        return s
    return StreamPrefix((EMPTY_INTERVAL,) * d + s.intervals)


def message_count(s: StreamPrefix) -> int:
    """Total number of messages across all ticks of the prefix."""
    return sum(len(iv) for iv in s.intervals)
