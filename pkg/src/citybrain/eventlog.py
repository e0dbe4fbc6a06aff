"""Append-only event log and its line-delimited serialization.

Each record is one line, a JSON array with fields in fixed order::

    [seq, time, "Kind", ["subject", ...], {"key": value, ...}]

Times and every float in the detail map are printed with exactly nine
decimals; detail keys are sorted.  Records are rounded onto the 1e-9 grid
when appended, so writing and reading a log reproduces it exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, NamedTuple

from .errors import ClockRegression, CorruptRecord

TIME_DECIMALS = 9


class EventKind(str, Enum):
    RunStarted = "RunStarted"
    MessageSent = "MessageSent"
    MessageDelivered = "MessageDelivered"
    MessageDropped = "MessageDropped"
    StageTransition = "StageTransition"
    FailureInjected = "FailureInjected"
    FailureCleared = "FailureCleared"
    ActuationDone = "ActuationDone"
    TraceRecorded = "TraceRecorded"
    RunEnded = "RunEnded"

    def __str__(self) -> str:
        return self.value


class EventRecord(NamedTuple):
    seq: int
    time: float
    kind: EventKind
    subjects: tuple[str, ...]
    detail: Mapping[str, Any]


def quantize(t: float) -> float:
    return round(float(t), TIME_DECIMALS)


def _clean_detail(detail: Mapping[str, Any] | None) -> dict[str, Any]:
    if not detail:
        return {}
    out = {}
    for key, value in detail.items():
        t = type(value)
        if t is str or t is int or value is None:
            pass
        elif isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"detail {key!r} is not finite")
            value = round(value, TIME_DECIMALS)
        elif isinstance(value, bool) or not isinstance(value, (int, str)):
            raise TypeError(f"detail {key!r} has unsupported type {type(value).__name__}")
        out[key] = value
    return out


class EventLog:
    """Timestamped record of everything a run did."""

    def __init__(self, records: Iterable[EventRecord] = ()) -> None:
        self._records: list[EventRecord] = []
        for r in records:
            self._check(r.seq, r.time)
            self._records.append(r)

    def _check(self, seq: int, time: float) -> None:
        if self._records:
            last = self._records[-1]
            if seq <= last.seq:
                raise ValueError(f"seq {seq} does not follow {last.seq}")
            if time < last.time:
                raise ClockRegression(f"record at {time} precedes {last.time}")
        elif time < 0:
            raise ClockRegression(f"negative time {time}")

    def append(
        self,
        time: float,
        kind: EventKind,
        subjects: Iterable[str] = (),
        detail: Mapping[str, Any] | None = None,
    ) -> EventRecord:
        time = round(float(time), TIME_DECIMALS)
        records = self._records
        if records:
            last = records[-1]
            seq = last.seq + 1
            if time < last.time:
                raise ClockRegression(f"record at {time} precedes {last.time}")
        else:
            seq = 0
            self._check(seq, time)
        if kind.__class__ is not EventKind:
            kind = EventKind(kind)
        rec = EventRecord(seq, time, kind, tuple(subjects), _clean_detail(detail))
        self._records.append(rec)
        return rec

    @property
    def records(self) -> list[EventRecord]:
        return self._records

    @property
    def now(self) -> float:
        return self._records[-1].time if self._records else 0.0

    def of_kind(self, kind: EventKind) -> list[EventRecord]:
        return [r for r in self._records if r.kind == kind]

    def count(self, kind: EventKind) -> int:
        return sum(1 for r in self._records if r.kind == kind)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return self._records == other._records

    def __repr__(self) -> str:
        return f"EventLog({len(self._records)} records, now={self.now})"

    def digest(self) -> str:
        return log_digest(self)


# -- serialization ---------------------------------------------------------

def _fmt_value(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, float):
        return f"{value:.{TIME_DECIMALS}f}"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


def format_record(r: EventRecord) -> str:
    detail = ",".join(
        f"{json.dumps(k, ensure_ascii=False)}:{_fmt_value(r.detail[k])}" for k in sorted(r.detail)
    )
    subjects = json.dumps(list(r.subjects), ensure_ascii=False, separators=(",", ":"))
    return (
        f"[{r.seq},{r.time:.{TIME_DECIMALS}f},{json.dumps(r.kind.value)},"
        f"{subjects},{{{detail}}}]"
    )


def dumps(log: EventLog) -> str:
    return "".join(format_record(r) + "\n" for r in log)


def parse_record(line: str, lineno: int) -> EventRecord:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptRecord(lineno, f"not valid JSON ({exc.msg})") from None
    if not isinstance(raw, list) or len(raw) != 5:
        raise CorruptRecord(lineno, "expected a 5-element array")
    seq, time, kind, subjects, detail = raw
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise CorruptRecord(lineno, "seq must be an integer")
    if not isinstance(time, float):
        raise CorruptRecord(lineno, "time must be a decimal number")
    try:
        kind = EventKind(kind)
    except ValueError:
        raise CorruptRecord(lineno, f"unknown kind {kind!r}") from None
    if not isinstance(subjects, list) or not all(isinstance(s, str) for s in subjects):
        raise CorruptRecord(lineno, "subjects must be a list of strings")
    if not isinstance(detail, dict):
        raise CorruptRecord(lineno, "detail must be an object")
    for value in detail.values():
        if isinstance(value, (bool, list, dict)):
            raise CorruptRecord(lineno, "detail values must be scalars")
    rec = EventRecord(seq, time, kind, tuple(subjects), detail)
    if format_record(rec) != line:
        raise CorruptRecord(lineno, "record is not in canonical form")
    return rec


def loads(text: str) -> EventLog:
    log = EventLog()
    if not text:
        return log
    lines = text.split("\n")
    if lines[-1] != "":
        raise CorruptRecord(len(lines), "truncated line (no terminating newline)")
    for lineno, line in enumerate(lines[:-1], start=1):
        rec = parse_record(line, lineno)
        try:
            log._check(rec.seq, rec.time)
        except (ValueError, ClockRegression) as exc:
            raise CorruptRecord(lineno, str(exc)) from None
        log._records.append(rec)
    return log


def log_digest(log: EventLog) -> str:
    return "sha256:" + hashlib.sha256(dumps(log).encode("utf-8")).hexdigest()


def write_log(log: EventLog, path: str | Path) -> str:
    """Persist ``log`` and return its content digest. OSError propagates."""
    text = dumps(log)
    Path(path).write_bytes(text.encode("utf-8"))
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def read_log(path: str | Path) -> EventLog:
    """Load a log written by :func:`write_log`.

    Raises ``OSError`` when the file cannot be read and :class:`CorruptRecord`
    (with the 1-based line number) when any line is malformed.
    """
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise CorruptRecord(line, "invalid UTF-8") from None
    return loads(text)
