"""Crowd-sourced blacklists and the anonymised interaction event log.

Both stores persist as append-only JSON Lines and rebuild their full state
by replaying the file, so a restart loses nothing. A reported item is
banned immediately for the reference it was reported under; once enough
distinct reporters flag the same item it is banned globally.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from .errors import ValidationError

DEFAULT_GLOBAL_BAN_THRESHOLD = 3

EVENT_KINDS = ("impression", "click")


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def parse_iso8601(value: str) -> datetime:
    """Strict ISO-8601 parse accepting a trailing Z for UTC."""
    if not isinstance(value, str) or not value:
        raise ValidationError("timestamp must be a non-empty ISO-8601 string")
    text = value[:-1] + "+00:00" if value.endswith("Z") else value
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValidationError(f"invalid ISO-8601 timestamp {value!r}") from exc


@dataclass
class FeedbackEntry:
    """One 'not relevant' report from an anonymous reporter."""

    reference_key: str
    recommended_id: str
    reported_at: str
    reporter_hash: str

    def validate(self) -> None:
        if not self.reference_key:
            raise ValidationError("reference_key must be non-empty", field="reference_key")
        if not self.recommended_id:
            raise ValidationError(
                "recommended_id must be non-empty", field="recommended_id"
            )
        if not self.reporter_hash:
            raise ValidationError("reporter_hash must be non-empty", field="reporter_hash")
        parse_iso8601(self.reported_at)

    def to_obj(self) -> dict[str, str]:
        return {
            "reference_key": self.reference_key,
            "recommended_id": self.recommended_id,
            "reported_at": self.reported_at,
            "reporter_hash": self.reporter_hash,
        }

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "FeedbackEntry":
        entry = cls(
            reference_key=str(obj.get("reference_key", "")),
            recommended_id=str(obj.get("recommended_id", "")),
            reported_at=str(obj.get("reported_at", "")),
            reporter_hash=str(obj.get("reporter_hash", "")),
        )
        entry.validate()
        return entry


@dataclass
class InteractionEvent:
    """Anonymised impression or click, optionally tagged with an A/B arm."""

    user_hash: str
    doc_id: str
    access_time: str
    kind: str
    source_doc_id: str | None = None
    variant: str | None = None
    orphan: bool = False

    def validate(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValidationError(
                f"kind must be one of {EVENT_KINDS}, got {self.kind!r}", field="kind"
            )
        if not self.user_hash:
            raise ValidationError("user_hash must be non-empty", field="user_hash")
        if not self.doc_id:
            raise ValidationError("doc_id must be non-empty", field="doc_id")
        parse_iso8601(self.access_time)

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "user_hash": self.user_hash,
            "doc_id": self.doc_id,
            "access_time": self.access_time,
            "kind": self.kind,
            "orphan": self.orphan,
        }
        if self.source_doc_id is not None:
            obj["source_doc_id"] = self.source_doc_id
        if self.variant is not None:
            obj["variant"] = self.variant
        return obj

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "InteractionEvent":
        event = cls(
            user_hash=str(obj.get("user_hash", "")),
            doc_id=str(obj.get("doc_id", "")),
            access_time=str(obj.get("access_time", "")),
            kind=str(obj.get("kind", "")),
            source_doc_id=obj.get("source_doc_id"),
            variant=obj.get("variant"),
            orphan=bool(obj.get("orphan", False)),
        )
        event.validate()
        return event


def _append_jsonl(path: Path, obj: dict[str, Any]) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError:
                continue  # tolerate a torn trailing line after a crash


class BlacklistStore:
    """Pair-level and global bans reconstructed from an append-only log.

    Bans only ever grow: there is no un-ban operation, so a check that
    returned True keeps returning True. One lock serializes writers; reads
    take the same lock (all operations are O(1) set work).
    """

    def __init__(
        self,
        path: str | Path | None = None,
        global_ban_threshold: int = DEFAULT_GLOBAL_BAN_THRESHOLD,
    ):
        if global_ban_threshold < 1:
            raise ValidationError("global_ban_threshold must be >= 1")
        self.path = Path(path) if path is not None else None
        self.global_ban_threshold = global_ban_threshold
        self._pairs: set[tuple[str, str]] = set()
        self._reporters: dict[str, set[str]] = {}
        self._global_bans: set[str] = set()
        self._lock = threading.Lock()
        self.replay_skipped = 0
        if self.path is not None and self.path.exists():
            self._replay()

    def _replay(self) -> None:
        assert self.path is not None
        for _line_number, obj in _iter_jsonl(self.path):
            try:
                entry = FeedbackEntry.from_obj(obj)
            except ValidationError:
                self.replay_skipped += 1
                continue
            self._apply(entry)

    def _apply(self, entry: FeedbackEntry) -> None:
        self._pairs.add((entry.reference_key, entry.recommended_id))
        reporters = self._reporters.setdefault(entry.recommended_id, set())
        reporters.add(entry.reporter_hash)
        if len(reporters) >= self.global_ban_threshold:
            self._global_bans.add(entry.recommended_id)

    def record_feedback(self, entry: FeedbackEntry) -> None:
        entry.validate()
        with self._lock:
            if self.path is not None:
                _append_jsonl(self.path, entry.to_obj())
            self._apply(entry)

    def check(self, reference_key: str, doc_id: str) -> bool:
        """True iff the pair is banned or the document is banned globally."""
        with self._lock:
            return doc_id in self._global_bans or (reference_key, doc_id) in self._pairs

    def globally_banned(self, doc_id: str) -> bool:
        with self._lock:
            return doc_id in self._global_bans

    def distinct_reporters(self, doc_id: str) -> int:
        with self._lock:
            return len(self._reporters.get(doc_id, ()))


class EventLog:
    """Append-only log of anonymised interaction events.

    A click without a prior impression of the same (user, document) pair is
    accepted but flagged as an orphan, keeping the CTR denominator honest.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._events: list[InteractionEvent] = []
        self._impressions: set[tuple[str, str]] = set()
        self._lock = threading.Lock()
        self.replay_skipped = 0
        if self.path is not None and self.path.exists():
            self._replay()

    def _replay(self) -> None:
        assert self.path is not None
        for _line_number, obj in _iter_jsonl(self.path):
            try:
                event = InteractionEvent.from_obj(obj)
            except ValidationError:
                self.replay_skipped += 1
                continue
            self._events.append(event)
            if event.kind == "impression":
                self._impressions.add((event.user_hash, event.doc_id))

    def record_event(self, event: InteractionEvent) -> InteractionEvent:
        event.validate()
        with self._lock:
            if event.kind == "impression":
                self._impressions.add((event.user_hash, event.doc_id))
                event.orphan = False
            else:
                event.orphan = (event.user_hash, event.doc_id) not in self._impressions
            if self.path is not None:
                _append_jsonl(self.path, event.to_obj())
            self._events.append(event)
        return event

    def events(self) -> list[InteractionEvent]:
        with self._lock:
            return list(self._events)

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)


def load_events(path: str | Path) -> list[InteractionEvent]:
    """Read an event log file; invalid lines are dropped silently."""
    events = []
    for _line_number, obj in _iter_jsonl(Path(path)):
        try:
            events.append(InteractionEvent.from_obj(obj))
        except ValidationError:
            continue
    return events


__all__ = [
    "BlacklistStore",
    "DEFAULT_GLOBAL_BAN_THRESHOLD",
    "EventLog",
    "FeedbackEntry",
    "InteractionEvent",
    "load_events",
    "parse_iso8601",
    "utc_now_iso",
]
