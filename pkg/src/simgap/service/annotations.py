"""Durable annotation storage: an append-only, replayable log.

Every write appends one JSON line with a strictly increasing ``seq``
and is flushed and fsynced before the caller gets its acknowledgement,
so a kill at any moment loses at most a write that was never acked.
Current state is always "latest record per pair wins"; replaying the
log from scratch reconstructs it exactly.

A torn trailing line (the tail of a write that died before the fsync)
is dropped with a warning on replay.  Corruption anywhere else in the
file is a hard error: it cannot be produced by a crash of this writer.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..errors import FormatError, ValidationError
from ..bench.model import PATTERNS

logger = logging.getLogger(__name__)

STATUS_DRAFT = "draft"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"
STATUSES = (STATUS_DRAFT, STATUS_ACCEPTED, STATUS_REJECTED)


@dataclass(frozen=True)
class AnnotationQuestion:
    """A drafted question about one slot (0 or 1) of an image pair."""

    image_slot: int
    text: str
    options: tuple[str, ...]
    correct_index: int

    def __post_init__(self) -> None:
        if self.image_slot not in (0, 1):
            raise ValidationError(f"image_slot must be 0 or 1, got {self.image_slot}")
        if not self.text.strip():
            raise ValidationError("question text must be non-empty")
        if len(self.options) < 2:
            raise ValidationError(f"needs >= 2 options, got {len(self.options)}")
        if not 0 <= self.correct_index < len(self.options):
            raise ValidationError(
                f"correct_index {self.correct_index} out of range for "
                f"{len(self.options)} options"
            )


@dataclass(frozen=True)
class Annotation:
    """One complete annotation of a mined pair."""

    pair_id: str
    author: str
    created_at: str
    status: str
    patterns: tuple[str, ...]
    questions: tuple[AnnotationQuestion, AnnotationQuestion]

    def __post_init__(self) -> None:
        if not self.author.strip():
            raise ValidationError("author must be non-empty")
        if self.status not in STATUSES:
            raise ValidationError(f"unknown status {self.status!r}")
        if not self.patterns:
            raise ValidationError("needs >= 1 pattern")
        for p in self.patterns:
            if p not in PATTERNS:
                raise ValidationError(f"unknown pattern {p!r}")
        if len(set(self.patterns)) != len(self.patterns):
            raise ValidationError("duplicate pattern tags")
        slots = sorted(q.image_slot for q in self.questions)
        if slots != [0, 1]:
            raise ValidationError("annotation needs one question per image slot")

    def to_record(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "author": self.author,
            "created_at": self.created_at,
            "status": self.status,
            "patterns": list(self.patterns),
            "questions": [
                {
                    "image_slot": q.image_slot,
                    "text": q.text,
                    "options": list(q.options),
                    "correct_index": q.correct_index,
                }
                for q in sorted(self.questions, key=lambda q: q.image_slot)
            ],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Annotation":
        questions = tuple(
            AnnotationQuestion(
                image_slot=int(q["image_slot"]),
                text=str(q["text"]),
                options=tuple(str(o) for o in q["options"]),
                correct_index=int(q["correct_index"]),
            )
            for q in record["questions"]
        )
        return cls(
            pair_id=str(record["pair_id"]),
            author=str(record["author"]),
            created_at=str(record["created_at"]),
            status=str(record["status"]),
            patterns=tuple(str(p) for p in record["patterns"]),
            questions=questions,  # type: ignore[arg-type]
        )


class AnnotationLog:
    """Append-only JSONL log with last-write-wins state per pair."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._state: dict[str, tuple[int, Annotation]] = {}
        self._next_seq = 1
        self._replay()
        self._fh = open(self.path, "ab")

    def _replay(self) -> None:
        if not self.path.exists():
            return
        raw = self.path.read_bytes()
        if not raw:
            return
        lines = raw.split(b"\n")
        # A complete log ends with a newline, leaving one empty tail element.
        tail = lines.pop()
        if tail:
            logger.warning(
                "dropping torn trailing record (%d bytes) in %s", len(tail), self.path
            )
        last_seq = 0
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                seq = int(record["seq"])
                annotation = Annotation.from_record(record)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"annotation log line {lineno}: {exc}") from exc
            if seq <= last_seq:
                raise FormatError(
                    f"annotation log line {lineno}: seq {seq} not greater than {last_seq}"
                )
            last_seq = seq
            self._state[annotation.pair_id] = (seq, annotation)
        self._next_seq = last_seq + 1

    def append(self, annotation: Annotation) -> int:
        """Durably append one annotation; returns its sequence number.

        The record is on disk (write + flush + fsync) before this
        returns, so an acknowledged write survives any crash.
        """
        with self._lock:
            seq = self._next_seq
            record = {"seq": seq, **annotation.to_record()}
            self._fh.write(json.dumps(record, sort_keys=True).encode() + b"\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._state[annotation.pair_id] = (seq, annotation)
            self._next_seq = seq + 1
            return seq

    def latest(self, pair_id: str) -> tuple[int, Annotation] | None:
        with self._lock:
            return self._state.get(pair_id)

    def snapshot(self) -> dict[str, tuple[int, Annotation]]:
        """Copy of the current last-write-wins state."""
        with self._lock:
            return dict(self._state)

    def count(self) -> int:
        with self._lock:
            return len(self._state)

    def close(self) -> None:
        self._fh.close()
