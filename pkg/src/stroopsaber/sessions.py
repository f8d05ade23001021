"""Training plans, song records, leaderboards, and the daily champion.

Standings are a pure fold over an append-only record log: replaying the log
reproduces identical leaderboards.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from datetime import date, datetime
from pathlib import Path
from typing import IO, Optional
from zoneinfo import ZoneInfo

from .core import GameMode, Level
from .scoring import SessionCounts, game_score

SONGS_PER_SESSION = 12
BREAK_AFTER_SONG = 6
CALENDAR_WINDOW_WEEKS = 6
#: Session allocation in order: 7 easy, 7 normal, 6 hard.
LEVEL_ALLOCATION: tuple[tuple[Level, int], ...] = (
    (Level.EASY, 7),
    (Level.NORMAL, 7),
    (Level.HARD, 6),
)
TOTAL_SESSIONS = sum(n for _, n in LEVEL_ALLOCATION)


@dataclass(frozen=True)
class SessionSpec:
    ordinal: int
    level: Level
    song_count: int = SONGS_PER_SESSION
    break_after: int = BREAK_AFTER_SONG


@dataclass(frozen=True)
class TrainingPlan:
    participant_id: str
    sessions: tuple[SessionSpec, ...]
    calendar_window_weeks: int = CALENDAR_WINDOW_WEEKS


def level_for_session(ordinal: int) -> Level:
    if not 1 <= ordinal <= TOTAL_SESSIONS:
        raise ValueError(f"session ordinal must be in 1..{TOTAL_SESSIONS}")
    cursor = 0
    for level, count in LEVEL_ALLOCATION:
        cursor += count
        if ordinal <= cursor:
            return level
    raise AssertionError("unreachable")


def build_training_plan(participant_id: str) -> TrainingPlan:
    """The fixed 20-session plan; structure does not depend on the participant."""
    sessions = tuple(
        SessionSpec(ordinal=i, level=level_for_session(i)) for i in range(1, TOTAL_SESSIONS + 1)
    )
    return TrainingPlan(participant_id=participant_id, sessions=sessions)


@dataclass(frozen=True)
class SongRecord:
    participant_id: str
    session_ordinal: int
    song_id: str
    mode: GameMode
    level: Level
    counts: SessionCounts
    gs: float
    completed_at: datetime

    def __post_init__(self) -> None:
        if self.completed_at.tzinfo is None:
            raise ValueError("completed_at must be timezone-aware")

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "participant_id": self.participant_id,
                "session_ordinal": self.session_ordinal,
                "song_id": self.song_id,
                "mode": self.mode.value,
                "level": self.level.value,
                "counts": self.counts.to_dict(),
                "gs": self.gs,
                "completed_at": self.completed_at.isoformat(),
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "SongRecord":
        data = json.loads(line)
        return cls(
            participant_id=data["participant_id"],
            session_ordinal=data["session_ordinal"],
            song_id=data["song_id"],
            mode=GameMode(data["mode"]),
            level=Level(data["level"]),
            counts=SessionCounts.from_dict(data["counts"]),
            gs=data["gs"],
            completed_at=datetime.fromisoformat(data["completed_at"]),
        )


@dataclass(frozen=True)
class LeaderboardEntry:
    participant_id: str
    best_gs: float
    achieved_at: datetime


@dataclass(frozen=True)
class RecordOutcome:
    """What changed when a record was accepted."""

    record: SongRecord
    gs_flagged: bool
    personal_best_improved: bool
    old_rank: Optional[int]
    new_rank: int


class UnknownParticipantError(KeyError):
    pass


class DuplicateRecordError(ValueError):
    pass


CSV_COLUMNS = (
    "participant_id",
    "session",
    "song_id",
    "mode",
    "level",
    "cor",
    "fault",
    "miss",
    "great",
    "total",
    "gs",
    "completed_at",
)


class RecordStore:
    """Song records plus derived standings.

    When ``log_path`` is set, accepted records are appended there before the
    in-memory state changes; ``RecordStore(log_path=...)`` replays any existing
    log on open.
    """

    def __init__(self, log_path: str | Path | None = None, timezone: str = "UTC") -> None:
        self.tz = ZoneInfo(timezone)
        self.log_path = Path(log_path) if log_path is not None else None
        self._participants: set[str] = set()
        self._records: list[SongRecord] = []
        self._keys: set[tuple[str, int, str]] = set()
        if self.log_path is not None and self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(SongRecord.from_json_line(line))

    def register_participant(self, participant_id: str) -> None:
        self._participants.add(participant_id)

    def participants(self) -> set[str]:
        return set(self._participants)

    def _apply(self, record: SongRecord) -> None:
        self._participants.add(record.participant_id)
        self._records.append(record)
        self._keys.add((record.participant_id, record.session_ordinal, record.song_id))

    def record_song(self, record: SongRecord) -> RecordOutcome:
        """Persist a record and update standings atomically.

        The stored gs is always recomputed from the counts; a mismatched
        submission is corrected and flagged. Unknown participants and duplicate
        (participant, session, song) submissions are rejected.
        """
        if record.participant_id not in self._participants:
            raise UnknownParticipantError(record.participant_id)
        key = (record.participant_id, record.session_ordinal, record.song_id)
        if key in self._keys:
            raise DuplicateRecordError(f"duplicate record for {key}")
        computed = game_score(record.counts)
        flagged = abs(computed - record.gs) > 1e-9
        if flagged:
            record = replace(record, gs=computed)

        old_rank = self.rank_of(record.participant_id)
        old_best = self._best_for(record.participant_id)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json_line() + "\n")
        self._apply(record)
        new_rank = self.rank_of(record.participant_id)
        assert new_rank is not None
        improved = old_best is None or record.gs > old_best.best_gs
        return RecordOutcome(
            record=record,
            gs_flagged=flagged,
            personal_best_improved=improved,
            old_rank=old_rank,
            new_rank=new_rank,
        )

    def _best_for(self, participant_id: str) -> Optional[LeaderboardEntry]:
        best: Optional[LeaderboardEntry] = None
        for r in self._records:
            if r.participant_id != participant_id:
                continue
            if best is None or r.gs > best.best_gs or (r.gs == best.best_gs and r.completed_at < best.achieved_at):
                best = LeaderboardEntry(participant_id, r.gs, r.completed_at)
        return best

    def leaderboard(self) -> list[LeaderboardEntry]:
        """Personal bests sorted by gs descending, ties broken by earliest achievement."""
        entries = []
        for pid in sorted({r.participant_id for r in self._records}):
            best = self._best_for(pid)
            if best is not None:
                entries.append(best)
        entries.sort(key=lambda e: (-e.best_gs, e.achieved_at, e.participant_id))
        return entries

    def rank_of(self, participant_id: str) -> Optional[int]:
        for i, entry in enumerate(self.leaderboard(), start=1):
            if entry.participant_id == participant_id:
                return i
        return None

    def _local_date(self, moment: datetime) -> date:
        return moment.astimezone(self.tz).date()

    def daily_champion(self, day: date) -> Optional[str]:
        """Participant with the best single-song gs recorded that calendar day."""
        best: Optional[SongRecord] = None
        for r in self._records:
            if self._local_date(r.completed_at) != day:
                continue
            if (
                best is None
                or r.gs > best.gs
                or (r.gs == best.gs and (r.completed_at, r.participant_id) < (best.completed_at, best.participant_id))
            ):
                best = r
        return best.participant_id if best else None

    def records_for(self, participant_id: str) -> list[SongRecord]:
        return [r for r in self._records if r.participant_id == participant_id]

    def all_records(self) -> list[SongRecord]:
        return list(self._records)

    def export_csv(self, fp: IO[str]) -> None:
        writer = csv.writer(fp)
        writer.writerow(CSV_COLUMNS)
        for r in self._records:
            writer.writerow(
                [
                    r.participant_id,
                    r.session_ordinal,
                    r.song_id,
                    r.mode.value,
                    r.level.value,
                    r.counts.cor,
                    r.counts.fault,
                    r.counts.miss,
                    r.counts.great,
                    r.counts.total,
                    r.gs,
                    r.completed_at.isoformat(),
                ]
            )
