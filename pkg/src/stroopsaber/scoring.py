"""Block outcome classification, session counters, the game score, and streak events."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

from .beatmap import Block
from .core import ColorName, correct_answer


class Outcome(str, Enum):
    GREAT = "great"
    COR = "cor"
    FAULT = "fault"
    MISS = "miss"


BASE_POINTS = 60
SPEED_BONUS = 25
ZONE_BONUS = 15


@dataclass(frozen=True)
class ScoreThresholds:
    speed_min_mps: float = 2.0
    zone_half_width_cm: float = 15.0
    #: A block stays hittable this long after it crosses the hit plane.
    late_grace_s: float = 0.2


DEFAULT_THRESHOLDS = ScoreThresholds()


@dataclass(frozen=True)
class HitEvent:
    """One saber contact. The left saber is red, the right saber is blue."""

    block_index: int
    hit_time_s: float
    saber: ColorName
    swing_speed_mps: float
    contact_height_cm: float

    def __post_init__(self) -> None:
        if self.swing_speed_mps < 0:
            raise ValueError("swing_speed_mps must be >= 0")


@dataclass(frozen=True)
class BlockResult:
    block_index: int
    outcome: Outcome
    points: int


def score_block(
    block: Block,
    hit: Optional[HitEvent] = None,
    thresholds: ScoreThresholds = DEFAULT_THRESHOLDS,
) -> BlockResult:
    """Classify one block: no contact is a miss, the wrong saber a fault, the
    correct saber scores 60 plus speed/zone bonuses; above 60 counts as GREAT.

    A hit for a different block index is rejected. Contacts outside the
    hittable window (spawn until ``late_grace_s`` after the hit plane) are
    misses.
    """
    if hit is None:
        return BlockResult(block.index, Outcome.MISS, 0)
    if hit.block_index != block.index:
        raise ValueError(f"hit references block {hit.block_index}, scoring block {block.index}")

    window_end = block.spawn_time_s + block.flight_time_s + thresholds.late_grace_s
    if not block.spawn_time_s <= hit.hit_time_s <= window_end:
        return BlockResult(block.index, Outcome.MISS, 0)

    if hit.saber != correct_answer(block.stimulus, block.mode):
        return BlockResult(block.index, Outcome.FAULT, 0)

    points = BASE_POINTS
    if hit.swing_speed_mps >= thresholds.speed_min_mps:
        points += SPEED_BONUS
    if abs(hit.contact_height_cm - block.target_height_cm) <= thresholds.zone_half_width_cm:
        points += ZONE_BONUS
    outcome = Outcome.GREAT if points > BASE_POINTS else Outcome.COR
    return BlockResult(block.index, outcome, points)


class CountsError(ValueError):
    """A SessionCounts invariant does not hold; the message names the violation."""


@dataclass(frozen=True)
class SessionCounts:
    cor: int = 0
    fault: int = 0
    miss: int = 0
    great: int = 0
    total: int = 0

    def violations(self) -> list[str]:
        problems = []
        if min(self.cor, self.fault, self.miss, self.great, self.total) < 0:
            problems.append("counts must be nonnegative")
        if self.cor + self.fault + self.miss != self.total:
            problems.append(f"cor+fault+miss ({self.cor + self.fault + self.miss}) != total ({self.total})")
        if self.great > self.cor:
            problems.append(f"great ({self.great}) exceeds cor ({self.cor})")
        return problems

    def to_dict(self) -> dict:
        return {
            "cor": self.cor,
            "fault": self.fault,
            "miss": self.miss,
            "great": self.great,
            "total": self.total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionCounts":
        return cls(
            cor=data["cor"],
            fault=data["fault"],
            miss=data["miss"],
            great=data["great"],
            total=data["total"],
        )


def accumulate(results: Iterable[BlockResult]) -> SessionCounts:
    """Tally outcomes. GREAT counts toward both ``great`` and ``cor``."""
    cor = fault = miss = great = total = 0
    for r in results:
        total += 1
        if r.outcome is Outcome.GREAT:
            great += 1
            cor += 1
        elif r.outcome is Outcome.COR:
            cor += 1
        elif r.outcome is Outcome.FAULT:
            fault += 1
        else:
            miss += 1
    return SessionCounts(cor=cor, fault=fault, miss=miss, great=great, total=total)


def game_score(counts: SessionCounts) -> float:
    """2*cor/total - fault/total - miss/total + 3*great/total; always in [-1, 5]."""
    problems = counts.violations()
    if counts.total < 1:
        problems.append("total must be >= 1")
    if problems:
        raise CountsError("; ".join(problems))
    t = counts.total
    return 2.0 * counts.cor / t - counts.fault / t - counts.miss / t + 3.0 * counts.great / t


STREAK_TARGET = 5


@dataclass(frozen=True)
class ExcellentEvent:
    """Fired on every completion of STREAK_TARGET consecutive GREATs."""

    block_index: int
    ordinal: int


class StreakTracker:
    """Counts consecutive GREATs; resets after each event and on any non-GREAT."""

    def __init__(self) -> None:
        self.run = 0
        self.fired = 0

    def feed(self, result: BlockResult) -> Optional[ExcellentEvent]:
        if result.outcome is not Outcome.GREAT:
            self.run = 0
            return None
        self.run += 1
        if self.run == STREAK_TARGET:
            self.run = 0
            self.fired += 1
            return ExcellentEvent(block_index=result.block_index, ordinal=self.fired)
        return None


def track_streak(results: Iterable[BlockResult]) -> Iterator[ExcellentEvent]:
    tracker = StreakTracker()
    for r in results:
        event = tracker.feed(r)
        if event is not None:
            yield event


def event_log_line(session_id: str, song_id: str, result: BlockResult, timestamp_ms: int) -> str:
    """One append-only log record per scored block."""
    return json.dumps(
        {
            "session_id": session_id,
            "song_id": song_id,
            "block_index": result.block_index,
            "outcome": result.outcome.value,
            "points": result.points,
            "timestamp_ms": timestamp_ms,
        },
        separators=(",", ":"),
    )
