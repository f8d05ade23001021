"""HTTP and realtime surface over the engine.

All state changes flow through an append-only journal; restarting the service
over the same data directory replays the journal and reconstructs identical
session states and leaderboards. Reaction times are pass-through values from
client monotonic clocks; the server never derives them from arrival times.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timezone as dt_timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Optional
from zoneinfo import ZoneInfo

from fastapi import FastAPI, HTTPException, Query, Response, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from . import analysis
from .beatmap import (
    BeatMap,
    ModePattern,
    Song,
    beatmap_to_dict,
    beatmap_to_json,
    build_mode_schedule,
    default_song_catalog,
    generate_beatmap,
    song_to_dict,
)
from .cogtest import (
    GoNoGoSummary,
    TestKind,
    TestSummaryRecord,
    build_trial_plan,
    plan_to_dict,
    score_response,
    summarize_gonogo,
    summarize_stroop,
    write_summary_csv,
)
from .core import ColorName, GameMode, Level
from .scoring import (
    BlockResult,
    HitEvent,
    Outcome,
    ScoreThresholds,
    SessionCounts,
    StreakTracker,
    accumulate,
    event_log_line,
    game_score,
    score_block,
)
from .sessions import (
    BREAK_AFTER_SONG,
    SONGS_PER_SESSION,
    DuplicateRecordError,
    RecordStore,
    SongRecord,
    UnknownParticipantError,
    build_training_plan,
    level_for_session,
)

import random
import io

BREAK_MINIMUM_S = 600.0


class Phase(str, Enum):
    IDLE = "idle"
    PLAYING = "playing"
    BREAK = "break"
    DONE = "done"


@dataclass(frozen=True)
class SongSlot:
    ordinal: int
    song_id: str
    mode: GameMode
    seed: int


@dataclass
class PlaySession:
    session_id: str
    participant_id: str
    session_ordinal: int
    level: Level
    schedule: tuple[SongSlot, ...]
    phase: Phase = Phase.IDLE
    completed_count: int = 0
    current_ordinal: int = 0
    active_map: Optional[BeatMap] = None
    scored: dict[int, BlockResult] = field(default_factory=dict)
    last_scored_index: int = -1
    streak: StreakTracker = field(default_factory=StreakTracker)
    events: list[dict] = field(default_factory=list)
    song_summaries: list[dict] = field(default_factory=list)
    break_started_at: Optional[datetime] = None

    def running_counts(self) -> SessionCounts:
        done = [s for s in self.song_summaries]
        cor = sum(s["counts"]["cor"] for s in done)
        fault = sum(s["counts"]["fault"] for s in done)
        miss = sum(s["counts"]["miss"] for s in done)
        great = sum(s["counts"]["great"] for s in done)
        total = sum(s["counts"]["total"] for s in done)
        current = accumulate(self.scored.values())
        return SessionCounts(
            cor=cor + current.cor,
            fault=fault + current.fault,
            miss=miss + current.miss,
            great=great + current.great,
            total=total + current.total,
        )


class ApiError(Exception):
    def __init__(self, status: int, *violations: str) -> None:
        super().__init__("; ".join(violations))
        self.status = status
        self.violations = list(violations)


class ServiceEngine:
    """Owns catalog, sessions, records, and the journal. Handlers run on one
    event loop, so operations are serialized per process."""

    def __init__(
        self,
        data_dir: str | Path | None = None,
        clock: Callable[[], datetime] | None = None,
        catalog: tuple[Song, ...] | None = None,
        timezone: str = "UTC",
        thresholds: ScoreThresholds = ScoreThresholds(),
    ) -> None:
        self.tz = ZoneInfo(timezone)
        self.clock = clock or (lambda: datetime.now(dt_timezone.utc))
        self.catalog: dict[str, Song] = {s.id: s for s in (catalog or default_song_catalog())}
        self.thresholds = thresholds
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.journal_path = self.data_dir / "journal.ndjson" if self.data_dir else None
        self.events_path = self.data_dir / "events.ndjson" if self.data_dir else None
        self.records_path = self.data_dir / "records.ndjson" if self.data_dir else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        # The journal is the source of truth; records.ndjson is a derived,
        # disposable snapshot kept in sync below.
        self.store = RecordStore(log_path=None, timezone=timezone)
        self.sessions: dict[str, PlaySession] = {}
        self.test_records: list[TestSummaryRecord] = []
        self.test_responses: list[dict] = []
        self._session_counter = 0
        self._subscribers: dict[str, list[asyncio.Queue]] = {}
        self._replaying = False
        if self.journal_path is not None and self.journal_path.exists():
            self._replay_journal()

    # -- journal ---------------------------------------------------------

    def _journal(self, entry: dict) -> None:
        if self._replaying or self.journal_path is None:
            return
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")

    def _replay_journal(self) -> None:
        self._replaying = True
        try:
            for line in self.journal_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                op = entry["op"]
                if op == "create_session":
                    self.create_session(
                        entry["participant_id"],
                        entry["session_ordinal"],
                        entry["seed"],
                        session_id=entry["session_id"],
                    )
                elif op == "start_song":
                    self.start_song(
                        entry["session_id"],
                        entry["ordinal"],
                        now=datetime.fromisoformat(entry["at"]),
                    )
                elif op == "hit":
                    self.apply_hit(
                        entry["session_id"],
                        entry["payload"],
                        ts_ms=entry["ts_ms"],
                    )
                elif op == "complete_song":
                    self.complete_song(
                        entry["session_id"],
                        entry["ordinal"],
                        completed_at=datetime.fromisoformat(entry["at"]),
                    )
                elif op == "test_result":
                    self.submit_test_result(
                        entry["participant_id"],
                        entry["phase"],
                        TestKind(entry["test_kind"]),
                        entry["plan_seed"],
                        entry["responses"],
                    )
        finally:
            self._replaying = False
        self._sync_records_snapshot()

    def _sync_records_snapshot(self) -> None:
        """Regenerate the derived record log if it diverged (e.g. a crash
        between journal and snapshot appends)."""
        if self.records_path is None:
            return
        expected = "".join(r.to_json_line() + "\n" for r in self.store.all_records())
        current = self.records_path.read_text(encoding="utf-8") if self.records_path.exists() else ""
        if current != expected:
            self.records_path.write_text(expected, encoding="utf-8")

    # -- realtime ---------------------------------------------------------

    def subscribe(self, session_id: str, queue: asyncio.Queue) -> None:
        self._subscribers.setdefault(session_id, []).append(queue)

    def unsubscribe(self, session_id: str, queue: asyncio.Queue) -> None:
        queues = self._subscribers.get(session_id, [])
        if queue in queues:
            queues.remove(queue)

    def _publish(self, session: PlaySession, kind: str, payload: dict) -> dict:
        event = {"seq": len(session.events), "kind": kind, "payload": payload}
        session.events.append(event)
        for queue in self._subscribers.get(session.session_id, []):
            queue.put_nowait(event)
        return event

    # -- operations -------------------------------------------------------

    def get_session(self, session_id: str) -> PlaySession:
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session

    def create_session(
        self,
        participant_id: str,
        session_ordinal: int,
        seed: int,
        session_id: str | None = None,
    ) -> PlaySession:
        if not participant_id:
            raise ApiError(422, "participant_id must not be empty")
        try:
            level = level_for_session(session_ordinal)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from exc
        rng = random.Random(seed)
        ids = sorted(self.catalog)
        if len(ids) >= SONGS_PER_SESSION:
            song_ids = rng.sample(ids, SONGS_PER_SESSION)
        else:
            song_ids = [rng.choice(ids) for _ in range(SONGS_PER_SESSION)]
        modes = build_mode_schedule(ModePattern.RANDOM, SONGS_PER_SESSION, seed=seed).modes
        schedule = tuple(
            SongSlot(ordinal=i + 1, song_id=song_ids[i], mode=modes[i], seed=rng.getrandbits(32))
            for i in range(SONGS_PER_SESSION)
        )
        if session_id is None:
            self._session_counter += 1
            session_id = f"s-{self._session_counter:04d}"
        else:
            # Replayed ids keep the counter ahead of every assigned id.
            number = int(session_id.split("-")[-1])
            self._session_counter = max(self._session_counter, number)
        session = PlaySession(
            session_id=session_id,
            participant_id=participant_id,
            session_ordinal=session_ordinal,
            level=level,
            schedule=schedule,
        )
        self.sessions[session_id] = session
        self.store.register_participant(participant_id)
        self._journal(
            {
                "op": "create_session",
                "session_id": session_id,
                "participant_id": participant_id,
                "session_ordinal": session_ordinal,
                "seed": seed,
            }
        )
        return session

    def start_song(self, session_id: str, ordinal: int, now: datetime | None = None) -> tuple[BeatMap, Optional[str]]:
        session = self.get_session(session_id)
        now = now or self.clock()
        if session.phase is Phase.PLAYING:
            raise ApiError(409, f"song {session.current_ordinal} is still in progress")
        if session.phase is Phase.DONE:
            raise ApiError(409, "session is complete")
        if ordinal != session.completed_count + 1:
            raise ApiError(409, f"next song is {session.completed_count + 1}, not {ordinal}")
        advisory = None
        if session.phase is Phase.BREAK and session.break_started_at is not None:
            elapsed = (now - session.break_started_at).total_seconds()
            if elapsed < BREAK_MINIMUM_S:
                advisory = (
                    f"break lasted {elapsed:.0f}s; at least {BREAK_MINIMUM_S:.0f}s is recommended"
                )
        slot = session.schedule[ordinal - 1]
        song = self.catalog[slot.song_id]
        beatmap = generate_beatmap(song, session.level, slot.mode, slot.seed)
        session.active_map = beatmap
        session.scored = {}
        session.last_scored_index = -1
        session.streak = StreakTracker()
        session.current_ordinal = ordinal
        session.phase = Phase.PLAYING
        self._journal({"op": "start_song", "session_id": session_id, "ordinal": ordinal, "at": now.isoformat()})
        self._publish(
            session,
            "SpawnSchedule",
            {"ordinal": ordinal, "beatmap": beatmap_to_dict(beatmap)},
        )
        return beatmap, advisory

    def _score_and_publish(self, session: PlaySession, index: int, hit: Optional[HitEvent], ts_ms: int) -> tuple[BlockResult, list[dict]]:
        assert session.active_map is not None
        block = session.active_map.blocks[index]
        result = score_block(block, hit, self.thresholds)
        session.scored[index] = result
        session.last_scored_index = index
        feedback = [
            self._publish(
                session,
                "BlockScored",
                {"block_index": index, "outcome": result.outcome.value, "points": result.points},
            )
        ]
        excellent = session.streak.feed(result)
        if excellent is not None:
            feedback.append(
                self._publish(
                    session,
                    "Excellent",
                    {"block_index": excellent.block_index, "streak_ordinal": excellent.ordinal},
                )
            )
        if self.events_path is not None and not self._replaying:
            with open(self.events_path, "a", encoding="utf-8") as fh:
                fh.write(event_log_line(session.session_id, session.active_map.song_id, result, ts_ms) + "\n")
        return result, feedback

    def apply_hit(self, session_id: str, payload: dict, ts_ms: int) -> tuple[BlockResult, list[dict]]:
        session = self.get_session(session_id)
        if session.phase is not Phase.PLAYING or session.active_map is None:
            raise ApiError(409, "no song in progress")
        index = payload["block_index"]
        if not 0 <= index < len(session.active_map.blocks):
            raise ApiError(422, f"block_index {index} outside 0..{len(session.active_map.blocks) - 1}")
        if index <= session.last_scored_index:
            raise ApiError(409, f"block {index} already scored or out of order")
        self._journal({"op": "hit", "session_id": session_id, "payload": payload, "ts_ms": ts_ms})
        feedback: list[dict] = []
        # Blocks skipped by the client can no longer be hit; they drain as misses.
        for skipped in range(session.last_scored_index + 1, index):
            _, fb = self._score_and_publish(session, skipped, None, ts_ms)
            feedback.extend(fb)
        hit = HitEvent(
            block_index=index,
            hit_time_s=payload["hit_time_s"],
            saber=ColorName(payload["saber"]),
            swing_speed_mps=payload["swing_speed_mps"],
            contact_height_cm=payload["contact_height_cm"],
        )
        result, fb = self._score_and_publish(session, index, hit, ts_ms)
        feedback.extend(fb)
        return result, feedback

    def complete_song(self, session_id: str, ordinal: int, completed_at: datetime | None = None) -> dict:
        session = self.get_session(session_id)
        completed_at = completed_at or self.clock()
        if session.phase is not Phase.PLAYING or session.active_map is None:
            raise ApiError(409, "no song in progress")
        if ordinal != session.current_ordinal:
            raise ApiError(409, f"active song is {session.current_ordinal}, not {ordinal}")
        self._journal(
            {"op": "complete_song", "session_id": session_id, "ordinal": ordinal, "at": completed_at.isoformat()}
        )
        ts_ms = int(completed_at.timestamp() * 1000)
        for skipped in range(session.last_scored_index + 1, len(session.active_map.blocks)):
            self._score_and_publish(session, skipped, None, ts_ms)
        results = [session.scored[i] for i in sorted(session.scored)]
        counts = accumulate(results)
        gs = game_score(counts)
        slot = session.schedule[ordinal - 1]
        record = SongRecord(
            participant_id=session.participant_id,
            session_ordinal=session.session_ordinal,
            song_id=slot.song_id,
            mode=slot.mode,
            level=session.level,
            counts=counts,
            gs=gs,
            completed_at=completed_at,
        )
        record_stored = True
        try:
            outcome = self.store.record_song(record)
            rank_change = (
                outcome.old_rank is not None and outcome.new_rank < outcome.old_rank
            ) or (outcome.old_rank is None)
            old_rank, new_rank = outcome.old_rank, outcome.new_rank
            if self.records_path is not None and not self._replaying:
                with open(self.records_path, "a", encoding="utf-8") as fh:
                    fh.write(outcome.record.to_json_line() + "\n")
        except DuplicateRecordError:
            # The participant already has a record for this (session, song),
            # e.g. the same training session was opened twice. The song still
            # completes, but standings keep the original record.
            record_stored = False
            rank_change = False
            old_rank = new_rank = self.store.rank_of(session.participant_id)

        summary = {"ordinal": ordinal, "counts": counts.to_dict(), "gs": gs}
        session.song_summaries.append(summary)
        session.completed_count = ordinal
        session.active_map = None
        session.scored = {}
        session.last_scored_index = -1
        if ordinal == SONGS_PER_SESSION:
            session.phase = Phase.DONE
        elif ordinal == BREAK_AFTER_SONG:
            session.phase = Phase.BREAK
            session.break_started_at = completed_at
        else:
            session.phase = Phase.IDLE
        self._publish(session, "SongComplete", {"ordinal": ordinal, "counts": counts.to_dict(), "gs": gs})
        if rank_change:
            self._publish(
                session,
                "RankChanged",
                {"participant_id": session.participant_id, "old_rank": old_rank, "new_rank": new_rank},
            )
        return {
            "ordinal": ordinal,
            "counts": counts.to_dict(),
            "gs": gs,
            "phase": session.phase.value,
            "rank": new_rank,
            "rank_changed": rank_change,
            "record_stored": record_stored,
        }

    def submit_test_result(
        self,
        participant_id: str,
        phase: str,
        kind: TestKind,
        plan_seed: int,
        responses: list[dict],
    ) -> TestSummaryRecord:
        plan = build_trial_plan(kind, plan_seed)
        by_index: dict[int, dict] = {}
        for resp in responses:
            idx = resp["trial_index"]
            if idx in by_index:
                raise ApiError(422, f"duplicate response for trial {idx}")
            if not 0 <= idx < len(plan.trials):
                raise ApiError(422, f"trial_index {idx} outside the plan")
            by_index[idx] = resp
        results = []
        for trial in plan.trials:
            resp = by_index.get(trial.index, {})
            try:
                results.append(score_response(trial, resp.get("key"), resp.get("rt_ms")))
            except ValueError as exc:
                raise ApiError(422, f"trial {trial.index}: {exc}") from exc
        summary = summarize_gonogo(results) if kind is TestKind.GO_NOGO else summarize_stroop(results)
        record = TestSummaryRecord(participant_id=participant_id, phase=phase, test_kind=kind, summary=summary)
        self.store.register_participant(participant_id)
        self.test_records.append(record)
        self.test_responses.append(
            {"participant_id": participant_id, "phase": phase, "test_kind": kind.value, "responses": responses}
        )
        self._journal(
            {
                "op": "test_result",
                "participant_id": participant_id,
                "phase": phase,
                "test_kind": kind.value,
                "plan_seed": plan_seed,
                "responses": responses,
            }
        )
        return record

    def today(self) -> date:
        return self.clock().astimezone(self.tz).date()


# -- request bodies ------------------------------------------------------


class BeatmapRequest(BaseModel):
    song_id: str
    level: Level
    mode: GameMode
    seed: int = Field(ge=0, lt=2**64)


class SessionRequest(BaseModel):
    participant_id: str
    session_ordinal: int
    seed: int | None = None


class HitRequest(BaseModel):
    block_index: int
    saber: ColorName
    swing_speed_mps: float = Field(ge=0)
    contact_height_cm: float
    hit_time_s: float
    client_mono_ms: float


class ResponseEntry(BaseModel):
    trial_index: int
    condition: str | None = None
    key: str | None = None
    rt_ms: float | None = None
    client_mono_ms: float | None = None


class TestResultRequest(BaseModel):
    participant_id: str
    phase: str = "pre"
    plan_seed: int
    responses: list[ResponseEntry]


class PlanRequest(BaseModel):
    seed: int = Field(ge=0, lt=2**64)


def create_app(
    data_dir: str | Path | None = None,
    *,
    clock: Callable[[], datetime] | None = None,
    catalog: tuple[Song, ...] | None = None,
    timezone: str = "UTC",
) -> FastAPI:
    engine = ServiceEngine(data_dir=data_dir, clock=clock, catalog=catalog, timezone=timezone)
    app = FastAPI(title="stroopsaber", version="0.1.0")
    app.state.engine = engine

    def fail(exc: ApiError) -> HTTPException:
        return HTTPException(status_code=exc.status, detail={"violations": exc.violations})

    @app.get("/songs")
    async def list_songs() -> dict:
        return {"songs": [song_to_dict(s) for s in engine.catalog.values()]}

    @app.post("/beatmaps")
    async def make_beatmap(req: BeatmapRequest) -> Response:
        song = engine.catalog.get(req.song_id)
        if song is None:
            raise HTTPException(404, detail={"violations": [f"unknown song {req.song_id!r}"]})
        beatmap = generate_beatmap(song, req.level, req.mode, req.seed)
        return Response(content=beatmap_to_json(beatmap), media_type="application/json")

    @app.post("/sessions")
    async def create_session(req: SessionRequest) -> dict:
        seed = req.seed
        if seed is None:
            seed = random.Random(f"{req.participant_id}:{req.session_ordinal}").getrandbits(32)
        try:
            session = engine.create_session(req.participant_id, req.session_ordinal, seed)
        except ApiError as exc:
            raise fail(exc)
        return {
            "session_id": session.session_id,
            "participant_id": session.participant_id,
            "session_ordinal": session.session_ordinal,
            "level": session.level.value,
            "break_after": BREAK_AFTER_SONG,
            "songs": [
                {"ordinal": s.ordinal, "song_id": s.song_id, "mode": s.mode.value, "seed": s.seed}
                for s in session.schedule
            ],
        }

    @app.get("/sessions/{session_id}")
    async def session_state(session_id: str) -> dict:
        try:
            session = engine.get_session(session_id)
        except ApiError as exc:
            raise fail(exc)
        return {
            "session_id": session.session_id,
            "participant_id": session.participant_id,
            "phase": session.phase.value,
            "completed_songs": session.completed_count,
            "current_ordinal": session.current_ordinal,
            "counts": session.running_counts().to_dict(),
            "streak_run": session.streak.run,
            "songs": [s["ordinal"] for s in session.song_summaries],
        }

    @app.post("/sessions/{session_id}/songs/{ordinal}/start")
    async def start_song(session_id: str, ordinal: int) -> dict:
        try:
            beatmap, advisory = engine.start_song(session_id, ordinal)
        except ApiError as exc:
            raise fail(exc)
        body = {"ordinal": ordinal, "beatmap": beatmap_to_dict(beatmap)}
        if advisory:
            body["advisory"] = advisory
        return body

    @app.post("/sessions/{session_id}/hits")
    async def post_hit(session_id: str, req: HitRequest) -> dict:
        ts_ms = int(engine.clock().timestamp() * 1000)
        try:
            result, feedback = engine.apply_hit(session_id, req.model_dump(), ts_ms)
        except ApiError as exc:
            raise fail(exc)
        return {
            "result": {
                "block_index": result.block_index,
                "outcome": result.outcome.value,
                "points": result.points,
            },
            "feedback": feedback,
        }

    @app.post("/sessions/{session_id}/songs/{ordinal}/complete")
    async def complete_song(session_id: str, ordinal: int) -> dict:
        try:
            return engine.complete_song(session_id, ordinal)
        except ApiError as exc:
            raise fail(exc)

    @app.get("/leaderboard")
    async def leaderboard(date_param: str | None = Query(default=None, alias="date")) -> dict:
        if date_param is not None:
            try:
                day = date.fromisoformat(date_param)
            except ValueError:
                raise HTTPException(422, detail={"violations": ["date must be YYYY-MM-DD"]})
        else:
            day = engine.today()
        entries = [
            {
                "participant_id": e.participant_id,
                "best_gs": e.best_gs,
                "achieved_at": e.achieved_at.isoformat(),
            }
            for e in engine.store.leaderboard()
        ]
        return {"date": day.isoformat(), "entries": entries, "daily_champion": engine.store.daily_champion(day)}

    @app.get("/players/{participant_id}/records")
    async def player_records(participant_id: str) -> dict:
        if participant_id not in engine.store.participants():
            raise HTTPException(404, detail={"violations": [f"unknown participant {participant_id!r}"]})
        return {
            "participant_id": participant_id,
            "records": [json.loads(r.to_json_line()) for r in engine.store.records_for(participant_id)],
        }

    @app.get("/plans/{participant_id}")
    async def training_plan(participant_id: str) -> dict:
        plan = build_training_plan(participant_id)
        return {
            "participant_id": plan.participant_id,
            "calendar_window_weeks": plan.calendar_window_weeks,
            "sessions": [
                {
                    "ordinal": s.ordinal,
                    "level": s.level.value,
                    "song_count": s.song_count,
                    "break_after": s.break_after,
                }
                for s in plan.sessions
            ],
        }

    @app.post("/tests/{kind}/plans")
    async def test_plan(kind: TestKind, req: PlanRequest) -> dict:
        return plan_to_dict(build_trial_plan(kind, req.seed))

    @app.post("/tests/{kind}/results")
    async def test_results(kind: TestKind, req: TestResultRequest) -> dict:
        try:
            record = engine.submit_test_result(
                req.participant_id,
                req.phase,
                kind,
                req.plan_seed,
                [r.model_dump() for r in req.responses],
            )
        except ApiError as exc:
            raise fail(exc)
        except ValueError as exc:
            raise HTTPException(422, detail={"violations": [str(exc)]})
        return {"stored": True, "summary": record.summary.to_dict()}

    @app.get("/analysis/export.csv")
    async def export_csv() -> Response:
        buf = io.StringIO()
        engine.store.export_csv(buf)
        return Response(content=buf.getvalue(), media_type="text/csv")

    @app.get("/analysis/tests.csv")
    async def export_tests_csv() -> Response:
        buf = io.StringIO()
        write_summary_csv(engine.test_records, buf)
        return Response(content=buf.getvalue(), media_type="text/csv")

    @app.get("/analysis/anova")
    async def anova(design: str = Query(default="oneway")) -> dict:
        try:
            return analysis.analyze_records(engine.store.all_records(), design)
        except ValueError as exc:
            raise HTTPException(422, detail={"violations": [str(exc)]})

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str, cursor: int = 0) -> None:
        await websocket.accept()
        session = engine.sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        queue: asyncio.Queue = asyncio.Queue()
        engine.subscribe(session_id, queue)
        last_seq = cursor - 1
        try:
            for event in list(session.events)[cursor:]:
                await websocket.send_json(event)
                last_seq = event["seq"]
            while True:
                event = await queue.get()
                if event["seq"] <= last_seq:
                    continue
                await websocket.send_json(event)
                last_seq = event["seq"]
        except WebSocketDisconnect:
            pass
        finally:
            engine.unsubscribe(session_id, queue)

    return app
