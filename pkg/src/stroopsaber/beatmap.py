"""Seeded, deterministic block-schedule generation on a song's beat grid.

The generator places blocks on a constant musical stride (whole or half beats),
picks per-block flight times from an interval derived jointly from the level's
flight window and spacing window, and assigns congruency so the incongruent
fraction lands inside the level window. Identical inputs give bit-identical
output.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    ColorName,
    DifficultyParams,
    GameMode,
    Level,
    Stimulus,
    difficulty_params,
)


class Channel(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class BeatmapGenerationError(ValueError):
    """Raised when no schedule can satisfy the level constraints; names the constraint."""


@dataclass(frozen=True)
class Song:
    id: str
    title: str
    bpm: float
    duration_s: float
    beat_offset_s: float = 0.0

    def __post_init__(self) -> None:
        if self.bpm <= 0:
            raise ValueError("bpm must be positive")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if not 0 <= self.beat_offset_s < 60.0 / self.bpm:
            raise ValueError("beat_offset_s must lie inside the first beat interval")

    @property
    def beat_interval_s(self) -> float:
        return 60.0 / self.bpm


@dataclass(frozen=True)
class Block:
    index: int
    spawn_time_s: float
    channel: Channel
    stimulus: Stimulus
    flight_time_s: float
    target_height_cm: float
    mode: GameMode


@dataclass(frozen=True)
class BeatMap:
    song_id: str
    level: Level
    mode: GameMode
    seed: int
    channel_length_m: float
    blocks: tuple[Block, ...]

    def incongruent_fraction(self) -> float:
        if not self.blocks:
            return 0.0
        return sum(1 for b in self.blocks if not b.stimulus.congruent) / len(self.blocks)


@dataclass(frozen=True)
class GeneratorConfig:
    """Geometry and placement knobs; all deterministic inputs to generation."""

    channel_length_m: float = 0.4
    target_height_min_cm: float = 90.0
    target_height_max_cm: float = 140.0
    lead_in_s: float = 1.0
    easy_flight_ceiling_s: float = 2.5
    #: "coin" = independent fair coin per block, "alternate" = strict L/R alternation,
    #: "auto" = coin on easy, alternation elsewhere (two-sided spacing windows
    #: require a constant same-channel spawn interval).
    channel_policy: str = "auto"
    #: Candidate spawn strides in beats, tried in order per level.
    strides_easy: tuple[float, ...] = (2, 3, 4, 6, 8)
    strides_normal: tuple[float, ...] = (1, 1.5, 2, 3)
    strides_hard: tuple[float, ...] = (0.5, 1, 1.5, 2)
    #: Probability of keeping each grid slot where the spacing window is
    #: one-sided (easy); the seeded drops vary spawn placement per seed.
    #: Two-sided windows need a constant spawn interval, so drops are
    #: disabled there.
    easy_keep_probability: float = 0.9


DEFAULT_GENERATOR_CONFIG = GeneratorConfig()

MIN_BLOCKS = 8

# Keeps sampled values strictly inside half-open windows so validation is exact.
_EDGE_MARGIN = 1e-6


def _strides_for(level: Level, config: GeneratorConfig) -> tuple[float, ...]:
    if level is Level.EASY:
        return config.strides_easy
    if level is Level.NORMAL:
        return config.strides_normal
    return config.strides_hard


def _channel_policy(level: Level, config: GeneratorConfig) -> str:
    if config.channel_policy != "auto":
        return config.channel_policy
    return "coin" if level is Level.EASY else "alternate"


def _flight_interval(
    params: DifficultyParams, stride_s: float, same_channel_factor: int, length_m: float
) -> tuple[float, float] | None:
    """Flight-time interval under which every same-channel gap lands in the spacing window.

    The spatial gap between same-channel neighbours is ``100 * length_m *
    dt / flight`` cm, evaluated with the trailing block's flight time, where
    ``dt`` is their spawn interval (``same_channel_factor * stride_s`` in the
    tightest case).
    """
    dt = same_channel_factor * stride_s
    lo = params.flight_min_s
    hi = params.flight_max_s
    # gap >= min_spacing  =>  flight <= 100*L*dt/min_spacing
    hi = min(hi, 100.0 * length_m * dt / params.min_spacing_cm)
    if params.max_spacing_cm is not None:
        # gap <= max_spacing  =>  flight >= 100*L*dt/max_spacing
        lo = max(lo, 100.0 * length_m * dt / params.max_spacing_cm)
    lo += _EDGE_MARGIN
    hi -= _EDGE_MARGIN
    if hi - lo < 1e-4:
        return None
    return lo, hi


def _incongruent_count_range(n: int, params: DifficultyParams) -> tuple[int, int]:
    lo = math.ceil(params.incon_min * n - 1e-9)
    hi = math.floor(params.incon_max * n + 1e-9)
    return lo, hi


def generate_beatmap(
    song: Song,
    level: Level | str,
    mode: GameMode | str,
    seed: int,
    config: GeneratorConfig = DEFAULT_GENERATOR_CONFIG,
) -> BeatMap:
    """Generate a block schedule satisfying the level's difficulty contract.

    Raises BeatmapGenerationError naming the violated constraint when the song
    cannot host at least MIN_BLOCKS blocks under the windows.
    """
    level = Level(level)
    mode = GameMode(mode)
    params = difficulty_params(level, config.easy_flight_ceiling_s)
    policy = _channel_policy(level, config)
    same_channel_factor = 1 if policy == "coin" else 2

    beat = song.beat_interval_s
    chosen: tuple[float, tuple[float, float]] | None = None
    for stride in _strides_for(level, config):
        interval = _flight_interval(params, stride * beat, same_channel_factor, config.channel_length_m)
        if interval is not None:
            chosen = (stride, interval)
            break
    if chosen is None:
        raise BeatmapGenerationError(
            f"spacing: no flight window inside [{params.flight_min_s}, {params.flight_max_s}] s "
            f"satisfies the {params.min_spacing_cm}-{params.max_spacing_cm} cm spacing window "
            f"at {song.bpm} bpm for level {level.value}"
        )
    stride, (flight_lo, flight_hi) = chosen

    # Spawn grid in half-beat units to keep stride arithmetic exact.
    half = beat / 2.0
    step = round(stride * 2)
    n0 = 0
    while song.beat_offset_s + n0 * half < config.lead_in_s:
        n0 += step
    spawn_units = []
    n = n0
    while song.beat_offset_s + n * half + flight_hi + _EDGE_MARGIN <= song.duration_s:
        spawn_units.append(n)
        n += step
    if len(spawn_units) < MIN_BLOCKS:
        raise BeatmapGenerationError(
            f"duration: song {song.id!r} fits only {len(spawn_units)} blocks "
            f"(minimum {MIN_BLOCKS}) at {stride} beats per block"
        )

    rng = random.Random(seed)

    if params.max_spacing_cm is None and config.easy_keep_probability < 1.0:
        kept = [u for u in spawn_units if rng.random() < config.easy_keep_probability]
        if len(kept) >= MIN_BLOCKS:
            spawn_units = kept

    count = len(spawn_units)
    lo_c, hi_c = _incongruent_count_range(count, params)
    if lo_c > hi_c or hi_c < 0 or lo_c > count:
        raise BeatmapGenerationError(
            f"proportion: no incongruent count for {count} blocks lies in "
            f"[{params.incon_min}, {params.incon_max}]"
        )

    if policy == "coin":
        channels = [rng.choice((Channel.LEFT, Channel.RIGHT)) for _ in range(count)]
    else:
        first = rng.choice((Channel.LEFT, Channel.RIGHT))
        second = Channel.RIGHT if first is Channel.LEFT else Channel.LEFT
        channels = [first if i % 2 == 0 else second for i in range(count)]

    incon_count = rng.randint(lo_c, hi_c)
    incon_positions = set(rng.sample(range(count), incon_count))

    blocks = []
    for i, units in enumerate(spawn_units):
        spawn = song.beat_offset_s + units * half
        base = rng.choice((ColorName.RED, ColorName.BLUE))
        if i in incon_positions:
            stimulus = Stimulus(word=base, ink=base.other())
        else:
            stimulus = Stimulus(word=base, ink=base)
        flight = rng.uniform(flight_lo, flight_hi)
        height = rng.uniform(config.target_height_min_cm, config.target_height_max_cm)
        blocks.append(
            Block(
                index=i,
                spawn_time_s=spawn,
                channel=channels[i],
                stimulus=stimulus,
                flight_time_s=flight,
                target_height_cm=height,
                mode=mode,
            )
        )

    return BeatMap(
        song_id=song.id,
        level=level,
        mode=mode,
        seed=seed,
        channel_length_m=config.channel_length_m,
        blocks=tuple(blocks),
    )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a map against a difficulty contract; never raises."""

    violations: tuple[str, ...]
    #: Smallest spatial gap between spawn-adjacent blocks on opposite channels,
    #: reported for inspection but not enforced.
    cross_channel_min_gap_cm: float | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def _gap_cm(length_m: float, dt: float, trailing_flight_s: float) -> float:
    return 100.0 * length_m * dt / trailing_flight_s


def validate_beatmap(
    beatmap: BeatMap,
    params: DifficultyParams,
    duration_s: float | None = None,
) -> ValidationReport:
    """List every constraint the map violates: ordering, flight window,
    proportion, same-channel spacing, and duration (when known)."""
    violations: list[str] = []
    blocks = beatmap.blocks
    strict = params.lower_bounds_exclusive

    for prev, cur in zip(blocks, blocks[1:]):
        if not prev.spawn_time_s < cur.spawn_time_s:
            violations.append(
                f"ordering: block {cur.index} spawn {cur.spawn_time_s:.4f}s does not "
                f"follow block {prev.index} at {prev.spawn_time_s:.4f}s"
            )

    for b in blocks:
        low_ok = b.flight_time_s > params.flight_min_s if strict else b.flight_time_s >= params.flight_min_s
        if not (low_ok and b.flight_time_s <= params.flight_max_s):
            violations.append(
                f"flight_window: block {b.index} flight {b.flight_time_s:.4f}s outside "
                f"[{params.flight_min_s}, {params.flight_max_s}]s"
            )
        if duration_s is not None and b.spawn_time_s + b.flight_time_s > duration_s:
            violations.append(
                f"duration: block {b.index} arrives at "
                f"{b.spawn_time_s + b.flight_time_s:.4f}s past song end {duration_s:.4f}s"
            )

    if blocks:
        n = len(blocks)
        incon = sum(1 for b in blocks if not b.stimulus.congruent)
        lo_c, hi_c = _incongruent_count_range(n, params)
        if not lo_c <= incon <= hi_c:
            violations.append(
                f"proportion: {incon}/{n} incongruent blocks ({incon / n:.3f}) outside "
                f"[{params.incon_min}, {params.incon_max}]"
            )

    last_on: dict[Channel, Block] = {}
    cross_min: float | None = None
    for prev, cur in zip(blocks, blocks[1:]):
        if prev.channel != cur.channel:
            gap = _gap_cm(beatmap.channel_length_m, cur.spawn_time_s - prev.spawn_time_s, cur.flight_time_s)
            cross_min = gap if cross_min is None else min(cross_min, gap)
    for b in blocks:
        prev = last_on.get(b.channel)
        if prev is not None:
            gap = _gap_cm(beatmap.channel_length_m, b.spawn_time_s - prev.spawn_time_s, b.flight_time_s)
            low_ok = gap > params.min_spacing_cm if strict else gap >= params.min_spacing_cm
            high_ok = params.max_spacing_cm is None or gap <= params.max_spacing_cm
            if not (low_ok and high_ok):
                upper = "open" if params.max_spacing_cm is None else f"{params.max_spacing_cm}"
                violations.append(
                    f"spacing: blocks {prev.index}->{b.index} on {b.channel.value} gap "
                    f"{gap:.2f}cm outside [{params.min_spacing_cm}, {upper}]cm"
                )
        last_on[b.channel] = b

    return ValidationReport(violations=tuple(violations), cross_channel_min_gap_cm=cross_min)


class ModePattern(str, Enum):
    AABB = "aabb"
    ABAB = "abab"
    RANDOM = "random"
    FIXED = "fixed"


@dataclass(frozen=True)
class ModeSchedule:
    pattern: ModePattern
    seed: int
    songs_per_session: int
    modes: tuple[GameMode, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.modes) != self.songs_per_session:
            raise ValueError("schedule length must equal songs_per_session")


def build_mode_schedule(
    pattern: ModePattern | str,
    songs_per_session: int,
    seed: int = 0,
    fixed_mode: GameMode | str | None = None,
) -> ModeSchedule:
    """Per-song game modes for one session. Random draws are seed-deterministic."""
    pattern = ModePattern(pattern)
    if songs_per_session < 1:
        raise ValueError("songs_per_session must be >= 1")
    if pattern is ModePattern.AABB:
        cycle = (GameMode.COLOR, GameMode.COLOR, GameMode.WORD, GameMode.WORD)
        modes = tuple(cycle[i % 4] for i in range(songs_per_session))
    elif pattern is ModePattern.ABAB:
        modes = tuple(GameMode.COLOR if i % 2 == 0 else GameMode.WORD for i in range(songs_per_session))
    elif pattern is ModePattern.RANDOM:
        rng = random.Random(seed)
        modes = tuple(rng.choice((GameMode.COLOR, GameMode.WORD)) for _ in range(songs_per_session))
    else:
        if fixed_mode is None:
            raise ValueError("fixed pattern requires fixed_mode")
        modes = (GameMode(fixed_mode),) * songs_per_session
    return ModeSchedule(pattern=pattern, seed=seed, songs_per_session=songs_per_session, modes=modes)


# --- serialization -----------------------------------------------------------
# Field order below is fixed; exports of the same map must be byte-identical.


def beatmap_to_dict(beatmap: BeatMap) -> dict:
    return {
        "song_id": beatmap.song_id,
        "level": beatmap.level.value,
        "mode": beatmap.mode.value,
        "seed": beatmap.seed,
        "channel_length_m": beatmap.channel_length_m,
        "blocks": [
            {
                "index": b.index,
                "spawn_time_s": b.spawn_time_s,
                "channel": b.channel.value,
                "word": b.stimulus.word.value,
                "ink": b.stimulus.ink.value,
                "flight_time_s": b.flight_time_s,
                "target_height_cm": b.target_height_cm,
            }
            for b in beatmap.blocks
        ],
    }


def beatmap_to_json(beatmap: BeatMap) -> str:
    return json.dumps(beatmap_to_dict(beatmap), separators=(",", ":"))


def beatmap_from_dict(data: dict) -> BeatMap:
    mode = GameMode(data["mode"])
    blocks = tuple(
        Block(
            index=b["index"],
            spawn_time_s=b["spawn_time_s"],
            channel=Channel(b["channel"]),
            stimulus=Stimulus(word=ColorName(b["word"]), ink=ColorName(b["ink"])),
            flight_time_s=b["flight_time_s"],
            target_height_cm=b["target_height_cm"],
            mode=mode,
        )
        for b in data["blocks"]
    )
    return BeatMap(
        song_id=data["song_id"],
        level=Level(data["level"]),
        mode=mode,
        seed=data["seed"],
        channel_length_m=data["channel_length_m"],
        blocks=blocks,
    )


def beatmap_from_json(text: str) -> BeatMap:
    return beatmap_from_dict(json.loads(text))


def song_to_dict(song: Song) -> dict:
    return {
        "id": song.id,
        "title": song.title,
        "bpm": song.bpm,
        "duration_s": song.duration_s,
        "beat_offset_s": song.beat_offset_s,
    }


def song_from_dict(data: dict) -> Song:
    return Song(
        id=data["id"],
        title=data["title"],
        bpm=data["bpm"],
        duration_s=data["duration_s"],
        beat_offset_s=data.get("beat_offset_s", 0.0),
    )


def load_song_manifest(path: str | Path) -> list[Song]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [song_from_dict(item) for item in data]


def dump_song_manifest(songs: Iterable[Song], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([song_to_dict(s) for s in songs], fh, indent=2)
        fh.write("\n")


def default_song_catalog() -> tuple[Song, ...]:
    """Built-in rotation of placeholder songs spanning the supported tempo range."""
    specs: Sequence[tuple[str, str, float, float, float]] = (
        ("s01", "Morning Stroll", 66.0, 168.0, 0.40),
        ("s02", "Tea House Waltz", 72.0, 180.0, 0.25),
        ("s03", "Garden Swing", 80.0, 172.0, 0.30),
        ("s04", "River Crossing", 88.0, 190.0, 0.10),
        ("s05", "Paper Lanterns", 92.0, 176.0, 0.55),
        ("s06", "Market Day", 96.0, 184.0, 0.00),
        ("s07", "Red Kite", 104.0, 168.0, 0.35),
        ("s08", "Blue Harbor", 110.0, 180.0, 0.20),
        ("s09", "Night Train", 116.0, 172.0, 0.45),
        ("s10", "Festival Drums", 124.0, 188.0, 0.15),
        ("s11", "Spring Sprint", 132.0, 176.0, 0.30),
        ("s12", "Thunder Steps", 140.0, 170.0, 0.05),
    )
    return tuple(Song(id=i, title=t, bpm=b, duration_s=d, beat_offset_s=o) for i, t, b, d, o in specs)
