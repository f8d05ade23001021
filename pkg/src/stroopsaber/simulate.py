"""Parameterized synthetic players for headless calibration runs.

A player samples a lognormal reaction time per block; responses slower than the
level's flight-window ceiling are misses, otherwise the swing lands as the
block crosses the hit plane and is classified by the scoring engine. Everything
is deterministic in (model seed, map seed).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .beatmap import BeatMap, Song, default_song_catalog, generate_beatmap
from .core import GameMode, Level, ReactionProfile, correct_answer, difficulty_params
from .scoring import (
    DEFAULT_THRESHOLDS,
    BlockResult,
    HitEvent,
    ScoreThresholds,
    SessionCounts,
    accumulate,
    game_score,
    score_block,
)
from .stats import norm_cdf

#: Anticipated per-level outcome windows used for calibration sign-off.
COR_RATE_WINDOW = (0.60, 0.90)
GREAT_RATE_WINDOW = (0.30, 0.70)

#: Accuracy decrement on incongruent blocks, per level.
DEFAULT_INCON_PENALTY: Mapping[Level, float] = {
    Level.EASY: 0.10,
    Level.NORMAL: 0.14,
    Level.HARD: 0.18,
}

# Central-mass z span used to fit the lognormal spread from a reaction profile.
_Z_95 = 1.959963984540054


def _fit_sigma(profile: ReactionProfile) -> float:
    return math.log(profile.max_rt_ms / profile.min_rt_ms) / (2.0 * _Z_95)


@dataclass(frozen=True)
class PlayerModel:
    """Behavioral knobs for one synthetic player. Defaults are tuned so the
    stock population lands inside the calibration windows; they are
    configuration, not claims about humans."""

    seed: int
    rt_mean_ms: float = 756.0
    #: Lognormal shape; default fitted so the profile's min..max span covers
    #: the central 95% of the reaction-time mass.
    rt_sigma: float = _fit_sigma(ReactionProfile())
    base_accuracy: float = 0.90
    incongruency_penalty: Mapping[Level, float] = field(
        default_factory=lambda: dict(DEFAULT_INCON_PENALTY)
    )
    speed_ability: float = 0.50
    zone_ability: float = 0.50
    min_rt_ms: float = 150.0

    def __post_init__(self) -> None:
        for name in ("base_accuracy", "speed_ability", "zone_ability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        for level, penalty in self.incongruency_penalty.items():
            if not 0.0 <= penalty <= 1.0:
                raise ValueError(f"incongruency_penalty[{level}] must be in [0, 1]")

    @property
    def rt_mu(self) -> float:
        """ln-space location giving the requested mean reaction time."""
        return math.log(self.rt_mean_ms) - self.rt_sigma**2 / 2.0

    def penalty_for(self, level: Level) -> float:
        return self.incongruency_penalty.get(level, 0.0)

    def correct_probability(self, level: Level, congruent: bool) -> float:
        p = self.base_accuracy - (0.0 if congruent else self.penalty_for(level))
        return min(1.0, max(0.0, p))

    @classmethod
    def from_reaction_profile(cls, profile: ReactionProfile, seed: int, **overrides) -> "PlayerModel":
        return cls(seed=seed, rt_mean_ms=profile.mean_rt_ms, rt_sigma=_fit_sigma(profile), **overrides)


def hit_probability(model: PlayerModel, rt_ceiling_ms: float) -> float:
    """Closed-form probability that a sampled reaction beats the ceiling.

    The anticipation floor clamps slow-side mass only, so the lognormal CDF is
    exact for any ceiling at or above the floor.
    """
    if rt_ceiling_ms <= model.min_rt_ms:
        return 0.0
    return norm_cdf((math.log(rt_ceiling_ms) - model.rt_mu) / model.rt_sigma)


def expected_rates(model: PlayerModel, beatmap: BeatMap) -> dict[str, float]:
    """Analytic per-map expectations of the outcome rates under the model."""
    params = difficulty_params(beatmap.level)
    p_hit = hit_probability(model, params.flight_max_s * 1000.0)
    p_bonus = 1.0 - (1.0 - model.speed_ability) * (1.0 - model.zone_ability)
    cor = fault = great = 0.0
    for block in beatmap.blocks:
        p_correct = model.correct_probability(beatmap.level, block.stimulus.congruent)
        cor += p_hit * p_correct
        fault += p_hit * (1.0 - p_correct)
        great += p_hit * p_correct * p_bonus
    n = len(beatmap.blocks)
    return {
        "cor": cor / n,
        "fault": fault / n,
        "miss": 1.0 - (cor + fault) / n,
        "great": great / n,
    }


@dataclass(frozen=True)
class SimulatedPlay:
    results: tuple[BlockResult, ...]
    hits: tuple[Optional[HitEvent], ...]
    counts: SessionCounts
    gs: float


def _play_rng(model: PlayerModel, beatmap: BeatMap) -> random.Random:
    return random.Random(f"{model.seed}:{beatmap.seed}:{beatmap.song_id}:{beatmap.level.value}")


def simulate_song(
    model: PlayerModel,
    beatmap: BeatMap,
    thresholds: ScoreThresholds = DEFAULT_THRESHOLDS,
) -> SimulatedPlay:
    """Play one map headlessly and classify every block through the scoring engine.

    A reaction slower than the level's flight ceiling leaves the block unhit;
    otherwise the contact lands at the hit plane with the correct saber with
    the model's accuracy, earning each bonus with its ability probability.
    """
    params = difficulty_params(beatmap.level)
    rng = _play_rng(model, beatmap)
    rt_cap_ms = params.flight_max_s * 1000.0

    results: list[BlockResult] = []
    hits: list[Optional[HitEvent]] = []
    for block in beatmap.blocks:
        rt_ms = max(model.min_rt_ms, rng.lognormvariate(model.rt_mu, model.rt_sigma))
        roll_correct = rng.random()
        roll_speed = rng.random()
        roll_zone = rng.random()
        if rt_ms > rt_cap_ms:
            hit = None
        else:
            answer = correct_answer(block.stimulus, block.mode)
            p_correct = model.correct_probability(beatmap.level, block.stimulus.congruent)
            saber = answer if roll_correct < p_correct else answer.other()
            fast = roll_speed < model.speed_ability
            in_zone = roll_zone < model.zone_ability
            hit = HitEvent(
                block_index=block.index,
                hit_time_s=block.spawn_time_s + block.flight_time_s,
                saber=saber,
                swing_speed_mps=thresholds.speed_min_mps * (1.5 if fast else 0.5),
                contact_height_cm=block.target_height_cm
                + (0.0 if in_zone else 2.0 * thresholds.zone_half_width_cm),
            )
        hits.append(hit)
        results.append(score_block(block, hit, thresholds))
    counts = accumulate(results)
    return SimulatedPlay(results=tuple(results), hits=tuple(hits), counts=counts, gs=game_score(counts))


def default_population(size: int = 12, seed: int = 2024) -> list[PlayerModel]:
    rng = random.Random(seed)
    return [PlayerModel(seed=rng.getrandbits(32)) for _ in range(size)]


def _mode_for(index: int) -> GameMode:
    return GameMode.COLOR if index % 2 == 0 else GameMode.WORD


@dataclass(frozen=True)
class LevelCalibration:
    level: Level
    cor_rate: float
    great_rate: float
    mean_gs: float
    blocks: int
    cor_in_window: bool
    great_in_window: bool

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "cor_rate": self.cor_rate,
            "great_rate": self.great_rate,
            "mean_gs": self.mean_gs,
            "blocks": self.blocks,
            "cor_in_window": self.cor_in_window,
            "great_in_window": self.great_in_window,
        }


@dataclass(frozen=True)
class CalibrationReport:
    levels: tuple[LevelCalibration, ...]
    cor_window: tuple[float, float] = COR_RATE_WINDOW
    great_window: tuple[float, float] = GREAT_RATE_WINDOW

    @property
    def all_inside(self) -> bool:
        return all(lc.cor_in_window and lc.great_in_window for lc in self.levels)

    def to_dict(self) -> dict:
        return {
            "cor_window": list(self.cor_window),
            "great_window": list(self.great_window),
            "all_inside": self.all_inside,
            "levels": [lc.to_dict() for lc in self.levels],
        }


def _level_stats(
    population: Sequence[PlayerModel],
    songs: Sequence[Song],
    level: Level,
    seed: int,
) -> tuple[float, float, float, int]:
    cor = great = total = 0
    gs_values = []
    for s_idx, song in enumerate(songs):
        beatmap = generate_beatmap(song, level, _mode_for(s_idx), seed + s_idx)
        for model in population:
            play = simulate_song(model, beatmap)
            cor += play.counts.cor
            great += play.counts.great
            total += play.counts.total
            gs_values.append(play.gs)
    return cor / total, great / total, sum(gs_values) / len(gs_values), total


def calibration_report(
    population: Sequence[PlayerModel],
    songs_by_level: Mapping[Level, Sequence[Song]] | None = None,
    levels: Sequence[Level] = tuple(Level),
    seed: int = 7,
) -> CalibrationReport:
    """Aggregate simulated outcome rates per level and flag window membership."""
    if not population:
        raise ValueError("population must not be empty")
    stats = []
    for l_idx, level in enumerate(levels):
        songs = _songs_for(songs_by_level, level)
        cor_rate, great_rate, mean_gs, total = _level_stats(population, songs, level, seed + 1000 * l_idx)
        stats.append(
            LevelCalibration(
                level=level,
                cor_rate=cor_rate,
                great_rate=great_rate,
                mean_gs=mean_gs,
                blocks=total,
                cor_in_window=COR_RATE_WINDOW[0] <= cor_rate <= COR_RATE_WINDOW[1],
                great_in_window=GREAT_RATE_WINDOW[0] <= great_rate <= GREAT_RATE_WINDOW[1],
            )
        )
    return CalibrationReport(levels=tuple(stats))


def _songs_for(songs_by_level: Mapping[Level, Sequence[Song]] | None, level: Level) -> Sequence[Song]:
    if songs_by_level is not None and level in songs_by_level:
        songs = songs_by_level[level]
        if not songs:
            raise ValueError(f"no songs supplied for level {level.value}")
        return songs
    return default_song_catalog()[:4]


@dataclass(frozen=True)
class OrderingCheck:
    mean_gs: Mapping[Level, float]
    margin: float
    easy_above_normal: bool
    easy_above_hard: bool

    def to_dict(self) -> dict:
        return {
            "mean_gs": {level.value: gs for level, gs in self.mean_gs.items()},
            "margin": self.margin,
            "easy_above_normal": self.easy_above_normal,
            "easy_above_hard": self.easy_above_hard,
        }


def difficulty_ordering_check(
    population: Sequence[PlayerModel],
    songs_by_level: Mapping[Level, Sequence[Song]] | None = None,
    seed: int = 7,
    margin: float = 0.05,
) -> OrderingCheck:
    """Flag whether mean simulated game score on easy clearly exceeds the other
    levels. Differences within ``margin`` are treated as noise, not ordering."""
    report = calibration_report(population, songs_by_level, tuple(Level), seed)
    means = {lc.level: lc.mean_gs for lc in report.levels}
    return OrderingCheck(
        mean_gs=means,
        margin=margin,
        easy_above_normal=means[Level.EASY] - means[Level.NORMAL] > margin,
        easy_above_hard=means[Level.EASY] - means[Level.HARD] > margin,
    )
