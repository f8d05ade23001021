"""Shared domain vocabulary: stimuli, game modes, difficulty windows, reaction profiles."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ColorName(str, Enum):
    RED = "red"
    BLUE = "blue"

    def other(self) -> "ColorName":
        return ColorName.BLUE if self is ColorName.RED else ColorName.RED


class GameMode(str, Enum):
    """COLOR: answer with the ink, white background. WORD: answer with the word, black background."""

    COLOR = "color"
    WORD = "word"

    @property
    def background(self) -> str:
        return "white" if self is GameMode.COLOR else "black"


class Level(str, Enum):
    EASY = "easy"
    NORMAL = "normal"
    HARD = "hard"


@dataclass(frozen=True)
class Stimulus:
    """A color word drawn in some ink. Congruent when word and ink agree."""

    word: ColorName
    ink: ColorName

    @property
    def congruent(self) -> bool:
        return self.word == self.ink


#: The full stimulus set: two congruent, two incongruent.
ALL_STIMULI: tuple[Stimulus, ...] = (
    Stimulus(ColorName.RED, ColorName.RED),
    Stimulus(ColorName.BLUE, ColorName.BLUE),
    Stimulus(ColorName.RED, ColorName.BLUE),
    Stimulus(ColorName.BLUE, ColorName.RED),
)


def correct_answer(stimulus: Stimulus, mode: GameMode) -> ColorName:
    """Saber color that scores on this stimulus: the ink in color mode, the word in word mode."""
    return stimulus.ink if mode is GameMode.COLOR else stimulus.word


#: Easy flight times are open-ended above 1.5 s; this caps sampling.
DEFAULT_EASY_FLIGHT_CEILING_S = 2.5


@dataclass(frozen=True)
class DifficultyParams:
    """Per-level generation windows.

    ``max_spacing_cm`` is None for easy (spacing open-ended above the minimum);
    easy's spacing and flight lower bounds are exclusive, the rest inclusive.
    """

    level: Level
    incon_min: float
    incon_max: float
    min_spacing_cm: float
    max_spacing_cm: float | None
    flight_min_s: float
    flight_max_s: float

    def __post_init__(self) -> None:
        if not self.incon_min < self.incon_max:
            raise ValueError("incon_min must be < incon_max")
        if not self.flight_min_s < self.flight_max_s:
            raise ValueError("flight_min_s must be < flight_max_s")
        if self.max_spacing_cm is not None and not self.min_spacing_cm < self.max_spacing_cm:
            raise ValueError("min_spacing_cm must be < max_spacing_cm")

    @property
    def lower_bounds_exclusive(self) -> bool:
        """Easy's flight (>1.5 s) and spacing (>60 cm) minima are strict."""
        return self.level is Level.EASY


def difficulty_params(
    level: Level | str,
    easy_flight_ceiling_s: float = DEFAULT_EASY_FLIGHT_CEILING_S,
) -> DifficultyParams:
    """Return the parameter windows for a difficulty level.

    Raises ValueError for unknown levels.
    """
    lvl = Level(level)
    if lvl is Level.EASY:
        return DifficultyParams(lvl, 0.20, 0.30, 60.0, None, 1.5, easy_flight_ceiling_s)
    if lvl is Level.NORMAL:
        return DifficultyParams(lvl, 0.30, 0.40, 50.0, 60.0, 1.0, 1.5)
    return DifficultyParams(lvl, 0.40, 0.50, 40.0, 60.0, 0.5, 1.0)


@dataclass(frozen=True)
class ReactionProfile:
    """Reaction-time profile used to calibrate difficulty. Defaults are the population values."""

    mean_rt_ms: float = 756.0
    min_rt_ms: float = 556.0
    max_rt_ms: float = 1423.0

    def __post_init__(self) -> None:
        if not (0 < self.min_rt_ms <= self.mean_rt_ms <= self.max_rt_ms):
            raise ValueError("require 0 < min_rt_ms <= mean_rt_ms <= max_rt_ms")
