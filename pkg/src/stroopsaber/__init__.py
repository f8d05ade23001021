"""Engine, service, and analysis toolkit for a rhythm-based cognitive-inhibition
training game: deterministic beat-map generation, block scoring, training plans,
a timed cognitive test battery, within-subjects statistics, and synthetic-player
calibration."""

__version__ = "0.1.0"
