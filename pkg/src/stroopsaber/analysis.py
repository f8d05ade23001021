"""Builds within-subjects tables from song records and runs the ANOVA reports
shared by the HTTP analysis endpoints and the ``analyze`` command."""

from __future__ import annotations

import csv
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import GameMode, Level
from .scoring import SessionCounts
from .sessions import SongRecord
from .stats import bonferroni_pairwise, rm_anova_oneway, rm_anova_twoway

LEVEL_ORDER = (Level.EASY, Level.NORMAL, Level.HARD)
MODE_ORDER = (GameMode.COLOR, GameMode.WORD)


def read_records_csv(path: str | Path) -> list[SongRecord]:
    """Parse the record export format back into song records."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            counts = SessionCounts(
                cor=int(row["cor"]),
                fault=int(row["fault"]),
                miss=int(row["miss"]),
                great=int(row["great"]),
                total=int(row["total"]),
            )
            records.append(
                SongRecord(
                    participant_id=row["participant_id"],
                    session_ordinal=int(row["session"]),
                    song_id=row["song_id"],
                    mode=GameMode(row["mode"]),
                    level=Level(row["level"]),
                    counts=counts,
                    gs=float(row["gs"]),
                    completed_at=datetime.fromisoformat(row["completed_at"]),
                )
            )
    return records


def _cell_means(records: Sequence[SongRecord]) -> dict[str, dict[tuple, list[float]]]:
    cells: dict[str, dict[tuple, list[float]]] = {}
    for r in records:
        cells.setdefault(r.participant_id, {}).setdefault((r.level, r.mode), []).append(r.gs)
    return cells


def oneway_gs_table(records: Sequence[SongRecord]) -> tuple[np.ndarray, list[str], list[str]]:
    """Mean gs per participant x level. Participants missing any level are dropped.

    Raises ValueError when fewer than two participants have complete coverage.
    """
    cells = _cell_means(records)
    rows = []
    pids = []
    for pid in sorted(cells):
        by_level = {}
        for (level, _mode), values in cells[pid].items():
            by_level.setdefault(level, []).extend(values)
        if all(level in by_level for level in LEVEL_ORDER):
            rows.append([float(np.mean(by_level[level])) for level in LEVEL_ORDER])
            pids.append(pid)
    if len(rows) < 2:
        raise ValueError("need at least 2 participants with records at every level")
    return np.array(rows), pids, [level.value for level in LEVEL_ORDER]


def twoway_gs_table(records: Sequence[SongRecord]) -> tuple[np.ndarray, list[str], list[str], list[str]]:
    """Mean gs per participant x level x mode; requires full 3x2 coverage per participant."""
    cells = _cell_means(records)
    rows = []
    pids = []
    for pid in sorted(cells):
        have = cells[pid]
        if all((level, mode) in have for level in LEVEL_ORDER for mode in MODE_ORDER):
            rows.append(
                [[float(np.mean(have[(level, mode)])) for mode in MODE_ORDER] for level in LEVEL_ORDER]
            )
            pids.append(pid)
    if len(rows) < 2:
        raise ValueError("need at least 2 participants with records in every level x mode cell")
    return np.array(rows), pids, [lv.value for lv in LEVEL_ORDER], [m.value for m in MODE_ORDER]


def analyze_records(records: Sequence[SongRecord], design: str) -> dict:
    """Run the requested within-subjects design on game scores.

    Returns a report dict with ``effects`` (name, F, df_num, df_den, p) and
    Bonferroni-adjusted ``pairwise`` comparisons.
    """
    if design == "oneway":
        table, pids, labels = oneway_gs_table(records)
        result = rm_anova_oneway(table)
        effects = [result.to_dict() | {"name": "level"}]
        pairwise = [p.to_dict() | {"factor": "level"} for p in bonferroni_pairwise(table, labels)]
    elif design == "twoway":
        table, pids, level_labels, mode_labels = twoway_gs_table(records)
        effects = [r.to_dict() for r in rm_anova_twoway(table, factor_names=("level", "mode"))]
        level_means = table.mean(axis=2)
        mode_means = table.mean(axis=1)
        pairwise = [p.to_dict() | {"factor": "level"} for p in bonferroni_pairwise(level_means, level_labels)]
        pairwise += [p.to_dict() | {"factor": "mode"} for p in bonferroni_pairwise(mode_means, mode_labels)]
    else:
        raise ValueError("design must be 'oneway' or 'twoway'")
    return {
        "design": design,
        "measure": "gs",
        "subjects": pids,
        "effects": effects,
        "pairwise": pairwise,
        "notes": [
            "degrees of freedom are textbook within-subjects shapes: "
            "df_num = k-1 per factor, df_den = df_num * (n_subjects - 1)"
        ],
    }
