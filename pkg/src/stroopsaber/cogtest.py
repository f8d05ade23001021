"""Timed cognitive test battery: balanced trial plans for the Stroop,
Reverse Stroop, and Go/NoGo tasks, response scoring, and outcome summaries
(accuracy/RT interference effects and the discriminability index)."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping, Optional, Sequence

from .core import ALL_STIMULI, ColorName, Stimulus
from .stats import inv_norm_cdf


class TestKind(str, Enum):
    __test__ = False  # keep pytest collection away

    STROOP = "stroop"
    REVERSE_STROOP = "reverse_stroop"
    GO_NOGO = "go_nogo"


class Condition(str, Enum):
    CON = "con"
    INCON = "incon"
    GO = "go"
    NOGO = "nogo"


class Arrow(str, Enum):
    LEFT = "left"
    RIGHT = "right"


TRIALS_PER_TEST = 160
TRIALS_PER_CONDITION = 80
GONOGO_BLOCK_SIZE = 80

GO_KEY = "space"
#: Keyboard mapping for color responses.
DEFAULT_KEY_MAP: Mapping[str, ColorName] = {"q": ColorName.RED, "p": ColorName.BLUE}


@dataclass(frozen=True)
class TimingSpec:
    """Phase durations in milliseconds. ``blank_ms`` may be a fixed value or a
    (low, high) range; a response window of 0 means responses land during the
    stimulus itself."""

    fixation_ms: int
    stimulus_ms: int
    response_window_ms: int
    blank_ms: int | tuple[int, int] = 0


STROOP_TIMING = TimingSpec(fixation_ms=500, stimulus_ms=3000, response_window_ms=3000, blank_ms=0)
GONOGO_TIMING = TimingSpec(fixation_ms=500, stimulus_ms=500, response_window_ms=1500, blank_ms=500)


@dataclass(frozen=True)
class TrialSpec:
    index: int
    test_kind: TestKind
    condition: Condition
    stimulus: Optional[Stimulus] = None  # stroop variants
    arrow: Optional[Arrow] = None        # go/nogo
    block: Optional[int] = None          # go/nogo: 1 or 2
    go_arrow: Optional[Arrow] = None     # go/nogo: which arrow means go in this block


@dataclass(frozen=True)
class TrialPlan:
    test_kind: TestKind
    seed: int
    timing: TimingSpec
    trials: tuple[TrialSpec, ...]


def build_trial_plan(test_kind: TestKind | str, seed: int) -> TrialPlan:
    """Balanced, seed-deterministic trial sequence.

    Stroop variants: 160 trials, each of the four stimuli 40 times (80
    congruent, 80 incongruent), fully shuffled. Go/NoGo: two 80-trial blocks of
    40 go + 40 nogo each, left arrow mapping to go in block 1 and right arrow
    in block 2.
    """
    kind = TestKind(test_kind)
    rng = random.Random(seed)
    if kind in (TestKind.STROOP, TestKind.REVERSE_STROOP):
        stimuli = [s for s in ALL_STIMULI for _ in range(TRIALS_PER_TEST // len(ALL_STIMULI))]
        rng.shuffle(stimuli)
        trials = tuple(
            TrialSpec(
                index=i,
                test_kind=kind,
                condition=Condition.CON if s.congruent else Condition.INCON,
                stimulus=s,
            )
            for i, s in enumerate(stimuli)
        )
        return TrialPlan(test_kind=kind, seed=seed, timing=STROOP_TIMING, trials=trials)

    trials = []
    for block, go_arrow in ((1, Arrow.LEFT), (2, Arrow.RIGHT)):
        arrows = [Arrow.LEFT] * (GONOGO_BLOCK_SIZE // 2) + [Arrow.RIGHT] * (GONOGO_BLOCK_SIZE // 2)
        rng.shuffle(arrows)
        for arrow in arrows:
            trials.append(
                TrialSpec(
                    index=len(trials),
                    test_kind=kind,
                    condition=Condition.GO if arrow is go_arrow else Condition.NOGO,
                    arrow=arrow,
                    block=block,
                    go_arrow=go_arrow,
                )
            )
    return TrialPlan(test_kind=kind, seed=seed, timing=GONOGO_TIMING, trials=tuple(trials))


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    condition: Condition
    response_key: Optional[str]
    rt_ms: Optional[float]
    correct: bool
    invalid_key: bool = False


def score_response(
    trial: TrialSpec,
    key: Optional[str] = None,
    rt_ms: Optional[float] = None,
    key_map: Mapping[str, ColorName] = DEFAULT_KEY_MAP,
) -> TrialResult:
    """Score one keyed response.

    Stroop answers with the ink color's key, Reverse Stroop with the word's;
    go trials require the space key within the response window, nogo trials
    require withholding. Keys outside the test's set are recorded as invalid
    responses and counted incorrect. RT must be present exactly when a key is,
    measured from response-eligible onset (stimulus onset for Stroop variants,
    response-page onset for Go/NoGo).
    """
    if (key is None) != (rt_ms is None):
        raise ValueError("rt_ms must be present exactly when a key is present")
    if rt_ms is not None:
        window = STROOP_TIMING.response_window_ms if trial.test_kind is not TestKind.GO_NOGO \
            else GONOGO_TIMING.response_window_ms
        if not 0 < rt_ms <= window:
            raise ValueError(f"rt_ms must be in (0, {window}]")

    key_norm = key.lower() if key is not None else None
    if trial.test_kind is TestKind.GO_NOGO:
        if key_norm is None:
            correct = trial.condition is Condition.NOGO
            return TrialResult(trial.index, trial.condition, None, None, correct)
        if key_norm != GO_KEY:
            return TrialResult(trial.index, trial.condition, key, rt_ms, False, invalid_key=True)
        correct = trial.condition is Condition.GO
        return TrialResult(trial.index, trial.condition, key, rt_ms, correct)

    assert trial.stimulus is not None
    target = trial.stimulus.ink if trial.test_kind is TestKind.STROOP else trial.stimulus.word
    if key_norm is None:
        return TrialResult(trial.index, trial.condition, None, None, False)
    answered = key_map.get(key_norm)
    if answered is None:
        return TrialResult(trial.index, trial.condition, key, rt_ms, False, invalid_key=True)
    return TrialResult(trial.index, trial.condition, key, rt_ms, answered == target)


def _require_complete(results: Sequence[TrialResult], conditions: tuple[Condition, Condition]) -> None:
    if len(results) != TRIALS_PER_TEST:
        raise ValueError(f"expected {TRIALS_PER_TEST} trial results, got {len(results)}")
    for cond in conditions:
        n = sum(1 for r in results if r.condition is cond)
        if n != TRIALS_PER_CONDITION:
            raise ValueError(f"expected {TRIALS_PER_CONDITION} {cond.value} trials, got {n}")


def _mean(values: list[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


@dataclass(frozen=True)
class StroopSummary:
    con_acc: float
    incon_acc: float
    con_mean_rt_ms: Optional[float]
    incon_mean_rt_ms: Optional[float]
    #: meanRt(incon) - meanRt(con); None if either side has no correct trials.
    interference_rt_ms: Optional[float]
    #: acc(con) - acc(incon).
    interference_acc: float
    #: Conditions with zero correct trials, for which mean RT is undefined.
    undefined_conditions: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "con_acc": self.con_acc,
            "incon_acc": self.incon_acc,
            "con_mean_rt_ms": self.con_mean_rt_ms,
            "incon_mean_rt_ms": self.incon_mean_rt_ms,
            "interference_rt_ms": self.interference_rt_ms,
            "interference_acc": self.interference_acc,
            "undefined_conditions": list(self.undefined_conditions),
        }


def summarize_stroop(results: Sequence[TrialResult]) -> StroopSummary:
    """Per-condition accuracy and correct-trial mean RT, plus the interference
    differences. A smaller interference effect signals stronger conflict
    inhibition; this summary reports, it does not judge."""
    _require_complete(results, (Condition.CON, Condition.INCON))
    rts: dict[Condition, list[float]] = {Condition.CON: [], Condition.INCON: []}
    hits: dict[Condition, int] = {Condition.CON: 0, Condition.INCON: 0}
    for r in results:
        if r.correct:
            hits[r.condition] += 1
            if r.rt_ms is not None:
                rts[r.condition].append(r.rt_ms)
    con_acc = hits[Condition.CON] / TRIALS_PER_CONDITION
    incon_acc = hits[Condition.INCON] / TRIALS_PER_CONDITION
    con_rt = _mean(rts[Condition.CON])
    incon_rt = _mean(rts[Condition.INCON])
    undefined = tuple(
        cond.value for cond in (Condition.CON, Condition.INCON) if hits[cond] == 0
    )
    interference = incon_rt - con_rt if con_rt is not None and incon_rt is not None else None
    return StroopSummary(
        con_acc=con_acc,
        incon_acc=incon_acc,
        con_mean_rt_ms=con_rt,
        incon_mean_rt_ms=incon_rt,
        interference_rt_ms=interference,
        interference_acc=con_acc - incon_acc,
        undefined_conditions=undefined,
    )


def correct_extreme_rate(rate: float, n: int = TRIALS_PER_CONDITION) -> float:
    """Standard replacement of 0 and 1 rates with 1/(2n) and 1-1/(2n) so the
    z transform stays finite."""
    if rate <= 0.0:
        return 1.0 / (2 * n)
    if rate >= 1.0:
        return 1.0 - 1.0 / (2 * n)
    return rate


@dataclass(frozen=True)
class GoNoGoSummary:
    hit_rate: float
    false_alarm_rate: float
    corrected_hit_rate: float
    corrected_false_alarm_rate: float
    d_prime: float
    mean_go_rt_ms: Optional[float]

    def to_dict(self) -> dict:
        return {
            "hit_rate": self.hit_rate,
            "false_alarm_rate": self.false_alarm_rate,
            "corrected_hit_rate": self.corrected_hit_rate,
            "corrected_false_alarm_rate": self.corrected_false_alarm_rate,
            "d_prime": self.d_prime,
            "mean_go_rt_ms": self.mean_go_rt_ms,
        }


def summarize_gonogo(results: Sequence[TrialResult]) -> GoNoGoSummary:
    """Hit rate, false alarm rate, d' = z(hit) - z(false alarm) after
    extreme-rate correction, and mean RT over correct go trials."""
    _require_complete(results, (Condition.GO, Condition.NOGO))
    hits = 0
    false_alarms = 0
    go_rts: list[float] = []
    for r in results:
        if r.condition is Condition.GO:
            if r.correct:
                hits += 1
                if r.rt_ms is not None:
                    go_rts.append(r.rt_ms)
        else:
            if r.response_key is not None:
                false_alarms += 1
    hit_rate = hits / TRIALS_PER_CONDITION
    fa_rate = false_alarms / TRIALS_PER_CONDITION
    c_hit = correct_extreme_rate(hit_rate)
    c_fa = correct_extreme_rate(fa_rate)
    d_prime = inv_norm_cdf(c_hit) - inv_norm_cdf(c_fa)
    return GoNoGoSummary(
        hit_rate=hit_rate,
        false_alarm_rate=fa_rate,
        corrected_hit_rate=c_hit,
        corrected_false_alarm_rate=c_fa,
        d_prime=d_prime,
        mean_go_rt_ms=_mean(go_rts),
    )


# --- serialization -----------------------------------------------------------


def plan_to_dict(plan: TrialPlan) -> dict:
    timing = {
        "fixation_ms": plan.timing.fixation_ms,
        "stimulus_ms": plan.timing.stimulus_ms,
        "response_window_ms": plan.timing.response_window_ms,
        "blank_ms": list(plan.timing.blank_ms) if isinstance(plan.timing.blank_ms, tuple) else plan.timing.blank_ms,
    }
    trials = []
    for t in plan.trials:
        entry: dict = {"index": t.index, "condition": t.condition.value}
        if t.stimulus is not None:
            entry["word"] = t.stimulus.word.value
            entry["ink"] = t.stimulus.ink.value
        if t.arrow is not None:
            entry["arrow"] = t.arrow.value
            entry["block"] = t.block
            entry["go_arrow"] = t.go_arrow.value
        trials.append(entry)
    return {"test_kind": plan.test_kind.value, "seed": plan.seed, "timing": timing, "trials": trials}


def plan_to_json(plan: TrialPlan) -> str:
    return json.dumps(plan_to_dict(plan), separators=(",", ":"))


@dataclass(frozen=True)
class TestSummaryRecord:
    """One stored battery outcome for a participant at one study phase."""

    __test__ = False  # keep pytest collection away

    participant_id: str
    phase: str
    test_kind: TestKind
    summary: StroopSummary | GoNoGoSummary

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "phase": self.phase,
            "test_kind": self.test_kind.value,
            "summary": self.summary.to_dict(),
        }


SUMMARY_CSV_COLUMNS = (
    "participant_id",
    "phase",
    "test",
    "con_acc",
    "con_rt_ms",
    "incon_acc",
    "incon_rt_ms",
    "interference_acc",
    "interference_rt_ms",
    "hit_rate",
    "false_alarm_rate",
    "d_prime",
    "go_rt_ms",
)


def write_summary_csv(records: Iterable[TestSummaryRecord], fp: IO[str]) -> None:
    """Wide per-participant, per-phase export of battery measures."""
    writer = csv.writer(fp)
    writer.writerow(SUMMARY_CSV_COLUMNS)
    for rec in records:
        row: dict[str, object] = {
            "participant_id": rec.participant_id,
            "phase": rec.phase,
            "test": rec.test_kind.value,
        }
        s = rec.summary
        if isinstance(s, StroopSummary):
            row.update(
                con_acc=s.con_acc,
                con_rt_ms=s.con_mean_rt_ms,
                incon_acc=s.incon_acc,
                incon_rt_ms=s.incon_mean_rt_ms,
                interference_acc=s.interference_acc,
                interference_rt_ms=s.interference_rt_ms,
            )
        else:
            row.update(
                hit_rate=s.hit_rate,
                false_alarm_rate=s.false_alarm_rate,
                d_prime=s.d_prime,
                go_rt_ms=s.mean_go_rt_ms,
            )
        writer.writerow([row.get(col, "") if row.get(col) is not None else "" for col in SUMMARY_CSV_COLUMNS])
