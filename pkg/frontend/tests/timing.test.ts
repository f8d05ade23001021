import { describe, expect, it } from "vitest";
import { ManualClock } from "../src/clock.js";
import { TrialRunner, type PhaseMeasurement } from "../src/testRunner.js";
import type { TrialJson, TrialPlanJson } from "../src/types.js";

const FRAME_MS = 1000 / 60;
const TOLERANCE_MS = 17;

function stroopPlan(trialCount = 160): TrialPlanJson {
  const trials: TrialJson[] = Array.from({ length: trialCount }, (_, i) => ({
    index: i,
    condition: i % 2 === 0 ? "con" : "incon",
    word: i % 2 === 0 ? "red" : "blue",
    ink: "red",
  }));
  return {
    test_kind: "stroop",
    seed: 1,
    timing: { fixation_ms: 500, stimulus_ms: 3000, response_window_ms: 3000, blank_ms: 0 },
    trials,
  };
}

function gonogoPlan(trialCount = 160): TrialPlanJson {
  const trials: TrialJson[] = Array.from({ length: trialCount }, (_, i) => ({
    index: i,
    condition: i % 2 === 0 ? "go" : "nogo",
    arrow: i % 2 === 0 ? "left" : "right",
    block: i < trialCount / 2 ? 1 : 2,
    go_arrow: i < trialCount / 2 ? "left" : "right",
  }));
  return {
    test_kind: "go_nogo",
    seed: 1,
    timing: { fixation_ms: 500, stimulus_ms: 500, response_window_ms: 1500, blank_ms: 500 },
    trials,
  };
}

function byPhase(measurements: PhaseMeasurement[], phase: string): PhaseMeasurement[] {
  return measurements.filter((m) => m.phase === phase);
}

describe("timing QA at a 60 Hz frame clock", () => {
  it("stroop stimulus durations stay within 3000 +/- 17 ms over 160 scripted trials", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(stroopPlan(), clock);
    runner.start(); // scripted run: no responses, every stimulus runs to its ceiling
    clock.pumpUntil(() => runner.isDone);

    const stimulus = byPhase(runner.measurements, "stimulus");
    expect(stimulus).toHaveLength(160);
    for (const m of stimulus) {
      expect(Math.abs(m.measuredMs - 3000)).toBeLessThanOrEqual(TOLERANCE_MS);
    }
    const fixation = byPhase(runner.measurements, "fixation");
    expect(fixation).toHaveLength(160);
    for (const m of fixation) {
      expect(Math.abs(m.measuredMs - 500)).toBeLessThanOrEqual(TOLERANCE_MS);
    }
  });

  it("go/nogo phases stay within 500/500/1500 +/- 17 ms over 160 scripted trials", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(gonogoPlan(), clock);
    runner.start();
    clock.pumpUntil(() => runner.isDone);

    const targets: Record<string, number> = { fixation: 500, stimulus: 500, response: 1500, blank: 500 };
    for (const [phase, target] of Object.entries(targets)) {
      const measured = byPhase(runner.measurements, phase);
      expect(measured).toHaveLength(160);
      for (const m of measured) {
        expect(Math.abs(m.measuredMs - target)).toBeLessThanOrEqual(TOLERANCE_MS);
      }
    }
  });

  it("records rt from response-page onset within one frame", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(gonogoPlan(4), clock);
    runner.start();
    // Pump into the first response page, then 15 frames in (250 ms), press space.
    clock.pumpUntil(() => runner.currentPhase() === "response");
    for (let i = 0; i < 15; i++) clock.pump();
    runner.keydown("space");
    clock.pumpUntil(() => runner.isDone);
    const first = runner.collectResponses().find((r) => r.trial_index === 0);
    expect(first).toBeDefined();
    expect(Math.abs(first!.rt_ms! - 250)).toBeLessThanOrEqual(FRAME_MS + 1e-9);
  });

  it("stroop advances on keypress and measures rt from stimulus onset", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(stroopPlan(2), clock);
    runner.start();
    clock.pumpUntil(() => runner.currentPhase() === "stimulus");
    for (let i = 0; i < 42; i++) clock.pump(); // 700 ms
    runner.keydown("q");
    clock.pumpUntil(() => runner.isDone);
    const responses = runner.collectResponses();
    expect(responses).toHaveLength(1);
    expect(Math.abs(responses[0]!.rt_ms! - 700)).toBeLessThanOrEqual(FRAME_MS + 1e-9);
    const stimulus = byPhase(runner.measurements, "stimulus");
    // First trial ended early at the keypress, second ran to the ceiling.
    expect(stimulus[0]!.measuredMs).toBeLessThan(750);
    expect(Math.abs(stimulus[1]!.measuredMs - 3000)).toBeLessThanOrEqual(TOLERANCE_MS);
  });

  it("keys outside the response-eligible phase are ignored", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(gonogoPlan(2), clock);
    runner.start();
    clock.pumpUntil(() => runner.currentPhase() === "stimulus");
    runner.keydown("space"); // during the arrow, before the response page
    clock.pumpUntil(() => runner.isDone);
    expect(runner.collectResponses()).toHaveLength(0);
  });

  it("focus loss marks the trial invalid and drops its response", () => {
    const clock = new ManualClock(FRAME_MS);
    const runner = new TrialRunner(gonogoPlan(3), clock);
    runner.start();
    clock.pumpUntil(() => runner.currentPhase() === "response");
    runner.keydown("space");
    runner.invalidateCurrentTrial("window lost focus");
    clock.pumpUntil(() => runner.isDone);
    expect(runner.invalidTrials).toEqual([{ trialIndex: 0, note: "window lost focus" }]);
    expect(runner.collectResponses().some((r) => r.trial_index === 0)).toBe(false);
  });
});
