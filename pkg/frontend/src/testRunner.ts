import type { FrameClock } from "./clock.js";
import type { ResponseEntry, TrialPlanJson } from "./types.js";

export type PhaseName = "fixation" | "stimulus" | "response" | "blank";

export interface PhaseMeasurement {
  trialIndex: number;
  phase: PhaseName;
  plannedMs: number;
  measuredMs: number;
}

export interface InvalidTrial {
  trialIndex: number;
  note: string;
}

export interface TrialRunnerEvents {
  onPhase?: (trialIndex: number, phase: PhaseName) => void;
  onComplete?: (responses: ResponseEntry[]) => void;
}

/**
 * Frame-locked trial state machine for the timed test battery.
 *
 * Stroop variants run fixation then a stimulus that is response-eligible for
 * its full duration and advances early on a keypress. Go/NoGo runs fixation,
 * stimulus, a response page (the response-eligible phase), then a blank.
 * Reaction times are measured on the frame clock from response-eligible
 * onset; they are composed before anything touches the network, so transport
 * latency cannot change them. Measured phase durations are kept for timing QA.
 */
export class TrialRunner {
  readonly measurements: PhaseMeasurement[] = [];
  readonly invalidTrials: InvalidTrial[] = [];
  private readonly responses = new Map<number, ResponseEntry>();
  private trialCursor = -1;
  private phase: PhaseName | null = null;
  private phaseStartMs = 0;
  private phasePlannedMs = 0;
  private responded = false;
  private running = false;
  private done = false;

  constructor(
    private readonly plan: TrialPlanJson,
    private readonly clock: FrameClock,
    private readonly events: TrialRunnerEvents = {},
    private readonly rng: () => number = Math.random,
  ) {}

  get isDone(): boolean {
    return this.done;
  }

  get isGoNoGo(): boolean {
    return this.plan.test_kind === "go_nogo";
  }

  currentTrialIndex(): number {
    return this.trialCursor;
  }

  currentPhase(): PhaseName | null {
    return this.phase;
  }

  start(): void {
    if (this.running || this.done) return;
    this.running = true;
    this.advanceTrial();
    this.clock.requestFrame((t) => this.tick(t));
  }

  /** Key input from the page; ignored outside the response-eligible phase. */
  keydown(key: string): void {
    if (!this.running || this.phase === null) return;
    const eligible = this.isGoNoGo ? this.phase === "response" : this.phase === "stimulus";
    if (!eligible || this.responded) return;
    const nowMs = this.clock.now();
    this.responded = true;
    this.responses.set(this.trialCursor, {
      trial_index: this.trialCursor,
      key,
      rt_ms: nowMs - this.phaseStartMs,
      client_mono_ms: nowMs,
    });
    if (!this.isGoNoGo) this.endPhase(nowMs); // stroop advances on keypress
  }

  /** Mark the in-flight trial invalid (e.g. the window lost focus). */
  invalidateCurrentTrial(note: string): void {
    if (this.trialCursor < 0 || this.done) return;
    this.invalidTrials.push({ trialIndex: this.trialCursor, note });
    this.responses.delete(this.trialCursor);
    this.responded = true; // further keys in this trial are ignored
  }

  /** Responses for upload, ordered by trial, invalid trials omitted. */
  collectResponses(): ResponseEntry[] {
    return [...this.responses.values()].sort((a, b) => a.trial_index - b.trial_index);
  }

  private plannedBlankMs(): number {
    const blank = this.plan.timing.blank_ms;
    if (typeof blank === "number") return blank;
    const [lo, hi] = blank;
    return lo + this.rng() * (hi - lo);
  }

  private phaseSequence(): { phase: PhaseName; ms: number }[] {
    const timing = this.plan.timing;
    if (this.isGoNoGo) {
      return [
        { phase: "fixation", ms: timing.fixation_ms },
        { phase: "stimulus", ms: timing.stimulus_ms },
        { phase: "response", ms: timing.response_window_ms },
        { phase: "blank", ms: this.plannedBlankMs() },
      ];
    }
    const phases: { phase: PhaseName; ms: number }[] = [
      { phase: "fixation", ms: timing.fixation_ms },
      { phase: "stimulus", ms: timing.stimulus_ms },
    ];
    if (typeof timing.blank_ms === "number" ? timing.blank_ms > 0 : true) {
      const blank = this.plannedBlankMs();
      if (blank > 0) phases.push({ phase: "blank", ms: blank });
    }
    return phases;
  }

  private phasesForTrial: { phase: PhaseName; ms: number }[] = [];
  private phaseCursor = 0;

  private advanceTrial(): void {
    this.trialCursor += 1;
    if (this.trialCursor >= this.plan.trials.length) {
      this.done = true;
      this.running = false;
      this.events.onComplete?.(this.collectResponses());
      return;
    }
    this.responded = false;
    this.phasesForTrial = this.phaseSequence();
    this.phaseCursor = 0;
    this.enterPhase(this.clock.now());
  }

  private enterPhase(nowMs: number): void {
    const spec = this.phasesForTrial[this.phaseCursor]!;
    this.phase = spec.phase;
    this.phaseStartMs = nowMs;
    this.phasePlannedMs = spec.ms;
    this.events.onPhase?.(this.trialCursor, spec.phase);
  }

  private endPhase(nowMs: number): void {
    this.measurements.push({
      trialIndex: this.trialCursor,
      phase: this.phase!,
      plannedMs: this.phasePlannedMs,
      measuredMs: nowMs - this.phaseStartMs,
    });
    this.phaseCursor += 1;
    if (this.phaseCursor >= this.phasesForTrial.length) {
      this.phase = null;
      this.advanceTrial();
    } else {
      this.enterPhase(nowMs);
    }
  }

  private tick(nowMs: number): void {
    if (!this.running) return;
    if (this.phase !== null && nowMs - this.phaseStartMs >= this.phasePlannedMs) {
      this.endPhase(nowMs);
    }
    if (this.running) this.clock.requestFrame((t) => this.tick(t));
  }
}
