/** Monotonic frame clocks. All reaction times and phase durations are read
 * from these clocks, never from wall time or network arrival times. */

export interface FrameClock {
  /** Milliseconds on a monotonic scale. */
  now(): number;
  /** Schedule a callback for the next frame, passing the frame timestamp. */
  requestFrame(callback: (nowMs: number) => void): void;
}

/** Browser clock: requestAnimationFrame driven by performance.now(). */
export class RafClock implements FrameClock {
  now(): number {
    return performance.now();
  }

  requestFrame(callback: (nowMs: number) => void): void {
    requestAnimationFrame((t) => callback(t));
  }
}

/**
 * Deterministic fixed-step clock for tests and headless runs. Frames fire
 * only when pump() is called, each advancing one frame interval.
 */
export class ManualClock implements FrameClock {
  private currentMs = 0;
  private pending: ((nowMs: number) => void)[] = [];

  constructor(readonly frameIntervalMs: number = 1000 / 60) {}

  now(): number {
    return this.currentMs;
  }

  requestFrame(callback: (nowMs: number) => void): void {
    this.pending.push(callback);
  }

  /** Advance one frame and deliver it to everything scheduled. */
  pump(): void {
    this.currentMs += this.frameIntervalMs;
    const callbacks = this.pending;
    this.pending = [];
    for (const callback of callbacks) callback(this.currentMs);
  }

  /** Pump until the predicate holds or the frame budget runs out. */
  pumpUntil(done: () => boolean, maxFrames = 1_000_000): void {
    let frames = 0;
    while (!done()) {
      if (this.pending.length === 0) throw new Error("clock stalled: nothing scheduled");
      this.pump();
      if (++frames > maxFrames) throw new Error("frame budget exhausted");
    }
  }
}
