import type { ApiClient } from "./api.js";
import type { FrameClock } from "./clock.js";
import type {
  BeatMapJson,
  BlockJson,
  ColorWord,
  FeedbackEvent,
  HitSubmission,
  Mode,
} from "./types.js";

/** The left input always swings the red saber, the right input the blue one. */
export const SABER_FOR_SIDE: Record<"left" | "right", ColorWord> = {
  left: "red",
  right: "blue",
};

/** Saber color that scores on a block: ink in color mode, word in word mode. */
export function correctSaber(block: BlockJson, mode: Mode): ColorWord {
  return mode === "color" ? block.ink : block.word;
}

/** A block's travel progress at song time t: 0 at spawn, 1 at the hit plane. */
export function blockProgress(block: BlockJson, songTimeS: number): number {
  return (songTimeS - block.spawn_time_s) / block.flight_time_s;
}

export function hitPlaneTimeS(block: BlockJson): number {
  return block.spawn_time_s + block.flight_time_s;
}

/** Blocks visible at song time t (spawned, not yet past the grace window). */
export function visibleBlocks(map: BeatMapJson, songTimeS: number, graceS = 0.2): BlockJson[] {
  return map.blocks.filter(
    (b) => songTimeS >= b.spawn_time_s && songTimeS <= hitPlaneTimeS(b) + graceS,
  );
}

interface PointerSample {
  tMs: number;
  x: number;
  y: number;
}

/**
 * Estimates swing speed from pointer movement: displacement over the trailing
 * window (100 ms) at contact, converted through the playfield scale.
 */
export class SwingTracker {
  private samples: PointerSample[] = [];

  constructor(
    private readonly clock: FrameClock,
    private readonly pixelsPerMeter: number,
    private readonly windowMs = 100,
  ) {}

  addSample(x: number, y: number): void {
    const tMs = this.clock.now();
    this.samples.push({ tMs, x, y });
    const cutoff = tMs - 4 * this.windowMs;
    while (this.samples.length > 2 && this.samples[0]!.tMs < cutoff) this.samples.shift();
  }

  /** Meters/second over the trailing window; 0 until two samples exist. */
  speedMps(): number {
    const nowMs = this.clock.now();
    const windowed = this.samples.filter((s) => s.tMs >= nowMs - this.windowMs);
    if (windowed.length < 2) return 0;
    const first = windowed[0]!;
    const last = windowed[windowed.length - 1]!;
    const dtS = (last.tMs - first.tMs) / 1000;
    if (dtS <= 0) return 0;
    const distancePx = Math.hypot(last.x - first.x, last.y - first.y);
    return distancePx / this.pixelsPerMeter / dtS;
  }
}

export function composeHit(
  block: BlockJson,
  saber: ColorWord,
  swingSpeedMps: number,
  contactHeightCm: number,
  songTimeS: number,
  clientMonoMs: number,
): HitSubmission {
  return {
    block_index: block.index,
    saber,
    swing_speed_mps: swingSpeedMps,
    contact_height_cm: contactHeightCm,
    hit_time_s: songTimeS,
    client_mono_ms: clientMonoMs,
  };
}

export interface SongPlaySummary {
  ordinal: number;
  gs: number;
  blockCount: number;
  excellentCount: number;
  hundredPointHits: number;
  feedback: FeedbackEvent[];
}

/**
 * Scripted driver that plays one song perfectly against a live service:
 * every block is struck at its hit plane with the correct saber, above the
 * speed threshold, at the target height. Used by the end-to-end checks and
 * the demo autoplay mode.
 */
export class PerfectPlayer {
  constructor(
    private readonly api: ApiClient,
    private readonly clock: FrameClock,
  ) {}

  async playSong(sessionId: string, ordinal: number): Promise<SongPlaySummary> {
    const started = await this.api.startSong(sessionId, ordinal);
    const map = started.beatmap;
    const collected: FeedbackEvent[] = [];
    let hundredPointHits = 0;
    for (const block of map.blocks) {
      const hit = composeHit(
        block,
        correctSaber(block, map.mode),
        6.0,
        block.target_height_cm,
        hitPlaneTimeS(block),
        this.clock.now(),
      );
      const response = await this.api.postHit(sessionId, hit);
      if (response.result.points === 100) hundredPointHits += 1;
      collected.push(...response.feedback);
    }
    const completion = await this.api.completeSong(sessionId, ordinal);
    return {
      ordinal,
      gs: completion.gs,
      blockCount: map.blocks.length,
      excellentCount: collected.filter((e) => e.kind === "Excellent").length,
      hundredPointHits,
      feedback: collected,
    };
  }
}
