/** Wire formats exchanged with the training service. Field names and order
 * mirror the server's JSON exactly; the client never rewrites them. */

export type ColorWord = "red" | "blue";
export type Mode = "color" | "word";
export type LevelName = "easy" | "normal" | "hard";
export type ChannelSide = "left" | "right";

export interface Song {
  id: string;
  title: string;
  bpm: number;
  duration_s: number;
  beat_offset_s: number;
}

export interface BlockJson {
  index: number;
  spawn_time_s: number;
  channel: ChannelSide;
  word: ColorWord;
  ink: ColorWord;
  flight_time_s: number;
  target_height_cm: number;
}

export interface BeatMapJson {
  song_id: string;
  level: LevelName;
  mode: Mode;
  seed: number;
  channel_length_m: number;
  blocks: BlockJson[];
}

export interface SessionSongSlot {
  ordinal: number;
  song_id: string;
  mode: Mode;
  seed: number;
}

export interface SessionInfo {
  session_id: string;
  participant_id: string;
  session_ordinal: number;
  level: LevelName;
  break_after: number;
  songs: SessionSongSlot[];
}

export interface HitSubmission {
  block_index: number;
  saber: ColorWord;
  swing_speed_mps: number;
  contact_height_cm: number;
  hit_time_s: number;
  client_mono_ms: number;
}

export interface BlockResultJson {
  block_index: number;
  outcome: "great" | "cor" | "fault" | "miss";
  points: number;
}

export interface FeedbackEvent {
  seq: number;
  kind: "SpawnSchedule" | "BlockScored" | "Excellent" | "SongComplete" | "RankChanged";
  payload: Record<string, unknown>;
}

export interface HitResponse {
  result: BlockResultJson;
  feedback: FeedbackEvent[];
}

export interface SongCompletion {
  ordinal: number;
  counts: { cor: number; fault: number; miss: number; great: number; total: number };
  gs: number;
  phase: string;
  rank: number | null;
  rank_changed: boolean;
  record_stored: boolean;
}

export type TestKindName = "stroop" | "reverse_stroop" | "go_nogo";

export interface TimingJson {
  fixation_ms: number;
  stimulus_ms: number;
  response_window_ms: number;
  blank_ms: number | [number, number];
}

export interface TrialJson {
  index: number;
  condition: "con" | "incon" | "go" | "nogo";
  word?: ColorWord;
  ink?: ColorWord;
  arrow?: ChannelSide;
  block?: number;
  go_arrow?: ChannelSide;
}

export interface TrialPlanJson {
  test_kind: TestKindName;
  seed: number;
  timing: TimingJson;
  trials: TrialJson[];
}

export interface ResponseEntry {
  trial_index: number;
  key?: string;
  rt_ms?: number;
  client_mono_ms?: number;
}

export interface LeaderboardJson {
  date: string;
  entries: { participant_id: string; best_gs: number; achieved_at: string }[];
  daily_champion: string | null;
}

/** Parse a beat map, checking the shape without altering any value. */
export function parseBeatMap(text: string): BeatMapJson {
  const data = JSON.parse(text) as BeatMapJson;
  if (!Array.isArray(data.blocks)) throw new Error("beat map has no blocks array");
  for (const block of data.blocks) {
    if (
      typeof block.spawn_time_s !== "number" ||
      typeof block.flight_time_s !== "number" ||
      (block.channel !== "left" && block.channel !== "right")
    ) {
      throw new Error(`malformed block ${block.index}`);
    }
  }
  return data;
}

/** Serialize exactly as the service does (compact separators, key order kept). */
export function serializeBeatMap(map: BeatMapJson): string {
  return JSON.stringify(map);
}
