import type {
  BeatMapJson,
  HitResponse,
  HitSubmission,
  LeaderboardJson,
  LevelName,
  Mode,
  ResponseEntry,
  SessionInfo,
  SongCompletion,
  Song,
  TestKindName,
  TrialPlanJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly violations: string[],
  ) {
    super(`HTTP ${status}: ${violations.join("; ")}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin REST client. The transport is injectable so tests can add latency or
 * capture payloads; nothing here ever recomputes a client timestamp. */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let violations: string[] = [`${response.status}`];
      try {
        const detail = (await response.json()).detail;
        if (Array.isArray(detail?.violations)) violations = detail.violations;
        else if (detail !== undefined) violations = [JSON.stringify(detail)];
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, violations);
    }
    return (await response.json()) as T;
  }

  songs(): Promise<{ songs: Song[] }> {
    return this.request("GET", "/songs");
  }

  createBeatmap(songId: string, level: LevelName, mode: Mode, seed: number): Promise<BeatMapJson> {
    return this.request("POST", "/beatmaps", { song_id: songId, level, mode, seed });
  }

  createSession(participantId: string, sessionOrdinal: number, seed?: number): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      participant_id: participantId,
      session_ordinal: sessionOrdinal,
      ...(seed === undefined ? {} : { seed }),
    });
  }

  startSong(sessionId: string, ordinal: number): Promise<{ ordinal: number; beatmap: BeatMapJson; advisory?: string }> {
    return this.request("POST", `/sessions/${sessionId}/songs/${ordinal}/start`);
  }

  postHit(sessionId: string, hit: HitSubmission): Promise<HitResponse> {
    return this.request("POST", `/sessions/${sessionId}/hits`, hit);
  }

  completeSong(sessionId: string, ordinal: number): Promise<SongCompletion> {
    return this.request("POST", `/sessions/${sessionId}/songs/${ordinal}/complete`);
  }

  leaderboard(date?: string): Promise<LeaderboardJson> {
    const query = date === undefined ? "" : `?date=${encodeURIComponent(date)}`;
    return this.request("GET", `/leaderboard${query}`);
  }

  testPlan(kind: TestKindName, seed: number): Promise<TrialPlanJson> {
    return this.request("POST", `/tests/${kind}/plans`, { seed });
  }

  postTestResults(
    kind: TestKindName,
    participantId: string,
    phase: string,
    planSeed: number,
    responses: ResponseEntry[],
  ): Promise<{ stored: boolean; summary: Record<string, unknown> }> {
    return this.request("POST", `/tests/${kind}/results`, {
      participant_id: participantId,
      phase,
      plan_seed: planSeed,
      responses,
    });
  }
}
