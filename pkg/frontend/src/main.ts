import { ApiClient } from "./api.js";
import { RafClock } from "./clock.js";
import { SABER_FOR_SIDE, SwingTracker, composeHit, hitPlaneTimeS } from "./game.js";
import { FeedbackChannel } from "./realtime.js";
import { drawFrame, type HudState } from "./render.js";
import { TrialRunner } from "./testRunner.js";
import type { BeatMapJson, FeedbackEvent, ResponseEntry, TestKindName } from "./types.js";

const params = new URLSearchParams(location.search);
const apiBase = params.get("api") ?? "";
const api = new ApiClient(apiBase);
const clock = new RafClock();

const canvas = document.getElementById("playfield") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const boardEl = document.getElementById("leaderboard")!;
const testEl = document.getElementById("test-stimulus")!;

function say(text: string): void {
  statusEl.textContent = text;
}

interface PlayState {
  sessionId: string;
  ordinal: number;
  map: BeatMapJson;
  songStartMs: number;
  hud: HudState;
  nextIndex: number;
  done: boolean;
}

let play: PlayState | null = null;
const PIXELS_PER_METER = 420;
const swing = new SwingTracker(clock, PIXELS_PER_METER);

canvas.addEventListener("pointermove", (event) => {
  swing.addSample(event.offsetX, event.offsetY);
});

// The left input (primary button) always swings the red saber, the right
// input (secondary button) the blue one; the pointer position only selects
// which channel the swing lands in.
canvas.addEventListener("contextmenu", (event) => event.preventDefault());
canvas.addEventListener("pointerdown", (event) => {
  const input = event.button === 2 ? "right" : "left";
  const channel = event.offsetX < canvas.width / 2 ? "left" : "right";
  void handleSwing(input, channel, event.offsetY);
});

async function handleSwing(
  input: "left" | "right",
  channel: "left" | "right",
  pointerY: number,
): Promise<void> {
  if (play === null || play.done) return;
  const songTimeS = (clock.now() - play.songStartMs) / 1000;
  // The next unscored block in this channel that is close to the hit plane.
  const candidate = play.map.blocks.find(
    (b) =>
      b.index >= play!.nextIndex &&
      b.channel === channel &&
      Math.abs(songTimeS - hitPlaneTimeS(b)) < 0.35,
  );
  if (candidate === undefined) return;
  const heightCm = candidate.target_height_cm + (canvas.height / 2 - pointerY) / 6;
  const hit = composeHit(
    candidate,
    SABER_FOR_SIDE[input],
    swing.speedMps(),
    heightCm,
    songTimeS,
    clock.now(),
  );
  try {
    const response = await api.postHit(play.sessionId, hit);
    play.nextIndex = candidate.index + 1;
    play.hud.lastPoints = {
      blockIndex: candidate.index,
      points: response.result.points,
      atMs: clock.now(),
    };
  } catch {
    // Rejected hits (already scored / out of order) change nothing.
  }
}

function onFeedback(event: FeedbackEvent): void {
  if (play === null) return;
  if (event.kind === "Excellent") {
    play.hud.excellentUntilMs = clock.now() + 1200;
  } else if (event.kind === "BlockScored") {
    const payload = event.payload as { outcome: string };
    play.hud.streakRun = payload.outcome === "great" ? play.hud.streakRun + 1 : 0;
    if (play.hud.streakRun >= 5) play.hud.streakRun = 0;
  } else if (event.kind === "SongComplete") {
    play.hud.songGs = (event.payload as { gs: number }).gs;
    play.done = true;
    void refreshLeaderboard();
  }
}

function renderLoop(): void {
  if (play !== null) {
    const songTimeS = (clock.now() - play.songStartMs) / 1000;
    drawFrame(ctx, play.map, songTimeS, play.hud, clock.now());
    if (!play.done && songTimeS > hitPlaneTimeS(play.map.blocks[play.map.blocks.length - 1]!) + 1) {
      play.done = true;
      void api.completeSong(play.sessionId, play.ordinal).then((c) => {
        if (play !== null) play.hud.songGs = c.gs;
        void refreshLeaderboard();
      });
    }
  }
  clock.requestFrame(renderLoop);
}
clock.requestFrame(renderLoop);

async function refreshLeaderboard(): Promise<void> {
  const board = await api.leaderboard();
  const lines = board.entries.map(
    (entry, i) => `${i + 1}. ${entry.participant_id} — ${entry.best_gs.toFixed(2)}`,
  );
  boardEl.textContent =
    (board.daily_champion ? `today's champion: ${board.daily_champion}\n` : "") + lines.join("\n");
}

document.getElementById("start-song")!.addEventListener("click", async () => {
  const participant = (document.getElementById("participant") as HTMLInputElement).value || "demo";
  const ordinal = Number((document.getElementById("session-ordinal") as HTMLInputElement).value || "1");
  const session = await api.createSession(participant, ordinal);
  const songOrdinal = 1;
  const channel = new FeedbackChannel(
    `${apiBase.replace(/^http/, "ws") || `ws://${location.host}`}/sessions/${session.session_id}/stream`,
    (url) => new WebSocket(url) as unknown as import("./realtime.js").SocketLike,
    onFeedback,
  );
  channel.connect();
  const started = await api.startSong(session.session_id, songOrdinal);
  play = {
    sessionId: session.session_id,
    ordinal: songOrdinal,
    map: started.beatmap,
    songStartMs: clock.now(),
    hud: { streakRun: 0, songGs: null, lastPoints: null, excellentUntilMs: 0 },
    nextIndex: 0,
    done: false,
  };
  say(`playing ${started.beatmap.song_id} (${session.level}, ${started.beatmap.mode} mode)`);
});

document.getElementById("run-test")!.addEventListener("click", async () => {
  const participant = (document.getElementById("participant") as HTMLInputElement).value || "demo";
  const kind = (document.getElementById("test-kind") as HTMLSelectElement).value as TestKindName;
  const seed = Math.floor(Math.random() * 1e9);
  const plan = await api.testPlan(kind, seed);
  say(`running ${kind}: 160 trials`);
  const runner: TrialRunner = new TrialRunner(plan, clock, {
    onPhase: (trialIndex, phase) => {
      const trial = plan.trials[trialIndex]!;
      if (phase === "fixation") {
        testEl.style.background = kind === "stroop" ? "#ffffff" : kind === "reverse_stroop" ? "#111111" : "#222222";
        testEl.style.color = "#e03131";
        testEl.textContent = "+";
      } else if (phase === "stimulus") {
        if (kind === "go_nogo") {
          testEl.style.color = "#eeeeee";
          testEl.textContent = trial.arrow === "left" ? "←" : "→";
        } else {
          testEl.style.color = trial.ink === "red" ? "#e03131" : "#1971c2";
          testEl.textContent = trial.word!.toUpperCase();
        }
      } else if (phase === "response") {
        testEl.textContent = "?";
        testEl.style.color = "#adb5bd";
      } else {
        testEl.textContent = "";
      }
    },
    onComplete: (responses: ResponseEntry[]) => {
      void api
        .postTestResults(kind, participant, "pre", seed, responses)
        .then((res) => say(`summary: ${JSON.stringify(res.summary)}`))
        .catch((err) => say(`upload failed: ${err}`));
    },
  });
  const keyListener = (event: KeyboardEvent) => {
    const key = event.key === " " ? "space" : event.key.toLowerCase();
    runner.keydown(key);
    if (runner.isDone) window.removeEventListener("keydown", keyListener);
  };
  window.addEventListener("keydown", keyListener);
  window.addEventListener("blur", () => runner.invalidateCurrentTrial("window lost focus"), { once: true });
  runner.start();
});

document.getElementById("refresh-board")!.addEventListener("click", () => void refreshLeaderboard());
void refreshLeaderboard().catch(() => say("service unreachable; set ?api=http://host:port"));
