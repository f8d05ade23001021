import { blockProgress, visibleBlocks } from "./game.js";
import type { BeatMapJson, BlockJson } from "./types.js";

export interface HudState {
  streakRun: number;
  songGs: number | null;
  lastPoints: { blockIndex: number; points: number; atMs: number } | null;
  excellentUntilMs: number;
}

const INK_COLORS = { red: "#e03131", blue: "#1971c2" } as const;

/** Fixed-camera playfield: two channels approach a hit plane near the bottom. */
export function drawFrame(
  ctx: CanvasRenderingContext2D,
  map: BeatMapJson,
  songTimeS: number,
  hud: HudState,
  nowMs: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = map.mode === "color" ? "#ffffff" : "#111111";
  ctx.fillRect(0, 0, width, height);
  const textColor = map.mode === "color" ? "#111111" : "#eeeeee";

  const planeY = height * 0.82;
  ctx.strokeStyle = "#868e96";
  ctx.setLineDash([8, 6]);
  ctx.beginPath();
  ctx.moveTo(0, planeY);
  ctx.lineTo(width, planeY);
  ctx.stroke();
  ctx.setLineDash([]);

  for (const block of visibleBlocks(map, songTimeS)) {
    drawBlock(ctx, block, songTimeS, width, planeY);
  }

  ctx.fillStyle = textColor;
  ctx.font = "16px system-ui, sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(`streak ${hud.streakRun}`, 12, 24);
  if (hud.songGs !== null) ctx.fillText(`gs ${hud.songGs.toFixed(2)}`, 12, 46);
  if (hud.lastPoints !== null && nowMs - hud.lastPoints.atMs < 900) {
    ctx.font = "28px system-ui, sans-serif";
    ctx.fillText(`+${hud.lastPoints.points}`, 12, 84);
  }
  if (nowMs < hud.excellentUntilMs) {
    ctx.font = "bold 42px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillStyle = "#f08c00";
    ctx.fillText("Excellent!", width / 2, height * 0.3);
  }
}

function drawBlock(
  ctx: CanvasRenderingContext2D,
  block: BlockJson,
  songTimeS: number,
  width: number,
  planeY: number,
): void {
  const progress = Math.min(1.15, Math.max(0, blockProgress(block, songTimeS)));
  const laneX = block.channel === "left" ? width * 0.32 : width * 0.68;
  // Approach from the top; target height nudges the lane horizontally a little
  // so reach direction is visible on a 2D field.
  const y = 40 + progress * (planeY - 40);
  const x = laneX + (block.target_height_cm - 115) * 0.8;
  const w = 86;
  const h = 40;
  ctx.fillStyle = "#f1f3f5";
  ctx.strokeStyle = "#495057";
  ctx.beginPath();
  ctx.roundRect(x - w / 2, y - h / 2, w, h, 8);
  ctx.fill();
  ctx.stroke();
  ctx.fillStyle = INK_COLORS[block.ink];
  ctx.font = "bold 20px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(block.word.toUpperCase(), x, y);
  ctx.textBaseline = "alphabetic";
}
