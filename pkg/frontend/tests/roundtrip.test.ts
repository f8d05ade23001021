import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { blockProgress, correctSaber, hitPlaneTimeS, visibleBlocks } from "../src/game.js";
import { parseBeatMap, serializeBeatMap } from "../src/types.js";

const fixturePath = fileURLToPath(new URL("./fixtures/beatmap.json", import.meta.url));
const fixtureText = readFileSync(fixturePath, "utf-8");

describe("beat map schema round trip", () => {
  it("re-serializes a service-produced map byte for byte", () => {
    const map = parseBeatMap(fixtureText);
    expect(serializeBeatMap(map)).toBe(fixtureText);
  });

  it("rejects malformed blocks", () => {
    const broken = fixtureText.replace('"channel":"left"', '"channel":"middle"');
    expect(() => parseBeatMap(broken)).toThrow(/malformed|middle/);
  });
});

describe("schedule geometry", () => {
  const map = parseBeatMap(fixtureText);

  it("block reaches the hit plane exactly flight_time_s after spawn", () => {
    for (const block of map.blocks.slice(0, 20)) {
      expect(blockProgress(block, block.spawn_time_s)).toBeCloseTo(0, 9);
      expect(blockProgress(block, hitPlaneTimeS(block))).toBeCloseTo(1, 9);
    }
  });

  it("visible set contains exactly the in-flight blocks", () => {
    const probe = map.blocks[4]!;
    const midFlight = probe.spawn_time_s + probe.flight_time_s / 2;
    const visible = visibleBlocks(map, midFlight);
    expect(visible).toContain(probe);
    for (const block of visible) {
      expect(block.spawn_time_s).toBeLessThanOrEqual(midFlight);
      expect(hitPlaneTimeS(block) + 0.2).toBeGreaterThanOrEqual(midFlight);
    }
  });

  it("word mode answers with the word, color mode with the ink", () => {
    const incongruent = map.blocks.find((b) => b.word !== b.ink)!;
    expect(correctSaber(incongruent, "word")).toBe(incongruent.word);
    expect(correctSaber(incongruent, "color")).toBe(incongruent.ink);
  });
});
