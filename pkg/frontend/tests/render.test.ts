import { describe, expect, it } from "vitest";

import { drawFrame } from "../src/render";
import { deriveView } from "../src/view";
import type { StateMsg } from "../src/protocol";

const CIRC = 2 * Math.PI * 42;

function makeState(n = 21): StateMsg {
  return {
    type: "state",
    t: 123.4,
    vehicles: Array.from({ length: n }, (_, i) => ({
      id: i,
      pos: (i * CIRC) / n,
      speed: 4,
      length: 4,
      ego: i === 0,
    })),
    ego: { gap: 5.3, v: 4, vcmd: 4.4, S_acc: 0.2, S_brake: 0, K_hc: 95, S_target: 0.1 },
  };
}

/** Stub 2D context that counts draw calls instead of rasterizing. */
function stubContext() {
  const calls = { rects: 0, arcs: 0, texts: 0 };
  const noop = () => undefined;
  const ctx = {
    canvas: { width: 760, height: 680 },
    clearRect: noop,
    fillRect: () => void calls.rects++,
    strokeRect: noop,
    beginPath: noop,
    arc: () => void calls.arcs++,
    stroke: noop,
    fill: noop,
    save: noop,
    restore: noop,
    translate: noop,
    rotate: noop,
    fillText: () => void calls.texts++,
    set fillStyle(_: unknown) {},
    set strokeStyle(_: unknown) {},
    set lineWidth(_: unknown) {},
    set font(_: unknown) {},
    set textAlign(_: unknown) {},
  } as unknown as CanvasRenderingContext2D;
  return { ctx, calls };
}

function view(state: StateMsg) {
  return deriveView({
    state,
    lastEvent: { type: "event", kind: "collision", time: 200 },
    end: null,
    baseStiffness: 60,
    circumference: CIRC,
    receivedAtMs: 0,
    nowMs: 100,
  });
}

describe("drawFrame", () => {
  it("draws every vehicle exactly once", () => {
    const { ctx, calls } = stubContext();
    drawFrame(ctx, view(makeState()));
    // 21 vehicle bodies + 2 pedal bar fills + 2 target notches + banner
    expect(calls.rects).toBe(21 + 2 + 2 + 1);
  });

  it("stays fast enough for a 30 fps budget", () => {
    const { ctx } = stubContext();
    const v = view(makeState());
    const t0 = performance.now();
    for (let i = 0; i < 300; i++) drawFrame(ctx, v);
    const perFrame = (performance.now() - t0) / 300;
    expect(perFrame).toBeLessThan(5); // well under the 33 ms frame budget
  });
});
