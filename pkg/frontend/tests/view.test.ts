import { describe, expect, it } from "vitest";

import { deliver, emptyMailbox } from "../src/net";
import type { EventMsg, StateMsg } from "../src/protocol";
import { STALE_AFTER_MS, deriveView, ringSprites } from "../src/view";

const CIRC = 2 * Math.PI * 42;

function stateMsg(overrides: Partial<StateMsg["ego"]> = {}, n = 21): StateMsg {
  const vehicles = Array.from({ length: n }, (_, i) => ({
    id: i,
    pos: (i * CIRC) / n,
    speed: 4,
    length: 4,
    ego: i === 0,
  }));
  return {
    type: "state",
    t: 80.0,
    vehicles,
    ego: { gap: 5.3, v: 4.0, vcmd: 4.4, S_acc: 0.2, S_brake: 0, K_hc: 60, S_target: 0.25, ...overrides },
  };
}

function inputsWith(extra: Partial<Parameters<typeof deriveView>[0]> = {}) {
  return {
    state: stateMsg(),
    lastEvent: null,
    end: null,
    baseStiffness: 60,
    circumference: CIRC,
    receivedAtMs: 1000,
    nowMs: 1050,
    ...extra,
  };
}

describe("ring sprites", () => {
  it("draws one sprite per vehicle", () => {
    const sprites = ringSprites(stateMsg(), CIRC);
    expect(sprites).toHaveLength(21);
    expect(sprites.filter((s) => s.ego)).toHaveLength(1);
  });

  it("positions sit on the unit circle", () => {
    for (const s of ringSprites(stateMsg(), CIRC)) {
      expect(Math.hypot(s.x, s.y)).toBeCloseTo(1.0, 9);
    }
  });
});

describe("deriveView", () => {
  it("is a pure function of its inputs", () => {
    const a = deriveView(inputsWith());
    const b = deriveView(inputsWith());
    expect(a).toEqual(b);
  });

  it("tints the accelerator bar when the controller resists", () => {
    expect(deriveView(inputsWith()).hud.accel.tint).toBe("neutral");
    const resisting = inputsWith({ state: stateMsg({ K_hc: 95 }) });
    expect(deriveView(resisting).hud.accel.tint).toBe("resisting");
    const inviting = inputsWith({ state: stateMsg({ K_hc: 40 }) });
    expect(deriveView(inviting).hud.accel.tint).toBe("inviting");
  });

  it("reflects an event in the same frame it arrives", () => {
    const ev: EventMsg = { type: "event", kind: "failure", time: 480.0 };
    const view = deriveView(inputsWith({ lastEvent: ev }));
    expect(view.banner).toBe("silent failure injected");
  });

  it("collision end shows the session-over banner with the min gap", () => {
    const view = deriveView(inputsWith({
      end: { type: "end", metrics: { collision: true, min_gap_after_failure: 0.0 } },
    }));
    expect(view.over).toBe(true);
    expect(view.banner).toContain("collision");
    expect(view.banner).toContain("0.00 m");
  });

  it("flags a stale connection after half a second", () => {
    const fresh = deriveView(inputsWith({ nowMs: 1000 + STALE_AFTER_MS - 1 }));
    expect(fresh.lagging).toBe(false);
    const stale = deriveView(inputsWith({ nowMs: 1000 + STALE_AFTER_MS + 1 }));
    expect(stale.lagging).toBe(true);
  });

  it("handles the no-state-yet case", () => {
    const view = deriveView(inputsWith({ state: null }));
    expect(view.sprites).toHaveLength(0);
    expect(view.hud.speed).toBe("-");
  });

  it("formats a null commanded speed as a dash (manual condition)", () => {
    const view = deriveView(inputsWith({ state: stateMsg({ vcmd: null }) }));
    expect(view.hud.vcmd).toBe("-");
  });
});

describe("mailbox", () => {
  it("keeps the latest state and remembers events", () => {
    let box = emptyMailbox();
    box = deliver(box, JSON.stringify(stateMsg()), 100);
    box = deliver(box, JSON.stringify({ type: "event", kind: "failure", time: 480 }), 110);
    box = deliver(box, JSON.stringify(stateMsg({ v: 5.0 })), 120);
    expect(box.state?.ego.v).toBe(5.0);
    expect(box.receivedAtMs).toBe(120);
    expect(box.lastEvent?.kind).toBe("failure");
  });

  it("ignores garbage frames", () => {
    const box = deliver(emptyMailbox(), "garbage", 50);
    expect(box).toEqual(emptyMailbox());
  });
});
