// View-model derivation: the latest server messages in, a plain drawable
// description out. No simulation logic lives here — the same message stream
// always yields the same ViewState (the render layer just draws it).

import type { EndMsg, EventMsg, StateMsg } from "./protocol";

export const STALE_AFTER_MS = 500;

export interface Sprite {
  x: number;
  y: number;
  heading: number;
  ego: boolean;
}

export interface PedalBar {
  value: number; // 0..1 deflection
  target: number; // 0..1 controller wish (accelerator only)
  tint: "neutral" | "resisting" | "inviting";
}

export interface Hud {
  time: string;
  speed: string;
  gap: string;
  vcmd: string;
  stiffness: string;
  accel: PedalBar;
  brake: PedalBar;
}

export interface ViewState {
  sprites: Sprite[];
  hud: Hud;
  banner: string | null;
  lagging: boolean;
  over: boolean;
}

export interface ViewInputs {
  state: StateMsg | null;
  lastEvent: EventMsg | null;
  end: EndMsg | null;
  baseStiffness: number;
  circumference: number;
  receivedAtMs: number; // wall clock when `state` arrived
  nowMs: number;
}

function fmt(value: number | null | undefined, digits: number, unit: string): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "-";
  return `${value.toFixed(digits)}${unit}`;
}

export function bannerFor(event: EventMsg | null, end: EndMsg | null): string | null {
  if (end !== null) {
    const gap = end.metrics["min_gap_after_failure"];
    const suffix = typeof gap === "number" ? ` - min gap ${gap.toFixed(2)} m` : "";
    if (end.metrics["collision"]) return `session over: collision${suffix}`;
    return `session over${suffix}`;
  }
  if (event === null) return null;
  switch (event.kind) {
    case "failure":
      return "silent failure injected";
    case "collision":
      return "collision!";
    case "jam_dissipated":
      return "traffic jam dissipated";
    case "intervention":
      return "driver intervention";
    default:
      return event.kind;
  }
}

/** Map arc positions onto the unit circle; the canvas scales the result. */
export function ringSprites(state: StateMsg, circumference: number): Sprite[] {
  return state.vehicles.map((v) => {
    const theta = (v.pos / circumference) * 2 * Math.PI - Math.PI / 2;
    return {
      x: Math.cos(theta),
      y: Math.sin(theta),
      heading: theta + Math.PI / 2,
      ego: v.ego,
    };
  });
}

export function deriveView(inputs: ViewInputs): ViewState {
  const { state } = inputs;
  if (state === null) {
    return {
      sprites: [],
      hud: {
        time: "-", speed: "-", gap: "-", vcmd: "-", stiffness: "-",
        accel: { value: 0, target: 0, tint: "neutral" },
        brake: { value: 0, target: 0, tint: "neutral" },
      },
      banner: bannerFor(inputs.lastEvent, inputs.end),
      lagging: false,
      over: inputs.end !== null,
    };
  }
  const ego = state.ego;
  let tint: PedalBar["tint"] = "neutral";
  if (ego.K_hc > inputs.baseStiffness + 1e-9) tint = "resisting";
  else if (ego.K_hc < inputs.baseStiffness - 1e-9) tint = "inviting";
  return {
    sprites: ringSprites(state, inputs.circumference),
    hud: {
      time: fmt(state.t, 1, " s"),
      speed: fmt(ego.v, 2, " m/s"),
      gap: fmt(ego.gap, 2, " m"),
      vcmd: fmt(ego.vcmd, 2, " m/s"),
      stiffness: fmt(ego.K_hc, 0, " N/rad"),
      accel: { value: ego.S_acc, target: ego.S_target, tint },
      brake: { value: ego.S_brake, target: 0, tint: "neutral" },
    },
    banner: bannerFor(inputs.lastEvent, inputs.end),
    lagging: inputs.nowMs - inputs.receivedAtMs > STALE_AFTER_MS,
    over: inputs.end !== null,
  };
}
