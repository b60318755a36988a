// Wire protocol (schema v1) shared with the session service. One JSON
// message per websocket frame; everything here is transport-free and pure.

export const PROTOCOL_VERSION = 1;

export type ConditionName = "manual" | "haptic" | "automated";

export interface VehicleDto {
  id: number;
  pos: number;
  speed: number;
  length: number;
  ego: boolean;
}

export interface EgoDto {
  gap: number;
  v: number;
  vcmd: number | null;
  S_acc: number;
  S_brake: number;
  K_hc: number;
  S_target: number;
}

export interface StateMsg {
  type: "state";
  t: number;
  vehicles: VehicleDto[];
  ego: EgoDto;
}

export interface EventMsg {
  type: "event";
  kind: string;
  time: number;
}

export interface EndMsg {
  type: "end";
  metrics: Record<string, number | boolean | null>;
}

export interface ErrorMsg {
  type: "error";
  reason: string;
}

export type ServerMsg = StateMsg | EventMsg | EndMsg | ErrorMsg;

/** Parse one frame from the server; null for anything malformed. */
export function parseServerMessage(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "state": {
      if (!Array.isArray(msg.vehicles) || typeof msg.t !== "number") return null;
      if (typeof msg.ego !== "object" || msg.ego === null) return null;
      return msg as unknown as StateMsg;
    }
    case "event":
      if (typeof msg.kind !== "string" || typeof msg.time !== "number") return null;
      return msg as unknown as EventMsg;
    case "end":
      if (typeof msg.metrics !== "object" || msg.metrics === null) return null;
      return msg as unknown as EndMsg;
    case "error":
      if (typeof msg.reason !== "string") return null;
      return msg as unknown as ErrorMsg;
    default:
      return null;
  }
}

export function startMessage(condition: ConditionName, seed: number, duration?: number): string {
  const msg: Record<string, unknown> = {
    v: PROTOCOL_VERSION,
    type: "start",
    condition,
    seed,
  };
  if (duration !== undefined) msg.duration = duration;
  return JSON.stringify(msg);
}

/** Desired pedal deflections in [0, 1]; the server runs them through the
 * neuromuscular coupling so haptic stiffness still shapes the result. */
export function inputMessage(accel: number, brake: number): string {
  return JSON.stringify({
    v: PROTOCOL_VERSION,
    type: "input",
    accel_force: accel,
    brake_force: brake,
    mode: "deflection",
  });
}

export function stopMessage(): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type: "stop" });
}
