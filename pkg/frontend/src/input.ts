// Keyboard-to-pedal mapping: held keys ramp the desired deflection, release
// drops it quickly. Pure state transitions so the mapping is testable; the
// DOM listeners in main.ts only flip the `held` flags.

export interface PedalKeys {
  accelHeld: boolean;
  brakeHeld: boolean;
  accel: number;
  brake: number;
}

export const RAMP_UP_PER_S = 1.0;
export const RAMP_DOWN_PER_S = 4.0;

export function initialPedals(): PedalKeys {
  return { accelHeld: false, brakeHeld: false, accel: 0, brake: 0 };
}

function ramp(value: number, held: boolean, dt: number): number {
  const next = held ? value + RAMP_UP_PER_S * dt : value - RAMP_DOWN_PER_S * dt;
  return Math.min(1, Math.max(0, next));
}

/** Advance the ramps by dt seconds. Pressing the brake zeroes the
 * accelerator wish (safety precedence, mirroring the powertrain rule). */
export function stepPedals(state: PedalKeys, dt: number): PedalKeys {
  const brake = ramp(state.brake, state.brakeHeld, dt);
  let accel = ramp(state.accel, state.accelHeld && !state.brakeHeld, dt);
  if (state.brakeHeld || brake > 0) accel = 0;
  return { ...state, accel, brake };
}

export function keyDown(state: PedalKeys, key: string): PedalKeys {
  if (key === "ArrowUp" || key === "w") return { ...state, accelHeld: true };
  if (key === "ArrowDown" || key === "s" || key === " ") return { ...state, brakeHeld: true };
  return state;
}

export function keyUp(state: PedalKeys, key: string): PedalKeys {
  if (key === "ArrowUp" || key === "w") return { ...state, accelHeld: false };
  if (key === "ArrowDown" || key === "s" || key === " ") return { ...state, brakeHeld: false };
  return state;
}
