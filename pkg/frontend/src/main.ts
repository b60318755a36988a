import { initialPedals, keyDown, keyUp, stepPedals } from "./input";
import { Client } from "./net";
import { inputMessage, startMessage, stopMessage, type ConditionName } from "./protocol";
import { drawFrame } from "./render";
import { deriveView } from "./view";

// Must match the server defaults; sent values are normalized so only the
// ring circumference (for drawing) and base stiffness (for the tint) matter.
const CIRCUMFERENCE = 2 * Math.PI * 42.0;
const BASE_STIFFNESS = 60.0;
const INPUT_HZ = 30;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host || "127.0.0.1:8700"}`;
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("ring");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const conditionSel = byId<HTMLSelectElement>("condition");
  const seedInput = byId<HTMLInputElement>("seed");
  const durationInput = byId<HTMLInputElement>("duration");
  const startBtn = byId<HTMLButtonElement>("start");
  const stopBtn = byId<HTMLButtonElement>("stop");
  const statusEl = byId<HTMLSpanElement>("status");

  const client = new Client(wsUrl());
  client.onerror = (reason) => {
    statusEl.textContent = `error: ${reason}`;
  };
  client.whenOpen(() => {
    statusEl.textContent = "connected";
  });

  let pedals = initialPedals();
  let running = false;

  startBtn.onclick = () => {
    if (running) return;
    const condition = conditionSel.value as ConditionName;
    const seed = parseInt(seedInput.value, 10) || 0;
    const duration = parseFloat(durationInput.value);
    client.send(
      startMessage(condition, seed, Number.isFinite(duration) && duration > 0 ? duration : undefined),
    );
    running = true;
    // condition locked for the session, as in the experiment
    conditionSel.disabled = true;
    statusEl.textContent = `driving (${condition})`;
    canvas.focus();
  };
  stopBtn.onclick = () => {
    if (!running) return;
    client.send(stopMessage());
    running = false;
    conditionSel.disabled = false;
  };

  window.addEventListener("keydown", (ev) => {
    pedals = keyDown(pedals, ev.key);
  });
  window.addEventListener("keyup", (ev) => {
    pedals = keyUp(pedals, ev.key);
  });

  // pedal wishes at a fixed 30 Hz
  let lastSend = performance.now();
  setInterval(() => {
    const now = performance.now();
    pedals = stepPedals(pedals, (now - lastSend) / 1000);
    lastSend = now;
    if (running && client.ready) {
      client.send(inputMessage(pedals.accel, pedals.brake));
    }
  }, 1000 / INPUT_HZ);

  const frame = () => {
    const view = deriveView({
      state: client.box.state,
      lastEvent: client.box.lastEvent,
      end: client.box.end,
      baseStiffness: BASE_STIFFNESS,
      circumference: CIRCUMFERENCE,
      receivedAtMs: client.box.receivedAtMs,
      nowMs: performance.now(),
    });
    drawFrame(ctx, view);
    if (view.over && running) {
      running = false;
      conditionSel.disabled = false;
      statusEl.textContent = "session over";
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main();
