// Canvas drawing of a ViewState. Deliberately dumb: everything it shows was
// decided in view.ts.

import type { ViewState } from "./view";

const TINT_COLORS = { neutral: "#3a7", resisting: "#d33", inviting: "#39d" } as const;

export function drawFrame(ctx: CanvasRenderingContext2D, view: ViewState): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.38;

  // road
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 18;
  ctx.beginPath();
  ctx.arc(cx, cy, radius, 0, 2 * Math.PI);
  ctx.stroke();

  // vehicles
  for (const s of view.sprites) {
    ctx.save();
    ctx.translate(cx + s.x * radius, cy + s.y * radius);
    ctx.rotate(s.heading);
    ctx.fillStyle = s.ego ? "#4af" : "#e55";
    ctx.fillRect(-5, -9, 10, 18);
    ctx.restore();
  }

  drawHud(ctx, view);
  if (view.lagging) overlay(ctx, "connection lagging");
  if (view.banner) banner(ctx, view.banner, view.over);
}

function drawHud(ctx: CanvasRenderingContext2D, view: ViewState): void {
  const { hud } = view;
  ctx.fillStyle = "#eee";
  ctx.font = "14px monospace";
  const lines = [
    `t     ${hud.time}`,
    `v     ${hud.speed}`,
    `gap   ${hud.gap}`,
    `v_cmd ${hud.vcmd}`,
    `K_hc  ${hud.stiffness}`,
  ];
  lines.forEach((line, i) => ctx.fillText(line, 12, 22 + 18 * i));

  bar(ctx, 12, 130, hud.accel.value, hud.accel.target, TINT_COLORS[hud.accel.tint], "acc");
  bar(ctx, 12, 160, hud.brake.value, hud.brake.target, TINT_COLORS[hud.brake.tint], "brk");
}

function bar(
  ctx: CanvasRenderingContext2D,
  x: number,
  y: number,
  value: number,
  target: number,
  color: string,
  label: string,
): void {
  ctx.fillStyle = "#eee";
  ctx.fillText(label, x, y + 11);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(x + 36, y, 120, 14);
  ctx.fillStyle = color;
  ctx.fillRect(x + 36, y, 120 * Math.min(1, Math.max(0, value)), 14);
  // controller wish as a notch
  ctx.fillStyle = "#fd0";
  ctx.fillRect(x + 36 + 120 * Math.min(1, Math.max(0, target)) - 1, y - 2, 2, 18);
}

function overlay(ctx: CanvasRenderingContext2D, text: string): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "rgba(0,0,0,0.5)";
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = "#fc0";
  ctx.font = "20px monospace";
  ctx.textAlign = "center";
  ctx.fillText(text, width / 2, height / 2);
  ctx.textAlign = "left";
}

function banner(ctx: CanvasRenderingContext2D, text: string, over: boolean): void {
  const { width } = ctx.canvas;
  ctx.fillStyle = over ? "rgba(160,30,30,0.85)" : "rgba(30,90,160,0.85)";
  ctx.fillRect(0, 0, width, 34);
  ctx.fillStyle = "#fff";
  ctx.font = "16px monospace";
  ctx.textAlign = "center";
  ctx.fillText(text, width / 2, 22);
  ctx.textAlign = "left";
}
