/** Thin canvas renderer for a laid-out scene graph.
 *
 * All geometry comes from the scene layout; this file only converts polar
 * positions to pixels and draws.  Kept minimal and untested beyond type
 * checking — everything decision-relevant lives in scene.ts.
 */

import { normalizeAngle } from "./angle.js";
import type { PolarPosition, SceneGraph, SceneNode } from "./scene.js";

export interface RenderOptions {
  /** 0 at the start of a transition, 1 when settled. */
  animationT?: number;
  highlightAngle?: number | null;
}

const KIND_COLORS: Record<string, string> = {
  plain: "#2b6cb0",
  wildcard: "#6b46c1",
  stop: "#2f855a",
  goback: "#c53030",
};

function toPixels(canvas: HTMLCanvasElement, pos: PolarPosition): { x: number; y: number } {
  const cx = canvas.width / 2;
  const cy = canvas.height / 2;
  // screen y is down, so the math angle's sine is negated
  return { x: cx + pos.radius * Math.cos(pos.angle), y: cy - pos.radius * Math.sin(pos.angle) };
}

function lerpPolar(from: PolarPosition, to: PolarPosition, t: number): PolarPosition {
  const delta = ((normalizeAngle(to.angle) - normalizeAngle(from.angle) + 3 * Math.PI) % (2 * Math.PI)) - Math.PI;
  return {
    angle: normalizeAngle(from.angle + delta * t),
    radius: from.radius + (to.radius - from.radius) * t,
  };
}

function drawNode(ctx: CanvasRenderingContext2D, canvas: HTMLCanvasElement, node: SceneNode, t: number): void {
  const target: PolarPosition = { angle: node.angle, radius: node.radius };
  const pos = node.from !== null ? lerpPolar(node.from, target, t) : target;
  const { x, y } = toPixels(canvas, pos);
  ctx.beginPath();
  ctx.fillStyle = KIND_COLORS[node.kind] ?? "#4a5568";
  ctx.globalAlpha = node.from === null ? t : 1;
  ctx.arc(x, y, node.size, 0, 2 * Math.PI);
  ctx.fill();
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#1a202c";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.font = "14px sans-serif";
  ctx.fillText(node.label, x, y - node.size - 10);
}

export function renderScene(canvas: HTMLCanvasElement, scene: SceneGraph, options: RenderOptions = {}): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const t = Math.min(Math.max(options.animationT ?? 1, 0), 1);
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  ctx.fillStyle = "#1a202c";
  ctx.font = "18px sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillText(`typed: ${scene.decidedText || "—"}`, 12, 12);
  ctx.font = "13px sans-serif";
  ctx.fillText(
    `query ${scene.trialIndex} · ${scene.expectedInformationBits.toFixed(2)} / ${scene.capacityBits.toFixed(2)} bits`,
    12,
    36,
  );

  const center = toPixels(canvas, { angle: 0, radius: 0 });
  ctx.font = "16px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(scene.rootLabel, center.x, center.y);

  for (const node of scene.nodes) {
    drawNode(ctx, canvas, node, t);
  }

  if (options.highlightAngle !== null && options.highlightAngle !== undefined) {
    const tip = toPixels(canvas, { angle: options.highlightAngle, radius: Math.min(canvas.width, canvas.height) / 2 - 10 });
    ctx.strokeStyle = "#718096";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(center.x, center.y);
    ctx.lineTo(tip.x, tip.y);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}
