/** Canvas painter. Consumes a prebuilt scene; never touches session data. */

import type { Scene } from "./scene";
import { sparklinePath } from "./scene";
import type { Vec2 } from "./protocol";

function tracePath(ctx: CanvasRenderingContext2D, points: Vec2[], close: boolean) {
  ctx.beginPath();
  points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  if (close) ctx.closePath();
}

export function paintScene(ctx: CanvasRenderingContext2D, scene: Scene) {
  const { width, height } = scene.viewport;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);

  // ghosted intermediate shapes, fading toward the goal
  scene.ghosts.forEach((shape, i) => {
    if (shape.length < 2) return;
    const fade = 0.15 + (0.5 * (i + 1)) / scene.ghosts.length;
    ctx.strokeStyle = `rgba(110, 168, 254, ${fade.toFixed(3)})`;
    ctx.lineWidth = i === scene.ghosts.length - 1 ? 2 : 1;
    tracePath(ctx, shape, true);
    ctx.stroke();
  });

  // the operator's draft outline
  if (scene.draftOutline.length > 0) {
    ctx.strokeStyle = "#f2cc60";
    ctx.lineWidth = 1.5;
    tracePath(ctx, scene.draftOutline, scene.draftOutline.length > 2);
    ctx.stroke();
    ctx.fillStyle = "#f2cc60";
    for (const [x, y] of scene.draftOutline) {
      ctx.beginPath();
      ctx.moveTo(x, y - 4);
      ctx.lineTo(x - 4, y + 3);
      ctx.lineTo(x + 4, y + 3);
      ctx.closePath();
      ctx.fill();
    }
  }

  if (scene.draftCentroid) {
    const [x, y] = scene.draftCentroid;
    ctx.strokeStyle = "#ff7b72";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(x - 6, y);
    ctx.lineTo(x + 6, y);
    ctx.moveTo(x, y - 6);
    ctx.lineTo(x, y + 6);
    ctx.stroke();
  }

  // agents
  ctx.fillStyle = "#e5534b";
  for (const [x, y] of scene.agents) {
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function paintSparkline(
  ctx: CanvasRenderingContext2D,
  values: number[],
  width: number,
  height: number,
  color: string,
) {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const path = sparklinePath(values, width, height);
  if (path.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  tracePath(ctx, path, false);
  ctx.stroke();
}
