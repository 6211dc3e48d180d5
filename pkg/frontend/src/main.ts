/**
 * Wiring: DOM events -> draft operations -> protocol messages, and the
 * render loop on animation frames with latest-snapshot-wins semantics.
 */

import { buildScene } from "./scene";
import { paintScene, paintSparkline } from "./render";
import {
  addVertex,
  adjustRotation,
  adjustScale,
  applyServer,
  clearShape,
  commit,
  createView,
  setCentroid,
  setConnection,
  type SessionView,
} from "./state";
import { screenToWorld } from "./viewport";
import { SessionSocket } from "./ws";
import type { ClientMessage } from "./protocol";

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const sparkF = document.getElementById("spark-f") as HTMLCanvasElement;
const sparkC = document.getElementById("spark-c") as HTMLCanvasElement;
const thetaEl = document.getElementById("theta")!;
const scaleEl = document.getElementById("scale")!;
const badgeEl = document.getElementById("badge")!;
const bannerEl = document.getElementById("banner")!;
const warningEl = document.getElementById("warning")!;
const logEl = document.getElementById("log")!;
const drawButton = document.getElementById("mode-draw") as HTMLButtonElement;
const centroidButton = document.getElementById("mode-centroid") as HTMLButtonElement;

let view: SessionView = createView();
let clickMode: "draw" | "centroid" = "draw";
let dirty = true;

const protocol = location.protocol === "https:" ? "wss" : "ws";
const socket = new SessionSocket(`${protocol}://${location.host}/ws/session`, {
  onMessage: (message) => {
    view = applyServer(view, message);
    dirty = true;
  },
  onConnection: (state) => {
    view = setConnection(view, state);
    dirty = true;
  },
});

function dispatch(result: { view: SessionView; message: ClientMessage | null }) {
  view = result.view;
  if (result.message) socket.send(result.message);
  dirty = true;
}

function canvasPoint(event: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [event.clientX - rect.left, event.clientY - rect.top];
}

canvas.addEventListener("click", (event) => {
  const scene = buildScene(view, canvas.width, canvas.height);
  const [wx, wy] = screenToWorld(scene.viewport, canvasPoint(event));
  if (clickMode === "draw") {
    dispatch(addVertex(view, wx, wy));
  } else {
    dispatch(setCentroid(view, wx, wy));
  }
});

canvas.addEventListener(
  "wheel",
  (event) => {
    event.preventDefault();
    const ticks = event.deltaY < 0 ? 1 : -1;
    dispatch(event.shiftKey ? adjustScale(view, ticks) : adjustRotation(view, ticks));
  },
  { passive: false },
);

drawButton.addEventListener("click", () => {
  clickMode = "draw";
  drawButton.classList.add("active");
  centroidButton.classList.remove("active");
});
centroidButton.addEventListener("click", () => {
  clickMode = "centroid";
  centroidButton.classList.add("active");
  drawButton.classList.remove("active");
});
document.getElementById("clear")!.addEventListener("click", () => dispatch(clearShape(view)));
document.getElementById("commit")!.addEventListener("click", () => dispatch(commit(view)));

function resize() {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  dirty = true;
}
window.addEventListener("resize", resize);

function frame() {
  if (dirty) {
    dirty = false;
    const scene = buildScene(view, canvas.width, canvas.height);
    paintScene(canvas.getContext("2d")!, scene);
    paintSparkline(sparkF.getContext("2d")!, scene.sparklineF, sparkF.width, sparkF.height, "#6ea8fe");
    paintSparkline(sparkC.getContext("2d")!, scene.sparklineC, sparkC.width, sparkC.height, "#e5534b");
    thetaEl.textContent = scene.thetaDisplay;
    scaleEl.textContent = scene.scaleDisplay;
    badgeEl.textContent = scene.segmentBadge
      ? `${scene.segmentBadge} | ${scene.modeBadge}`
      : scene.modeBadge;
    bannerEl.classList.toggle("visible", scene.connection !== "open");
    warningEl.textContent = scene.warning ?? "";
    logEl.textContent = view.log.slice(-14).join("\n");
    logEl.scrollTop = logEl.scrollHeight;
  }
  requestAnimationFrame(frame);
}

resize();
requestAnimationFrame(frame);
