// Browser bootstrap: wires the socket client, the dashboard DOM, and the
// two schematic canvases together.  All physical values on screen come from
// server snapshots; this file only formats and forwards.

import { ConsoleClient } from "./client.js";
import { CommandPayload } from "./protocol.js";
import { ConsoleState } from "./state.js";
import {
  buildViewModel,
  drawSideView,
  drawTopView,
  EnvironmentView,
  SchematicContext,
} from "./view.js";

function canvasContext(canvas: HTMLCanvasElement): SchematicContext {
  const ctx = canvas.getContext("2d")!;
  return {
    clear: () => {
      ctx.fillStyle = "#181818";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
    },
    line: (x1, y1, x2, y2, color) => {
      ctx.strokeStyle = color;
      ctx.beginPath();
      ctx.moveTo(x1, y1);
      ctx.lineTo(x2, y2);
      ctx.stroke();
    },
    rect: (x, y, w, h, color, fill) => {
      if (fill) {
        ctx.fillStyle = color;
        ctx.fillRect(x, y, w, h);
      } else {
        ctx.strokeStyle = color;
        ctx.strokeRect(x, y, w, h);
      }
    },
    circle: (x, y, r, color) => {
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(x, y, r, 0, 2 * Math.PI);
      ctx.fill();
    },
    text: (x, y, value, color) => {
      ctx.fillStyle = color;
      ctx.font = "11px monospace";
      ctx.fillText(value, x, y);
    },
  };
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function numberFromInput(id: string): number | null {
  const raw = (byId<HTMLInputElement>(id)).value;
  const value = Number(raw);
  // NaN guard: never let an unparsable slider/field reach the wire
  return Number.isFinite(value) ? value : null;
}

const env: EnvironmentView = { boxes: [], ceiling: null };

async function loadEnvironment(): Promise<void> {
  try {
    const response = await fetch("/environment");
    const doc = (await response.json()) as {
      boxes: Array<{ min_m: [number, number, number]; size_m: [number, number, number] }>;
      ceiling_m: number | null;
    };
    env.boxes = doc.boxes.map((b) => ({ min: b.min_m, size: b.size_m }));
    env.ceiling = doc.ceiling_m;
    render(client.state);
  } catch {
    // schematic simply shows flat ground until the environment loads
  }
}

function render(state: ConsoleState): void {
  const vm = buildViewModel(state);
  byId("conn").textContent = vm.connection;
  byId("role").textContent = vm.role;
  byId("t").textContent = vm.time;
  byId("height").textContent = vm.height;
  const margin = byId("margin");
  margin.textContent = vm.margin;
  margin.className = vm.marginWarning ? "warn" : "";
  byId("power").textContent = vm.power;
  byId("energy").textContent = vm.energy;
  for (let i = 0; i < 4; i++) {
    const leg = vm.legs[i];
    byId(`ext${i}`).textContent = leg.extension;
    byId(`tilt${i}`).textContent = leg.tilt;
    byId(`contact${i}`).textContent = leg.contact ? "ground" : "air";
    const load = byId(`load${i}`);
    load.textContent = `${leg.load} / ${leg.limit}`;
    load.className = leg.nearBucklingLimit ? "warn" : "";
  }
  byId("failures").textContent = vm.failures.length ? vm.failures.join(", ") : "none";
  byId("lastError").textContent = vm.lastError ?? "";
  const history = byId("history");
  history.innerHTML = "";
  for (const entry of vm.history) {
    const li = document.createElement("li");
    li.className = entry.status;
    li.textContent =
      entry.status === "rejected"
        ? `${entry.label}  [rejected: ${entry.reason}]`
        : `${entry.label}  [${entry.status}]`;
    history.appendChild(li);
  }
  document.querySelectorAll("button, input").forEach((el) => {
    (el as HTMLButtonElement).disabled = !vm.driverControlsEnabled;
  });
  document.body.classList.toggle("offline", vm.connection !== "connected");

  if (state.snapshot) {
    drawSideView(sideCtx, side.width, side.height, state.snapshot, env);
    drawTopView(topCtx, top.width, top.height, state.snapshot, env);
  }
}

const side = byId<HTMLCanvasElement>("side");
const top = byId<HTMLCanvasElement>("top");
const sideCtx = canvasContext(side);
const topCtx = canvasContext(top);

const socket = new WebSocket(`ws://${location.host}/ws`);
const client = new ConsoleClient(socket as never, render);

function send(payload: CommandPayload): void {
  client.send(payload);
}

byId("standGo").addEventListener("click", () => {
  const height = numberFromInput("standHeight");
  if (height === null) {
    render({ ...client.state, lastError: "local validation: height is not a number" });
    return;
  }
  send({ kind: "stand_to", height_m: height });
});
byId("crouchGo").addEventListener("click", () => {
  const height = numberFromInput("standHeight");
  if (height === null) return;
  send({ kind: "crouch_to", height_m: height });
});
byId("crawlOne").addEventListener("click", () => send({ kind: "gait", cycles: 1 }));
byId("crawlThree").addEventListener("click", () => send({ kind: "gait", cycles: 3 }));
byId("pushBtn").addEventListener("click", () => send({ kind: "push" }));
byId("resetBtn").addEventListener("click", () => client.reset());

for (let i = 0; i < 4; i++) {
  byId(`step${i}`).addEventListener("click", () => send({ kind: "step", module: i }));
  byId(`extendGo${i}`).addEventListener("click", () => {
    const target = numberFromInput(`extTarget${i}`);
    if (target === null) return;
    send({ kind: "extend", module: i, target_m: target });
  });
  byId(`tiltGo${i}`).addEventListener("click", () => {
    const angle = numberFromInput(`tiltTarget${i}`);
    if (angle === null) return;
    send({ kind: "tilt", module: i, angle_deg: angle });
  });
}

render(client.state);
void loadEnvironment();
