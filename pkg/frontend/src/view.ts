// Dashboard view model and the 2-D schematic.
//
// buildViewModel is a pure function from console state to display strings,
// which is what the tests pin down: every value equals the corresponding
// snapshot field, formatted, with warning flags derived from thresholds.
// The schematic drawing takes a tiny canvas-context interface so it stays
// testable without a browser.

import { StateMessage } from "./protocol.js";
import { ConsoleState, HistoryEntry } from "./state.js";

export const MARGIN_WARNING_M = 0.01;

export interface LegView {
  name: string;
  extension: string;
  tilt: string;
  contact: boolean;
  load: string;
  limit: string;
  nearBucklingLimit: boolean;
}

export interface ViewModel {
  connection: string;
  role: string;
  driverControlsEnabled: boolean;
  time: string;
  height: string;
  margin: string;
  marginWarning: boolean;
  power: string;
  energy: string;
  legs: LegView[];
  failures: string[];
  ceilingBreach: boolean;
  history: HistoryEntry[];
  lastError: string | null;
}

const LEG_NAMES = ["FL", "FR", "BL", "BR"];

export function buildViewModel(state: ConsoleState): ViewModel {
  const snap = state.snapshot;
  const connected = state.connection === "connected";
  const legs: LegView[] = LEG_NAMES.map((name, i) => {
    if (!snap) {
      return { name, extension: "-", tilt: "-", contact: false, load: "-", limit: "-", nearBucklingLimit: false };
    }
    const limit = snap.limit_n[i];
    const load = snap.load_n[i];
    return {
      name,
      extension: snap.ext_m[i].toFixed(4),
      tilt: snap.tilt_deg[i].toFixed(1),
      contact: snap.contact[i],
      load: load.toFixed(3),
      limit: limit === null ? "unbounded" : limit.toFixed(2),
      nearBucklingLimit: limit !== null && load > 0.8 * limit,
    };
  });
  return {
    connection: state.connection,
    role: state.role,
    driverControlsEnabled: connected && state.role === "driver",
    time: snap ? snap.t_s.toFixed(2) : "-",
    height: snap ? snap.standing_height_m.toFixed(4) : "-",
    margin: snap ? (snap.margin_m === null ? "n/a" : snap.margin_m.toFixed(4)) : "-",
    marginWarning: !!snap && snap.margin_m !== null && snap.margin_m < MARGIN_WARNING_M,
    power: snap ? snap.power_w.toFixed(3) : "-",
    energy: snap ? snap.energy_j.toFixed(2) : "-",
    legs,
    failures: snap ? [...snap.failures] : [],
    ceilingBreach: !!snap && snap.ceiling_breach,
    history: [...state.history].reverse().slice(0, 12),
    lastError: state.lastError,
  };
}

// -- schematic ---------------------------------------------------------------

export interface SchematicContext {
  clear(): void;
  line(x1: number, y1: number, x2: number, y2: number, color: string): void;
  rect(x: number, y: number, w: number, h: number, color: string, fill: boolean): void;
  circle(x: number, y: number, r: number, color: string): void;
  text(x: number, y: number, value: string, color: string): void;
}

export interface EnvironmentView {
  boxes: Array<{ min: [number, number, number]; size: [number, number, number] }>;
  ceiling: number | null;
}

// world metres -> pixels for the side view (x right, z up)
export function sideProjection(width: number, height: number, centerX: number) {
  const scale = 520;
  return {
    x: (wx: number) => width / 2 + (wx - centerX) * scale,
    y: (wz: number) => height - 24 - wz * scale,
  };
}

export function drawSideView(
  ctx: SchematicContext,
  width: number,
  height: number,
  snap: StateMessage,
  env: EnvironmentView,
): void {
  const proj = sideProjection(width, height, snap.pose.x_m);
  ctx.clear();
  ctx.line(0, proj.y(0), width, proj.y(0), "#666");
  if (env.ceiling !== null) {
    ctx.line(0, proj.y(env.ceiling), width, proj.y(env.ceiling), "#a66");
  }
  for (const box of env.boxes) {
    const x = proj.x(box.min[0]);
    const top = proj.y(box.min[2] + box.size[2]);
    ctx.rect(x, top, (proj.x(box.min[0] + box.size[0]) - x), proj.y(box.min[2]) - top, "#884", true);
  }

  // body: side silhouette, 0.10 deep, drawn from the pose with pitch
  const bodyH = 0.085;
  const cx = snap.pose.x_m;
  const cz = snap.pose.z_m;
  const pitch = snap.pose.pitch_rad;
  const corners: Array<[number, number]> = [
    [-0.05, 0], [0.05, 0], [0.05, bodyH], [-0.05, bodyH],
  ];
  const world = corners.map(([bx, bz]) => [
    cx + bx * Math.cos(pitch) + bz * Math.sin(pitch),
    cz - bx * Math.sin(pitch) + bz * Math.cos(pitch),
  ]);
  for (let i = 0; i < 4; i++) {
    const [x1, z1] = world[i];
    const [x2, z2] = world[(i + 1) % 4];
    ctx.line(proj.x(x1), proj.y(z1), proj.x(x2), proj.y(z2), "#6cf");
  }

  // legs: mount at the body bottom corners, drawn by tilt and extension
  const mounts = [0.05, 0.05, -0.05, -0.05];
  for (let i = 0; i < 4; i++) {
    const tilt = (snap.tilt_deg[i] * Math.PI) / 180;
    const len = 0.025 + snap.ext_m[i];
    const mx = cx + mounts[i] * Math.cos(pitch);
    const mz = cz - mounts[i] * Math.sin(pitch);
    const fx = mx + len * Math.sin(tilt + pitch);
    const fz = mz - len * Math.cos(tilt + pitch);
    const color = snap.contact[i] ? "#8f8" : "#fd7";
    ctx.line(proj.x(mx), proj.y(mz), proj.x(fx), proj.y(fz), color);
    ctx.circle(proj.x(fx), proj.y(fz), 3, color);
  }
  ctx.text(8, 14, `side view  x=${snap.pose.x_m.toFixed(3)} m`, "#999");
}

export function drawTopView(
  ctx: SchematicContext,
  width: number,
  height: number,
  snap: StateMessage,
  env: EnvironmentView,
): void {
  const scale = 520;
  const px = (wx: number) => width / 2 + (wx - snap.pose.x_m) * scale;
  const py = (wy: number) => height / 2 - (wy - snap.pose.y_m) * scale;
  ctx.clear();
  for (const box of env.boxes) {
    const x = px(box.min[0]);
    const y = py(box.min[1] + box.size[1]);
    ctx.rect(x, y, px(box.min[0] + box.size[0]) - x, py(box.min[1]) - y, "#884", true);
  }
  const yaw = snap.pose.yaw_rad;
  const body: Array<[number, number]> = [
    [-0.05, -0.045], [0.05, -0.045], [0.05, 0.045], [-0.05, 0.045],
  ];
  const world = body.map(([bx, by]) => [
    snap.pose.x_m + bx * Math.cos(yaw) - by * Math.sin(yaw),
    snap.pose.y_m + bx * Math.sin(yaw) + by * Math.cos(yaw),
  ]);
  for (let i = 0; i < 4; i++) {
    const [x1, y1] = world[i];
    const [x2, y2] = world[(i + 1) % 4];
    ctx.line(px(x1), py(y1), px(x2), py(y2), "#6cf");
  }
  const mounts: Array<[number, number]> = [
    [0.05, 0.045], [0.05, -0.045], [-0.05, 0.045], [-0.05, -0.045],
  ];
  for (let i = 0; i < 4; i++) {
    const tilt = (snap.tilt_deg[i] * Math.PI) / 180;
    const len = 0.025 + snap.ext_m[i];
    const [bx, by] = mounts[i];
    const fxb = bx + len * Math.sin(tilt);
    const wx = snap.pose.x_m + fxb * Math.cos(yaw) - by * Math.sin(yaw);
    const wy = snap.pose.y_m + fxb * Math.sin(yaw) + by * Math.cos(yaw);
    const color = snap.contact[i] ? "#8f8" : "#fd7";
    ctx.circle(px(wx), py(wy), 4, color);
  }
  ctx.text(8, 14, "top view", "#999");
}
