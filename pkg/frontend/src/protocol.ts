// Wire protocol shared with the teleoperation service: UTF-8 JSON text
// frames with type in {command, state, ack, error, reset}.  Everything the
// console sends goes through buildCommandMessage / buildResetMessage so only
// protocol-valid frames can leave the client.

export interface PoseFields {
  x_m: number;
  y_m: number;
  z_m: number;
  roll_rad: number;
  pitch_rad: number;
  yaw_rad: number;
}

export interface StateMessage {
  type: "state";
  t_s: number;
  pose: PoseFields;
  ext_m: number[];
  tilt_deg: number[];
  contact: boolean[];
  load_n: number[];
  limit_n: (number | null)[];
  margin_m: number | null;
  power_w: number;
  energy_j: number;
  standing_height_m: number;
  ceiling_breach: boolean;
  failures: string[];
}

export interface AckMessage {
  type: "ack";
  id: string | null;
  role?: "driver" | "viewer";
}

export interface ErrorMessage {
  type: "error";
  id: string | null;
  reason: string;
}

export type ServerMessage = StateMessage | AckMessage | ErrorMessage;

export type CommandKind =
  | "extend"
  | "retract"
  | "tilt"
  | "step"
  | "push"
  | "stand_to"
  | "crouch_to"
  | "reach"
  | "gait";

export interface CommandPayload {
  kind: CommandKind;
  module?: number;
  target_m?: number;
  height_m?: number;
  angle_deg?: number;
  cycles?: number;
}

export interface CommandMessage {
  type: "command";
  id: string;
  command: CommandPayload;
}

export interface ResetMessage {
  type: "reset";
  id: string;
}

const COMMAND_KINDS: CommandKind[] = [
  "extend", "retract", "tilt", "step", "push", "stand_to", "crouch_to", "reach", "gait",
];

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isNumberArray(v: unknown, n: number): v is number[] {
  return Array.isArray(v) && v.length === n && v.every(isFiniteNumber);
}

function isBooleanArray(v: unknown, n: number): v is boolean[] {
  return Array.isArray(v) && v.length === n && v.every((x) => typeof x === "boolean");
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as Record<string, unknown>;
  switch (msg.type) {
    case "state":
      return isStateMessage(msg) ? msg : null;
    case "ack":
      if (msg.id === null || typeof msg.id === "string") {
        const role = msg.role;
        if (role === undefined || role === "driver" || role === "viewer") {
          return msg as unknown as AckMessage;
        }
      }
      return null;
    case "error":
      if ((msg.id === null || msg.id === undefined || typeof msg.id === "string")
          && typeof msg.reason === "string") {
        return { type: "error", id: (msg.id as string | null) ?? null, reason: msg.reason };
      }
      return null;
    default:
      return null;
  }
}

export function isStateMessage(msg: Record<string, unknown>): msg is StateMessage & Record<string, unknown> {
  if (msg.type !== "state") return false;
  if (!isFiniteNumber(msg.t_s)) return false;
  const pose = msg.pose as Record<string, unknown> | undefined;
  if (typeof pose !== "object" || pose === null) return false;
  for (const key of ["x_m", "y_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad"]) {
    if (!isFiniteNumber(pose[key])) return false;
  }
  if (!isNumberArray(msg.ext_m, 4)) return false;
  if (!isNumberArray(msg.tilt_deg, 4)) return false;
  if (!isBooleanArray(msg.contact, 4)) return false;
  if (!isNumberArray(msg.load_n, 4)) return false;
  const limits = msg.limit_n;
  if (!Array.isArray(limits) || limits.length !== 4
      || !limits.every((v) => v === null || isFiniteNumber(v))) return false;
  if (msg.margin_m !== null && !isFiniteNumber(msg.margin_m)) return false;
  if (!isFiniteNumber(msg.power_w) || !isFiniteNumber(msg.energy_j)) return false;
  if (!isFiniteNumber(msg.standing_height_m)) return false;
  if (typeof msg.ceiling_breach !== "boolean") return false;
  if (!Array.isArray(msg.failures) || !msg.failures.every((f) => typeof f === "string")) return false;
  return true;
}

export class CommandValidationError extends Error {}

export function validateCommand(payload: CommandPayload): void {
  if (!COMMAND_KINDS.includes(payload.kind)) {
    throw new CommandValidationError(`unknown command kind ${String(payload.kind)}`);
  }
  const numeric: Array<[string, number | undefined]> = [
    ["target_m", payload.target_m],
    ["height_m", payload.height_m],
    ["angle_deg", payload.angle_deg],
  ];
  for (const [name, value] of numeric) {
    if (value !== undefined && !Number.isFinite(value)) {
      throw new CommandValidationError(`${name} must be a finite number`);
    }
  }
  if (payload.module !== undefined
      && (!Number.isInteger(payload.module) || payload.module < 0 || payload.module > 3)) {
    throw new CommandValidationError("module must be an integer 0..3");
  }
  if (payload.cycles !== undefined && (!Number.isInteger(payload.cycles) || payload.cycles < 1)) {
    throw new CommandValidationError("cycles must be a positive integer");
  }
  const needsModule: CommandKind[] = ["extend", "retract", "tilt", "step", "reach"];
  if (needsModule.includes(payload.kind) && payload.module === undefined) {
    throw new CommandValidationError(`${payload.kind} needs a module index`);
  }
  if ((payload.kind === "stand_to" || payload.kind === "crouch_to") && payload.height_m === undefined) {
    throw new CommandValidationError(`${payload.kind} needs height_m`);
  }
  if ((payload.kind === "extend" || payload.kind === "retract") && payload.target_m === undefined) {
    throw new CommandValidationError(`${payload.kind} needs target_m`);
  }
  if (payload.kind === "tilt" && payload.angle_deg === undefined) {
    throw new CommandValidationError("tilt needs angle_deg");
  }
}

export function buildCommandMessage(id: string, payload: CommandPayload): CommandMessage {
  validateCommand(payload);
  return { type: "command", id, command: payload };
}

export function buildResetMessage(id: string): ResetMessage {
  return { type: "reset", id };
}
