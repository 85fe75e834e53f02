// Console state: latest server snapshot, connection/role status, command
// history.  Pure reducer-style updates; the socket layer feeds messages in,
// rendering reads the state out.  No physics lives here: every displayed
// quantity comes from a server snapshot.

import {
  CommandPayload,
  ServerMessage,
  StateMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";
export type Role = "driver" | "viewer" | "unknown";

export interface HistoryEntry {
  id: string;
  label: string;
  status: "pending" | "acked" | "rejected";
  reason?: string;
}

export interface ConsoleState {
  connection: ConnectionStatus;
  role: Role;
  snapshot: StateMessage | null;
  history: HistoryEntry[];
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return { connection: "connecting", role: "unknown", snapshot: null, history: [], lastError: null };
}

export function onOpen(state: ConsoleState): ConsoleState {
  return { ...state, connection: "connected" };
}

export function onClose(state: ConsoleState): ConsoleState {
  // commands can no longer resolve; keep the record but stop showing them as live
  const history = state.history.map((entry) =>
    entry.status === "pending"
      ? { ...entry, status: "rejected" as const, reason: "connection lost" }
      : entry,
  );
  return { ...state, connection: "disconnected", role: "unknown", history };
}

export function commandSent(state: ConsoleState, id: string, payload: CommandPayload): ConsoleState {
  const label = describeCommand(payload);
  const entry: HistoryEntry = { id, label, status: "pending" };
  return { ...state, history: [...state.history, entry].slice(-50) };
}

export function onServerMessage(state: ConsoleState, msg: ServerMessage): ConsoleState {
  switch (msg.type) {
    case "state":
      return { ...state, snapshot: msg };
    case "ack": {
      let role = state.role;
      if (msg.role) role = msg.role;
      const history = state.history.map((entry) =>
        entry.id === msg.id && entry.status === "pending"
          ? { ...entry, status: "acked" as const }
          : entry,
      );
      return { ...state, role, history };
    }
    case "error": {
      const history = state.history.map((entry) =>
        entry.id === msg.id && entry.status === "pending"
          ? { ...entry, status: "rejected" as const, reason: msg.reason }
          : entry,
      );
      return { ...state, history, lastError: msg.reason };
    }
  }
}

export function pendingCount(state: ConsoleState): number {
  return state.history.filter((entry) => entry.status === "pending").length;
}

export function describeCommand(payload: CommandPayload): string {
  const parts: string[] = [payload.kind];
  if (payload.module !== undefined) parts.push(`leg ${payload.module}`);
  if (payload.target_m !== undefined) parts.push(`${payload.target_m.toFixed(3)} m`);
  if (payload.height_m !== undefined) parts.push(`${payload.height_m.toFixed(3)} m`);
  if (payload.angle_deg !== undefined) parts.push(`${payload.angle_deg.toFixed(1)} deg`);
  if (payload.cycles !== undefined && payload.kind === "gait") parts.push(`x${payload.cycles}`);
  return parts.join(" ");
}
