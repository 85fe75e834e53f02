// Socket wrapper: owns the ConsoleState and notifies a render callback.
// The socket object is injected (anything WebSocket-shaped), which keeps the
// protocol flow testable with a fake.

import {
  buildCommandMessage,
  buildResetMessage,
  CommandPayload,
  CommandValidationError,
  parseServerMessage,
} from "./protocol.js";
import {
  commandSent,
  ConsoleState,
  initialState,
  onClose,
  onOpen,
  onServerMessage,
} from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
}

export class ConsoleClient {
  state: ConsoleState = initialState();
  private seq = 0;

  constructor(
    private socket: SocketLike,
    private onChange: (state: ConsoleState) => void,
  ) {
    socket.onopen = () => this.update(onOpen(this.state));
    socket.onclose = () => this.update(onClose(this.state));
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg === null) return;   // non-protocol frame: ignore
      this.update(onServerMessage(this.state, msg));
    };
  }

  private update(next: ConsoleState): void {
    this.state = next;
    this.onChange(next);
  }

  // Returns the assigned message id, or null when local validation failed
  // (nothing is sent in that case).
  send(payload: CommandPayload): string | null {
    if (this.state.connection !== "connected" || this.state.role !== "driver") {
      return null;
    }
    const id = `c${this.seq++}`;
    let message;
    try {
      message = buildCommandMessage(id, payload);
    } catch (err) {
      if (err instanceof CommandValidationError) {
        this.update({ ...this.state, lastError: `local validation: ${err.message}` });
        return null;
      }
      throw err;
    }
    this.socket.send(JSON.stringify(message));
    this.update(commandSent(this.state, id, payload));
    return id;
  }

  reset(): string | null {
    if (this.state.connection !== "connected" || this.state.role !== "driver") {
      return null;
    }
    const id = `c${this.seq++}`;
    this.socket.send(JSON.stringify(buildResetMessage(id)));
    const entry = { id, label: "reset", status: "pending" as const };
    this.update({ ...this.state, history: [...this.state.history, entry].slice(-50) });
    return id;
  }
}
