import { StateMessage } from "../src/protocol.js";

export function sampleState(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: "state",
    t_s: 12.34,
    pose: {
      x_m: 0.1316,
      y_m: -0.0004,
      z_m: 0.1248,
      roll_rad: 0.0123,
      pitch_rad: -0.0042,
      yaw_rad: 0.0018,
    },
    ext_m: [0.1013, 0.0991, 0.1018, 0.0997],
    tilt_deg: [10.0, 0.0, -10.0, 0.0],
    contact: [true, true, false, true],
    load_n: [0.7019, 0.6622, 0.0, 0.6223],
    limit_n: [63.1, 63.4, null, 63.5],
    margin_m: 0.0042,
    power_w: 0.55,
    energy_j: 41.2,
    standing_height_m: 0.2098,
    ceiling_breach: false,
    failures: [],
    ...overrides,
  };
}
