import { describe, expect, it } from "vitest";

import {
  commandSchema,
  encodeCommand,
  parseServerMessage,
} from "../src/schema.js";

describe("server messages", () => {
  it("accepts every documented message type", () => {
    const samples = [
      '{"type": "hello", "rate": 15.0, "seed": 1234, "instances": 3750}',
      '{"type": "pose", "frame_index": 42, "timestamp": 2.8,' +
        ' "position": [1, 2, 3], "orientation": [0, 0, 0, 1],' +
        ' "yaw": 0.1, "pitch": -0.2, "roll": 0.0,' +
        ' "headlamp": 2.0, "fogdensity": 0.2}',
      '{"type": "ack", "cmd": "regen", "seed": 7, "instances": 40}',
      '{"type": "error", "error": "unknown command"}',
    ];
    for (const s of samples) {
      expect(() => parseServerMessage(s)).not.toThrow();
    }
  });

  it("rejects structurally invalid messages", () => {
    expect(() => parseServerMessage('{"type": "mystery"}')).toThrow();
    expect(() =>
      parseServerMessage('{"type": "pose", "frame_index": -1}'),
    ).toThrow();
    expect(() => parseServerMessage("{not json")).toThrow();
  });
});

describe("commands", () => {
  it("validates every command the panel can emit", () => {
    const cmds = [
      { cmd: "move", yaw: 0.1, speed: 0.5 },
      { cmd: "light", headlamp: 2.0 },
      { cmd: "light", intensity: 1.0 },
      { cmd: "fog", density: 0.2, intensity: 0.1 },
      { cmd: "regen", seed: 7 },
      { cmd: "regen" },
      { cmd: "record", on: true },
      { cmd: "record", on: false, path: "/tmp/run1" },
    ] as const;
    for (const c of cmds) {
      expect(() => commandSchema.parse(c)).not.toThrow();
      expect(JSON.parse(encodeCommand(c as never))).toMatchObject(c);
    }
  });

  it("rejects out-of-schema commands", () => {
    expect(() => commandSchema.parse({ cmd: "explode" })).toThrow();
    expect(() => commandSchema.parse({ cmd: "move", yaw: "left" })).toThrow();
    expect(() =>
      commandSchema.parse({ cmd: "move", speed: Number.NaN }),
    ).toThrow();
    expect(() => commandSchema.parse({ cmd: "light", headlamp: -1 })).toThrow();
    expect(() => commandSchema.parse({ cmd: "record" })).toThrow();
  });
});
