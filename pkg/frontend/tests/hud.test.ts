import { describe, expect, it } from "vitest";

import { FpsCounter, Hud, formatAttitude, formatPosition, formatPose } from "../src/hud.js";
import type { Pose } from "../src/schema.js";

function pose(extra: Partial<Pose> = {}): Pose {
  return {
    type: "pose",
    frame_index: 10,
    timestamp: 1.0,
    position: [1.234, -0.4, 2.0],
    orientation: [0, 0, 0, 1],
    yaw: 0.2147, // 12.30 deg
    pitch: -0.0698, // -4.00 deg
    roll: 0,
    headlamp: 0,
    fogdensity: 0,
    ...extra,
  };
}

describe("pose formatting", () => {
  it("positions are centimeter resolution with explicit sign", () => {
    expect(formatPosition([1.234, -0.4, 2.0])).toBe(
      "x=+1.23m y=-0.40m z=+2.00m",
    );
  });

  it("attitude is 0.1 degree resolution", () => {
    expect(formatAttitude(0.2147, -0.0698, 0)).toBe(
      "yaw=12.3° pitch=-4.0° roll=0.0°",
    );
  });

  it("negative zero never leaks into the readout", () => {
    expect(formatAttitude(-1e-9, 0, 0)).toBe("yaw=0.0° pitch=0.0° roll=0.0°");
  });

  it("formatPose is the exact contract string", () => {
    expect(formatPose(pose())).toBe(
      "x=+1.23m y=-0.40m z=+2.00m  yaw=12.3° pitch=-4.0° roll=0.0°",
    );
  });
});

describe("FpsCounter", () => {
  it("reports 0 until two samples arrive", () => {
    const c = new FpsCounter();
    expect(c.fps).toBe(0);
    c.tick(0);
    expect(c.fps).toBe(0);
  });

  it("100 frames at a steady 15 Hz measures within 20%", () => {
    const c = new FpsCounter();
    for (let i = 0; i < 100; i++) c.tick(i * (1000 / 15));
    expect(Math.abs(c.fps - 15) / 15).toBeLessThan(0.2);
  });

  it("window slides: old stamps stop influencing the estimate", () => {
    const c = new FpsCounter(10);
    for (let i = 0; i < 50; i++) c.tick(i * 10); // 100 fps
    for (let i = 0; i < 50; i++) c.tick(500 + i * 100); // then 10 fps
    expect(c.fps).toBeCloseTo(10, 0);
  });
});

describe("Hud", () => {
  it("tracks frame index, pose text and recording flag", () => {
    const hud = new Hud();
    hud.onFrame(10, true, 0);
    hud.onPose(pose());
    const s = hud.state;
    expect(s.frameIndex).toBe(10);
    expect(s.recording).toBe(true);
    expect(s.poseText).toBe(formatPose(pose()));
  });

  it("frame-index regression (regen) resets counters", () => {
    const hud = new Hud();
    for (let i = 0; i < 20; i++) hud.onFrame(i, false, i * 66.7);
    hud.onPose(pose());
    expect(hud.state.poseText).not.toBe("—");
    hud.onFrame(0, false, 2000); // server restarted its counter
    const s = hud.state;
    expect(s.frameIndex).toBe(0);
    expect(s.poseText).toBe("—");
    expect(s.fpsText).toBe("0.0");
  });
});
