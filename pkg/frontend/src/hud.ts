/**
 * HUD state and formatting: pose readout (position to the centimeter,
 * attitude to 0.1 degrees), frame index, and a sliding-window fps
 * estimate. Pure functions plus a small state holder so the formatting
 * contract is unit-testable without a DOM.
 */

import type { Pose } from "./schema.js";

const DEG = 180 / Math.PI;

/** "x=+1.23m y=-0.40m z=+2.00m" — centimeter resolution. */
export function formatPosition(position: readonly number[]): string {
  const f = (v: number) => (v < 0 ? "" : "+") + v.toFixed(2);
  return `x=${f(position[0])}m y=${f(position[1])}m z=${f(position[2])}m`;
}

/** "yaw=12.3° pitch=-4.0° roll=0.0°" — 0.1 degree resolution. */
export function formatAttitude(
  yaw: number,
  pitch: number,
  roll: number,
): string {
  const f = (v: number) => {
    const s = (v * DEG).toFixed(1);
    return s === "-0.0" ? "0.0" : s;
  };
  return `yaw=${f(yaw)}° pitch=${f(pitch)}° roll=${f(roll)}°`;
}

export function formatPose(pose: Pose): string {
  return `${formatPosition(pose.position)}  ${formatAttitude(
    pose.yaw,
    pose.pitch,
    pose.roll,
  )}`;
}

/** Frame-arrival fps over a sliding window of recent timestamps. */
export class FpsCounter {
  private stamps: number[] = [];

  constructor(private windowSize = 30) {}

  tick(nowMs: number): void {
    this.stamps.push(nowMs);
    if (this.stamps.length > this.windowSize) this.stamps.shift();
  }

  reset(): void {
    this.stamps = [];
  }

  /** Frames per second, or 0 until two samples exist. */
  get fps(): number {
    const n = this.stamps.length;
    if (n < 2) return 0;
    const span = (this.stamps[n - 1] - this.stamps[0]) / 1000;
    return span > 0 ? (n - 1) / span : 0;
  }
}

export interface HudState {
  frameIndex: number;
  poseText: string;
  fpsText: string;
  recording: boolean;
}

/**
 * Accumulates stream state into display strings. A frame-index
 * regression (pile regenerated) resets the counters.
 */
export class Hud {
  private lastFrameIndex = -1;
  private lastPose: Pose | null = null;
  private recording = false;
  readonly fpsCounter = new FpsCounter();

  onFrame(frameIndex: number, recordingFlag: boolean, nowMs: number): void {
    if (frameIndex < this.lastFrameIndex) {
      // regen: the server restarted its counter
      this.fpsCounter.reset();
      this.lastPose = null;
    }
    this.lastFrameIndex = frameIndex;
    this.recording = recordingFlag;
    this.fpsCounter.tick(nowMs);
  }

  onPose(pose: Pose): void {
    this.lastPose = pose;
  }

  get state(): HudState {
    return {
      frameIndex: this.lastFrameIndex,
      poseText: this.lastPose === null ? "—" : formatPose(this.lastPose),
      fpsText: this.fpsCounter.fps.toFixed(1),
      recording: this.recording,
    };
  }
}
