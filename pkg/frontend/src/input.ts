/**
 * Keyboard teleoperation: held keys are sampled at a fixed cadence and
 * turned into move commands. W/S drive axial speed, the arrow keys pitch
 * and yaw, Q/E roll. Releasing everything emits one final zero command so
 * the server stops integrating, then the stream goes quiet.
 */

import type { MoveCommand } from "./schema.js";

export const EMIT_RATE_HZ = 20;

/** Angular rate applied while a rotation key is held (rad/s). */
export const TURN_RATE = 0.9;

/** Axial speed while W/S is held (m/s). */
export const AXIAL_SPEED = 1.0;

const KEY_BINDINGS: Record<string, keyof Rates> = {
  KeyW: "forward",
  KeyS: "backward",
  ArrowUp: "pitchUp",
  ArrowDown: "pitchDown",
  ArrowLeft: "yawLeft",
  ArrowRight: "yawRight",
  KeyQ: "rollLeft",
  KeyE: "rollRight",
};

interface Rates {
  forward: boolean;
  backward: boolean;
  pitchUp: boolean;
  pitchDown: boolean;
  yawLeft: boolean;
  yawRight: boolean;
  rollLeft: boolean;
  rollRight: boolean;
}

export class InputTracker {
  private held = new Set<keyof Rates>();
  private lastWasZero = true;

  /** Returns true when the key code is one of ours (caller should
   *  preventDefault so arrows don't scroll the page). */
  press(code: string): boolean {
    const action = KEY_BINDINGS[code];
    if (action === undefined) return false;
    this.held.add(action);
    return true;
  }

  release(code: string): boolean {
    const action = KEY_BINDINGS[code];
    if (action === undefined) return false;
    this.held.delete(action);
    return true;
  }

  /** Drop all held keys (window blur, reconnect). */
  clear(): void {
    this.held.clear();
  }

  get anyHeld(): boolean {
    return this.held.size > 0;
  }

  private axis(pos: keyof Rates, neg: keyof Rates): number {
    return (this.held.has(pos) ? 1 : 0) - (this.held.has(neg) ? 1 : 0);
  }

  /**
   * Sample the current key state into a move command for a tick of `dt`
   * seconds. Returns null when nothing is held and the stop command has
   * already been sent — no traffic while idle.
   */
  sample(dt: number = 1 / EMIT_RATE_HZ): MoveCommand | null {
    if (!this.anyHeld) {
      if (this.lastWasZero) return null;
      this.lastWasZero = true;
      return { cmd: "move", roll: 0, pitch: 0, yaw: 0, speed: 0 };
    }
    this.lastWasZero = false;
    return {
      cmd: "move",
      speed: AXIAL_SPEED * this.axis("forward", "backward"),
      pitch: TURN_RATE * dt * this.axis("pitchUp", "pitchDown"),
      yaw: TURN_RATE * dt * this.axis("yawLeft", "yawRight"),
      roll: TURN_RATE * dt * this.axis("rollRight", "rollLeft"),
    };
  }
}

/**
 * Wire an InputTracker to DOM key events and a command sink, emitting at
 * EMIT_RATE_HZ. Returns a teardown function.
 */
export function bindInputLoop(
  tracker: InputTracker,
  target: Pick<Window, "addEventListener" | "removeEventListener">,
  send: (cmd: MoveCommand) => void,
): () => void {
  const down = (ev: KeyboardEvent) => {
    if (ev.repeat) {
      if (KEY_BINDINGS[ev.code] !== undefined) ev.preventDefault();
      return;
    }
    if (tracker.press(ev.code)) ev.preventDefault();
  };
  const up = (ev: KeyboardEvent) => {
    if (tracker.release(ev.code)) ev.preventDefault();
  };
  const blur = () => tracker.clear();
  target.addEventListener("keydown", down as EventListener);
  target.addEventListener("keyup", up as EventListener);
  target.addEventListener("blur", blur);
  const timer = setInterval(() => {
    const cmd = tracker.sample();
    if (cmd !== null) send(cmd);
  }, 1000 / EMIT_RATE_HZ);
  return () => {
    clearInterval(timer);
    target.removeEventListener("keydown", down as EventListener);
    target.removeEventListener("keyup", up as EventListener);
    target.removeEventListener("blur", blur);
  };
}
