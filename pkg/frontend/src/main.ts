/**
 * Browser entry point: connects to the stream server, wires the canvas,
 * HUD, keyboard teleop, and the lighting/fog/seed control panel.
 */

import { Hud } from "./hud.js";
import { InputTracker, bindInputLoop } from "./input.js";
import {
  encodeCommand,
  parseServerMessage,
  poseSchema,
  type Command,
} from "./schema.js";
import { FrameView } from "./view.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

function defaultUrl(): string {
  const q = new URLSearchParams(location.search).get("server");
  if (q !== null) return q;
  const host = location.hostname || "localhost";
  const port = location.port || "8765";
  return `ws://${host}:${port}/stream`;
}

export function start(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("2d canvas unavailable");
  const banner = el<HTMLDivElement>("banner");
  const hudPose = el<HTMLSpanElement>("hud-pose");
  const hudFrame = el<HTMLSpanElement>("hud-frame");
  const hudFps = el<HTMLSpanElement>("hud-fps");
  const hudRec = el<HTMLSpanElement>("hud-rec");
  const headlampSlider = el<HTMLInputElement>("headlamp");
  const fogSlider = el<HTMLInputElement>("fogdensity");
  const seedField = el<HTMLInputElement>("seed");
  const regenButton = el<HTMLButtonElement>("regen");
  const recordButton = el<HTMLButtonElement>("record");

  const hud = new Hud();
  const tracker = new InputTracker();
  let socket: WebSocket | null = null;
  let recording = false;
  let teardownInput: (() => void) | null = null;

  const refreshHud = () => {
    const s = hud.state;
    hudPose.textContent = s.poseText;
    hudFrame.textContent = `frame ${s.frameIndex}`;
    hudFps.textContent = `${s.fpsText} fps`;
    hudRec.textContent = s.recording ? "● REC" : "";
  };

  const view = new FrameView(
    (image, header) => {
      if (canvas.width !== header.width || canvas.height !== header.height) {
        canvas.width = header.width;
        canvas.height = header.height;
      }
      ctx.drawImage(image, 0, 0);
      image.close();
    },
    (header) => {
      hud.onFrame(header.frameIndex, (header.flags & 1) !== 0, performance.now());
      recording = (header.flags & 1) !== 0;
      recordButton.textContent = recording ? "stop recording" : "record";
      refreshHud();
    },
  );

  const send = (cmd: Command) => {
    if (socket !== null && socket.readyState === WebSocket.OPEN) {
      socket.send(encodeCommand(cmd));
    }
  };

  headlampSlider.addEventListener("input", () =>
    send({ cmd: "light", headlamp: Number(headlampSlider.value) }),
  );
  fogSlider.addEventListener("input", () =>
    send({ cmd: "fog", density: Number(fogSlider.value) }),
  );
  regenButton.addEventListener("click", () => {
    const seed = Number.parseInt(seedField.value, 10);
    send(Number.isFinite(seed) ? { cmd: "regen", seed } : { cmd: "regen" });
  });
  recordButton.addEventListener("click", () =>
    send(
      recording
        ? { cmd: "record", on: false, path: `teleop-${Date.now()}` }
        : { cmd: "record", on: true },
    ),
  );

  const connect = () => {
    banner.textContent = "connecting…";
    banner.hidden = false;
    const ws = new WebSocket(defaultUrl());
    ws.binaryType = "arraybuffer";
    socket = ws;

    ws.onopen = () => {
      banner.hidden = true;
      teardownInput = bindInputLoop(tracker, window, send);
    };

    ws.onmessage = (ev: MessageEvent) => {
      if (ev.data instanceof ArrayBuffer) {
        view.push(ev.data);
        return;
      }
      let msg;
      try {
        msg = parseServerMessage(ev.data as string);
      } catch (err) {
        console.warn(`dropped malformed message: ${err}`);
        return;
      }
      if (msg.type === "pose") {
        hud.onPose(msg);
        refreshHud();
      } else if (msg.type === "hello") {
        seedField.value = String(msg.seed);
        banner.hidden = true;
      } else if (msg.type === "error") {
        console.warn(`server error: ${msg.error}`);
      } else if (msg.type === "ack" && msg.cmd === "move") {
        // move acks embed the full pose; keep the HUD in lockstep
        const pose = poseSchema.safeParse({ ...msg, type: "pose" });
        if (pose.success) {
          hud.onPose(pose.data);
          refreshHud();
        }
      }
    };

    ws.onclose = () => {
      if (teardownInput !== null) {
        teardownInput();
        teardownInput = null;
      }
      tracker.clear();
      banner.textContent = "connection lost — retrying…";
      banner.hidden = false;
      socket = null;
      setTimeout(connect, 1500);
    };
  };

  connect();
}

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", start);
  } else {
    start();
  }
}
