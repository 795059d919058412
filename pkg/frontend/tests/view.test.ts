import { describe, expect, it } from "vitest";

import { HEADER_SIZE, packFrameHeader, type FrameHeader } from "../src/protocol.js";
import { FrameView, type DecodePng } from "../src/view.js";

function frameMessage(index: number, payloadByte: number): ArrayBuffer {
  const payload = new Uint8Array(8).fill(payloadByte);
  const head = packFrameHeader({
    frameIndex: index,
    timestamp: index / 15,
    width: 4,
    height: 4,
    kind: 1,
    flags: 0,
    payloadLen: payload.length,
  });
  const out = new Uint8Array(HEADER_SIZE + payload.length);
  out.set(new Uint8Array(head), 0);
  out.set(payload, HEADER_SIZE);
  return out.buffer;
}

/** Manually-resolved decode so tests control decoder timing. */
function manualDecoder() {
  const pending: Array<(img: ImageBitmap) => void> = [];
  const decode: DecodePng = () =>
    new Promise((resolve) => pending.push(resolve));
  return { decode, resolveOne: () => pending.shift()!({} as ImageBitmap) };
}

async function flush() {
  await new Promise((r) => setTimeout(r, 0));
}

describe("FrameView", () => {
  it("draws each frame when decode keeps up", async () => {
    const drawn: number[] = [];
    const view = new FrameView(
      (_img, h) => drawn.push(h.frameIndex),
      () => {},
      async () => ({}) as ImageBitmap,
    );
    for (let i = 0; i < 5; i++) {
      view.push(frameMessage(i, i));
      await flush(); // decode completes before the next frame arrives
    }
    expect(drawn).toEqual([0, 1, 2, 3, 4]);
    expect(view.dropped).toBe(0);
  });

  it("latest wins while a decode is in flight", async () => {
    const drawn: number[] = [];
    const dec = manualDecoder();
    const view = new FrameView(
      (_img, h) => drawn.push(h.frameIndex),
      () => {},
      dec.decode,
    );
    view.push(frameMessage(0, 0)); // starts decoding
    view.push(frameMessage(1, 1)); // queued
    view.push(frameMessage(2, 2)); // replaces 1
    view.push(frameMessage(3, 3)); // replaces 2
    dec.resolveOne();
    await flush();
    dec.resolveOne();
    await flush();
    expect(drawn).toEqual([0, 3]);
    expect(view.dropped).toBe(2);
  });

  it("notifies onFrame for every arriving header, even skipped ones", () => {
    const seen: number[] = [];
    const dec = manualDecoder();
    const view = new FrameView(
      () => {},
      (h: FrameHeader) => seen.push(h.frameIndex),
      dec.decode,
    );
    for (let i = 0; i < 4; i++) view.push(frameMessage(i, 0));
    expect(seen).toEqual([0, 1, 2, 3]);
  });

  it("drops malformed frames with a warning and keeps going", async () => {
    const warnings: string[] = [];
    const drawn: number[] = [];
    const view = new FrameView(
      (_img, h) => drawn.push(h.frameIndex),
      () => {},
      async () => ({}) as ImageBitmap,
      (m) => warnings.push(m),
    );
    view.push(new ArrayBuffer(5)); // too short
    view.push(frameMessage(7, 0).slice(0, HEADER_SIZE + 3)); // truncated
    view.push(frameMessage(8, 0));
    await flush();
    expect(warnings.length).toBe(2);
    expect(drawn).toEqual([8]);
  });

  it("drops frames of unknown kind", () => {
    const warnings: string[] = [];
    const view = new FrameView(
      () => {},
      () => {},
      async () => ({}) as ImageBitmap,
      (m) => warnings.push(m),
    );
    const buf = new Uint8Array(frameMessage(0, 0));
    buf[16] = 9; // unknown kind
    view.push(buf.buffer);
    expect(warnings[0]).toMatch(/kind 9/);
  });

  it("survives a decoder failure and decodes the next frame", async () => {
    const drawn: number[] = [];
    const warnings: string[] = [];
    let calls = 0;
    const view = new FrameView(
      (_img, h) => drawn.push(h.frameIndex),
      () => {},
      async () => {
        calls += 1;
        if (calls === 1) throw new Error("bad png");
        return {} as ImageBitmap;
      },
      (m) => warnings.push(m),
    );
    view.push(frameMessage(0, 0));
    await flush();
    view.push(frameMessage(1, 0));
    await flush();
    expect(warnings.length).toBe(1);
    expect(drawn).toEqual([1]);
  });
});
