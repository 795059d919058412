import { describe, expect, it } from "vitest";

import {
  HEADER_SIZE,
  ProtocolError,
  packFrameHeader,
  parseFrameHeader,
  splitFrameMessage,
} from "../src/protocol.js";

// Reference header emitted by the server for
// (frame_index=42, timestamp=2.8125, 1024x768, kind=1, flags=1, len=512).
const SERVER_BYTES = new Uint8Array([
  42, 0, 0, 0, 0, 0, 0, 0, 0, 128, 6, 64, 0, 4, 0, 3, 1, 1, 0, 2, 0, 0, 0, 0,
]);

describe("frame header", () => {
  it("parses server-generated bytes field for field", () => {
    const h = parseFrameHeader(SERVER_BYTES.slice().buffer);
    expect(h).toEqual({
      frameIndex: 42,
      timestamp: 2.8125,
      width: 1024,
      height: 768,
      kind: 1,
      flags: 1,
      payloadLen: 512,
    });
  });

  it("round-trips through packFrameHeader", () => {
    const h = parseFrameHeader(SERVER_BYTES.slice().buffer);
    expect(new Uint8Array(packFrameHeader(h))).toEqual(SERVER_BYTES);
    expect(packFrameHeader(h).byteLength).toBe(HEADER_SIZE);
  });

  it("rejects short buffers", () => {
    expect(() => parseFrameHeader(new ArrayBuffer(10))).toThrow(ProtocolError);
  });

  it("rejects a nonzero reserved field", () => {
    const bad = SERVER_BYTES.slice();
    bad[22] = 7;
    expect(() => parseFrameHeader(bad.buffer)).toThrow(/reserved/);
  });
});

describe("frame message splitting", () => {
  function message(payload: Uint8Array): ArrayBuffer {
    const head = packFrameHeader({
      frameIndex: 3,
      timestamp: 0.2,
      width: 2,
      height: 2,
      kind: 1,
      flags: 0,
      payloadLen: payload.length,
    });
    const out = new Uint8Array(HEADER_SIZE + payload.length);
    out.set(new Uint8Array(head), 0);
    out.set(payload, HEADER_SIZE);
    return out.buffer;
  }

  it("separates header and payload", () => {
    const payload = new Uint8Array([9, 8, 7, 6, 5]);
    const { header, payload: got } = splitFrameMessage(message(payload));
    expect(header.frameIndex).toBe(3);
    expect(Array.from(got)).toEqual([9, 8, 7, 6, 5]);
  });

  it("rejects truncated payloads", () => {
    const buf = message(new Uint8Array(16));
    expect(() => splitFrameMessage(buf.slice(0, buf.byteLength - 4))).toThrow(
      /mismatch/,
    );
  });
});
