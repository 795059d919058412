/**
 * Binary frame framing for the /stream websocket.
 *
 * Every binary message is a fixed 24-byte little-endian header followed
 * by the payload (kind 1 = RGB image as a complete PNG). See PROTOCOL.md
 * at the repository root for the authoritative layout.
 */

export const HEADER_SIZE = 24;

export const FRAME_KIND_RGB_PNG = 1;

export const FLAG_RECORDING = 0x01;

export interface FrameHeader {
  frameIndex: number;
  timestamp: number;
  width: number;
  height: number;
  kind: number;
  flags: number;
  payloadLen: number;
}

export class ProtocolError extends Error {}

/** Parse the 24-byte header at the start of `buf`. */
export function parseFrameHeader(buf: ArrayBuffer): FrameHeader {
  if (buf.byteLength < HEADER_SIZE) {
    throw new ProtocolError(
      `frame header needs ${HEADER_SIZE} bytes, got ${buf.byteLength}`,
    );
  }
  const view = new DataView(buf);
  const header: FrameHeader = {
    frameIndex: view.getUint32(0, true),
    timestamp: view.getFloat64(4, true),
    width: view.getUint16(12, true),
    height: view.getUint16(14, true),
    kind: view.getUint8(16),
    flags: view.getUint8(17),
    payloadLen: view.getUint32(18, true),
  };
  const reserved = view.getUint16(22, true);
  if (reserved !== 0) {
    throw new ProtocolError(`reserved header field is ${reserved}, not 0`);
  }
  return header;
}

export interface FrameMessage {
  header: FrameHeader;
  payload: Uint8Array;
}

/** Split a binary websocket message into header + payload, validating
 *  that payload_len matches the actual byte count. */
export function splitFrameMessage(buf: ArrayBuffer): FrameMessage {
  const header = parseFrameHeader(buf);
  const actual = buf.byteLength - HEADER_SIZE;
  if (header.payloadLen !== actual) {
    throw new ProtocolError(
      `payload length mismatch: header says ${header.payloadLen}, ` +
        `message carries ${actual}`,
    );
  }
  return { header, payload: new Uint8Array(buf, HEADER_SIZE) };
}

/** Encode a header (testing aid; the browser client never sends frames). */
export function packFrameHeader(h: FrameHeader): ArrayBuffer {
  const buf = new ArrayBuffer(HEADER_SIZE);
  const view = new DataView(buf);
  view.setUint32(0, h.frameIndex, true);
  view.setFloat64(4, h.timestamp, true);
  view.setUint16(12, h.width, true);
  view.setUint16(14, h.height, true);
  view.setUint8(16, h.kind);
  view.setUint8(17, h.flags);
  view.setUint32(18, h.payloadLen, true);
  view.setUint16(22, 0, true);
  return buf;
}
