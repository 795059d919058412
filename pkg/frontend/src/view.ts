/**
 * Latest-wins frame display. Binary messages arrive faster than PNG
 * decode on slow machines; only the newest pending payload is ever
 * decoded, and anything that arrives while a decode is in flight
 * replaces the previous pending frame instead of queueing behind it.
 */

import { splitFrameMessage, FRAME_KIND_RGB_PNG, type FrameHeader } from "./protocol.js";

export type DecodePng = (payload: Uint8Array) => Promise<ImageBitmap>;

const defaultDecode: DecodePng = (payload) =>
  createImageBitmap(new Blob([payload.slice().buffer], { type: "image/png" }));

export class FrameView {
  private pending: { header: FrameHeader; payload: Uint8Array } | null = null;
  private decoding = false;
  /** Decoded frames actually shown (skipped frames are not counted). */
  displayed = 0;
  dropped = 0;

  constructor(
    private draw: (image: ImageBitmap, header: FrameHeader) => void,
    private onFrame: (header: FrameHeader) => void = () => {},
    private decode: DecodePng = defaultDecode,
    private warn: (msg: string) => void = (m) => console.warn(m),
  ) {}

  /** Feed one binary websocket message. Malformed frames are dropped
   *  with a warning; the stream continues. */
  push(buf: ArrayBuffer): void {
    let msg;
    try {
      msg = splitFrameMessage(buf);
    } catch (err) {
      this.warn(`dropped malformed frame: ${err}`);
      return;
    }
    if (msg.header.kind !== FRAME_KIND_RGB_PNG) {
      this.warn(`dropped frame of unknown kind ${msg.header.kind}`);
      return;
    }
    this.onFrame(msg.header);
    if (this.pending !== null) this.dropped += 1;
    this.pending = msg; // latest wins
    void this.drain();
  }

  private async drain(): Promise<void> {
    if (this.decoding) return;
    this.decoding = true;
    try {
      while (this.pending !== null) {
        const msg = this.pending;
        this.pending = null;
        try {
          const image = await this.decode(msg.payload);
          this.draw(image, msg.header);
          this.displayed += 1;
        } catch (err) {
          this.warn(`dropped undecodable frame: ${err}`);
        }
      }
    } finally {
      this.decoding = false;
    }
  }
}
