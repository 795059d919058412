"""Live teleoperation session host over a websocket.

One session owns a pile, a camera, lighting and fog state. Clients send
JSON text commands (move / light / fog / regen / record); the server
streams binary frame messages (24-byte header + lossless PNG payload)
plus a JSON pose message per frame. Frames are rendered at a target
rate and dropped (never queued) when rendering lags: latest wins.

Wire format details live in PROTOCOL.md at the repository root.
"""

from __future__ import annotations

import asyncio
import io
import json
import struct
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from PIL import Image

from .camera import CameraState, MotionCommand, apply_command, look_at_quaternion
from .config import SimConfig, config_hash, serialize, with_overrides
from .deposition import build_pile
from .export import DatasetManifest, write_dataset
from .render import (FogField, Frame, LightingRig, Scene, render_frame,
                     rig_from_config, fog_from_config)

HEADER_FMT = "<IdHHBBIH"          # frame_index, timestamp, w, h, kind,
HEADER_SIZE = struct.calcsize(HEADER_FMT)   # flags, payload_len, reserved
assert HEADER_SIZE == 24

KIND_RGB_PNG = 1
FLAG_RECORDING = 0x01

DEFAULT_RATE = 15.0
DT_MIN = 1.0 / 240.0
DT_MAX = 0.25


class ProtocolError(ValueError):
    pass


def pack_frame_header(frame_index, timestamp, width, height, kind,
                      flags, payload_len):
    return struct.pack(HEADER_FMT, frame_index, timestamp, width, height,
                       kind, flags, payload_len, 0)


def unpack_frame_header(buf):
    if len(buf) < HEADER_SIZE:
        raise ProtocolError("short header: %d bytes" % len(buf))
    (frame_index, timestamp, width, height, kind, flags,
     payload_len, _reserved) = struct.unpack(HEADER_FMT, buf[:HEADER_SIZE])
    return {"frame_index": frame_index, "timestamp": timestamp,
            "width": width, "height": height, "kind": kind,
            "flags": flags, "payload_len": payload_len}


def encode_frame_message(frame: Frame, recording=False):
    buf = io.BytesIO()
    Image.fromarray(frame.rgb, mode="RGB").save(buf, format="PNG")
    payload = buf.getvalue()
    h, w = frame.rgb.shape[:2]
    flags = FLAG_RECORDING if recording else 0
    return pack_frame_header(frame.frame_index, frame.timestamp, w, h,
                             KIND_RGB_PNG, flags, len(payload)) + payload


def decode_frame_message(data):
    head = unpack_frame_header(data)
    payload = data[HEADER_SIZE:]
    if len(payload) != head["payload_len"]:
        raise ProtocolError("payload length mismatch: header %d, got %d"
                            % (head["payload_len"], len(payload)))
    rgb = np.asarray(Image.open(io.BytesIO(payload)).convert("RGB"))
    return head, rgb


def pose_message(session):
    cam = session.camera
    yaw, pitch, roll = cam.yaw_pitch_roll()
    return {"type": "pose", "frame_index": session.frame_index,
            "timestamp": session.clock,
            "position": [float(x) for x in cam.position],
            "orientation": [float(x) for x in cam.orientation],
            "yaw": float(yaw), "pitch": float(pitch), "roll": float(roll),
            "headlamp": session.rig.headlamp_intensity
                        if session.rig.headlamp_on else 0.0,
            "fogdensity": session.fog.sigma_base}


class Session:
    """State of one live connection: pile + camera + lighting + fog."""

    def __init__(self, cfg: SimConfig, rate: float = DEFAULT_RATE,
                 pile=None):
        self.cfg = cfg
        self.rate = float(rate)
        self.pile = pile if pile is not None else build_pile(cfg)
        self.scene = Scene(self.pile)
        self.rig = rig_from_config(cfg)
        self.fog = fog_from_config(cfg)
        self.camera = self._start_camera()
        self.frame_index = 0
        self.clock = 0.0
        self.last_command_time = None
        self.recording = False
        self.recorded = []

    def _start_camera(self):
        # start outside the spawn footprint, looking at the pile center
        cfg = self.cfg
        pos = np.array([cfg.spawnposx - cfg.spawnboundx - 3.0,
                        cfg.spawnposy, 2.0])
        target = np.array([cfg.spawnposx, cfg.spawnposy, 0.5])
        return CameraState(position=pos,
                           orientation=look_at_quaternion(pos, target))

    def command_dt(self, now):
        if self.last_command_time is None:
            dt = 1.0 / self.rate
        else:
            dt = now - self.last_command_time
        self.last_command_time = now
        return min(max(dt, DT_MIN), DT_MAX)

    def render(self):
        frame = render_frame(self.scene, self.camera, self.rig, self.fog,
                             t=self.clock, frame_index=self.frame_index)
        if self.recording:
            self.recorded.append(frame)
        self.frame_index += 1
        self.clock += 1.0 / self.rate
        return frame

    def save_recording(self, root):
        man = DatasetManifest(root=root, config_text=serialize(self.cfg),
                              config_hash=str(config_hash(self.cfg)),
                              seed=self.cfg.seed,
                              frame_count=len(self.recorded), rate=self.rate)
        frames = [f for f in self.recorded]
        for i, f in enumerate(frames):   # re-index for a gapless dataset
            f.frame_index = i
        write_dataset(frames, man, pile=self.pile)
        self.recorded = []
        return root


def handle_command(session: Session, msg, now=None):
    """Apply one wire command; returns the acknowledgment dict."""
    if now is None:
        now = time.monotonic()
    if not isinstance(msg, dict) or "cmd" not in msg:
        return {"type": "error", "error": "malformed command"}
    cmd = msg["cmd"]
    try:
        if cmd == "move":
            mc = MotionCommand(droll=float(msg.get("roll", 0.0)),
                               dpitch=float(msg.get("pitch", 0.0)),
                               dyaw=float(msg.get("yaw", 0.0)),
                               axial_speed=float(msg.get("speed", 0.0)))
            dt = session.command_dt(now)
            session.camera = apply_command(session.camera, mc, dt)
            ack = pose_message(session)
            ack["type"] = "ack"
            ack["cmd"] = "move"
            return ack
        if cmd == "light":
            rig = session.rig
            if "headlamp" in msg:
                val = float(msg["headlamp"])
                rig = LightingRig(rig.global_light, headlamp_on=val > 0,
                                  headlamp_intensity=max(val, 0.0))
            if "intensity" in msg:
                gl = rig.global_light
                from dataclasses import replace as _replace
                rig = LightingRig(_replace(gl, intensity=float(msg["intensity"])),
                                  rig.headlamp_on, rig.headlamp_intensity)
            session.rig = rig
            return {"type": "ack", "cmd": "light",
                    "headlamp": session.rig.headlamp_intensity
                                if session.rig.headlamp_on else 0.0,
                    "intensity": session.rig.global_light.intensity}
        if cmd == "fog":
            fog = session.fog
            density = float(msg.get("density", fog.sigma_base))
            intensity = float(msg.get("intensity", fog.noise_amplitude))
            session.fog = FogField(sigma_base=max(density, 0.0),
                                   noise_amplitude=max(intensity, 0.0),
                                   noise_scale=fog.noise_scale,
                                   plumes=fog.plumes)
            return {"type": "ack", "cmd": "fog",
                    "density": session.fog.sigma_base,
                    "intensity": session.fog.noise_amplitude}
        if cmd == "regen":
            cfg = session.cfg
            if "seed" in msg:
                cfg = with_overrides(cfg, seed=int(msg["seed"]))
            session.cfg = cfg
            session.pile = build_pile(cfg)
            session.scene = Scene(session.pile)
            session.camera = session._start_camera()
            session.frame_index = 0
            session.clock = 0.0
            session.recorded = []
            return {"type": "ack", "cmd": "regen", "seed": cfg.seed,
                    "instances": len(session.pile.instances)}
        if cmd == "record":
            on = bool(msg.get("on", not session.recording))
            session.recording = on
            saved = None
            if not on and msg.get("path") and session.recorded:
                saved = session.save_recording(msg["path"])
            return {"type": "ack", "cmd": "record", "on": on, "saved": saved}
        return {"type": "error", "error": "unknown command %r" % cmd}
    except (ValueError, TypeError) as exc:
        return {"type": "error", "error": str(exc)}


def create_app(cfg: SimConfig = None, rate: float = DEFAULT_RATE, pile=None):
    """FastAPI app with a `/stream` websocket endpoint."""
    app = FastAPI(title="rubble pile stream server")
    cfg = cfg or SimConfig()
    app.state.cfg = cfg
    app.state.rate = rate
    app.state.pile = pile

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_running_loop()
        session = await loop.run_in_executor(
            None, lambda: Session(app.state.cfg, app.state.rate,
                                  pile=app.state.pile))
        await ws.send_text(json.dumps(
            {"type": "hello", "rate": session.rate,
             "seed": session.cfg.seed,
             "instances": len(session.pile.instances)}))

        async def intake():
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "error": "invalid JSON"}))
                    continue
                reply = handle_command(session, msg)
                await ws.send_text(json.dumps(reply))

        stop = asyncio.Event()

        async def egress():
            period = 1.0 / session.rate
            while not stop.is_set():
                start = time.monotonic()
                # render off the event loop so commands stay responsive;
                # no queue: whatever state exists when the next tick
                # starts is what gets rendered (latest wins)
                frame = await loop.run_in_executor(None, session.render)
                try:
                    await ws.send_bytes(encode_frame_message(
                        frame, recording=session.recording))
                    await ws.send_text(json.dumps(pose_message(session)))
                except (WebSocketDisconnect, RuntimeError):
                    return   # peer went away mid-frame
                elapsed = time.monotonic() - start
                if elapsed < period:
                    await asyncio.sleep(period - elapsed)

        tasks = [asyncio.ensure_future(intake()),
                 asyncio.ensure_future(egress())]
        try:
            await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
        except WebSocketDisconnect:
            pass
        finally:
            # Ask egress to stop instead of cancelling it: cancellation
            # mid run_in_executor would orphan the render thread. Intake
            # is parked on a plain receive and is safe to cancel.
            stop.set()
            tasks[0].cancel()
            await asyncio.gather(*tasks, return_exceptions=True)

    return app


def serve(cfg: SimConfig, port: int = 8765, rate: float = DEFAULT_RATE,
          host: str = "127.0.0.1"):
    import uvicorn

    app = create_app(cfg, rate)
    uvicorn.run(app, host=host, port=port, log_level="info")
