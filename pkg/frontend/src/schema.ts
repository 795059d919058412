/**
 * JSON message schemas for the /stream websocket, mirroring PROTOCOL.md.
 * Both directions are validated: incoming server text messages before
 * they touch the UI, outgoing commands before they hit the socket.
 */

import { z } from "zod";

const vec3 = z.tuple([z.number(), z.number(), z.number()]);
const quat = z.tuple([z.number(), z.number(), z.number(), z.number()]);

export const helloSchema = z.object({
  type: z.literal("hello"),
  rate: z.number().positive(),
  seed: z.number().int(),
  instances: z.number().int().nonnegative(),
});

export const poseSchema = z.object({
  type: z.literal("pose"),
  frame_index: z.number().int().nonnegative(),
  timestamp: z.number(),
  position: vec3,
  orientation: quat,
  yaw: z.number(),
  pitch: z.number(),
  roll: z.number(),
  headlamp: z.number().nonnegative(),
  fogdensity: z.number().nonnegative(),
});

// Move acks embed the full pose fields; other acks carry command-specific
// extras (seed/instances for regen, saved path for record, ...).
export const ackSchema = z
  .object({
    type: z.literal("ack"),
    cmd: z.string(),
  })
  .passthrough();

export const errorSchema = z.object({
  type: z.literal("error"),
  error: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  helloSchema,
  poseSchema,
  ackSchema,
  errorSchema,
]);

export type Hello = z.infer<typeof helloSchema>;
export type Pose = z.infer<typeof poseSchema>;
export type Ack = z.infer<typeof ackSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

export const moveCommandSchema = z.object({
  cmd: z.literal("move"),
  roll: z.number().finite().optional(),
  pitch: z.number().finite().optional(),
  yaw: z.number().finite().optional(),
  speed: z.number().finite().optional(),
});

export const lightCommandSchema = z.object({
  cmd: z.literal("light"),
  headlamp: z.number().nonnegative().optional(),
  intensity: z.number().nonnegative().optional(),
});

export const fogCommandSchema = z.object({
  cmd: z.literal("fog"),
  density: z.number().nonnegative().optional(),
  intensity: z.number().nonnegative().optional(),
});

export const regenCommandSchema = z.object({
  cmd: z.literal("regen"),
  seed: z.number().int().optional(),
});

export const recordCommandSchema = z.object({
  cmd: z.literal("record"),
  on: z.boolean(),
  path: z.string().optional(),
});

export const commandSchema = z.discriminatedUnion("cmd", [
  moveCommandSchema,
  lightCommandSchema,
  fogCommandSchema,
  regenCommandSchema,
  recordCommandSchema,
]);

export type MoveCommand = z.infer<typeof moveCommandSchema>;
export type Command = z.infer<typeof commandSchema>;

/** Parse + validate a server text frame; throws ZodError/SyntaxError. */
export function parseServerMessage(text: string): ServerMessage {
  return serverMessageSchema.parse(JSON.parse(text));
}

/** Validate and serialize an outgoing command. */
export function encodeCommand(cmd: Command): string {
  return JSON.stringify(commandSchema.parse(cmd));
}
