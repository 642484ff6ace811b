/**
 * Middlebury .flo codec: float32 magic 202021.25, int32 width/height,
 * interleaved (u, v) float32 row-major, all little-endian.
 */

export const FLO_MAGIC = 202021.25;

export interface FlowField {
  width: number;
  height: number;
  /** interleaved u,v; length = 2 * width * height */
  data: Float32Array;
}

export function makeFlow(width: number, height: number, data?: Float32Array): FlowField {
  if (width < 1 || height < 1) {
    throw new Error(`invalid flow dimensions ${width}x${height}`);
  }
  const expected = 2 * width * height;
  if (data !== undefined && data.length !== expected) {
    throw new Error(`flow data length ${data.length} != ${expected}`);
  }
  return { width, height, data: data ?? new Float32Array(expected) };
}

export function encodeFlo(flow: FlowField): Buffer {
  for (const v of flow.data) {
    if (!Number.isFinite(v)) {
      throw new Error('flow contains non-finite components');
    }
  }
  const buf = Buffer.alloc(12 + flow.data.length * 4);
  buf.writeFloatLE(FLO_MAGIC, 0);
  buf.writeInt32LE(flow.width, 4);
  buf.writeInt32LE(flow.height, 8);
  for (let i = 0; i < flow.data.length; i++) {
    buf.writeFloatLE(flow.data[i], 12 + 4 * i);
  }
  return buf;
}

export function decodeFlo(buf: Buffer): FlowField {
  if (buf.length < 12 || Math.abs(buf.readFloatLE(0) - FLO_MAGIC) > 1e-3) {
    throw new Error('bad .flo magic');
  }
  const width = buf.readInt32LE(4);
  const height = buf.readInt32LE(8);
  const expected = 12 + width * height * 8;
  if (width < 1 || height < 1 || buf.length !== expected) {
    throw new Error(`truncated .flo payload (${buf.length} != ${expected} bytes)`);
  }
  const data = new Float32Array(2 * width * height);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(12 + 4 * i);
  }
  return { width, height, data };
}

/**
 * Round-trip validator applied to every adapter output before it is
 * written: encode, decode, compare bit-exactly.
 */
export function validateRoundTrip(flow: FlowField): Buffer {
  const encoded = encodeFlo(flow);
  const back = decodeFlo(encoded);
  if (back.width !== flow.width || back.height !== flow.height) {
    throw new Error('flow round-trip validation failed: dimensions changed');
  }
  for (let i = 0; i < flow.data.length; i++) {
    if (back.data[i] !== flow.data[i]) {
      throw new Error(`flow round-trip validation failed at component ${i}`);
    }
  }
  return encoded;
}
