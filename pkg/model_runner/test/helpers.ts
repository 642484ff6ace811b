import * as fs from 'fs';
import * as path from 'path';
import * as zlib from 'zlib';

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (const byte of buf) {
    c = CRC_TABLE[(c ^ byte) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Buffer): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32BE(payload.length, 0);
  const body = Buffer.concat([Buffer.from(type, 'ascii'), payload]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head, body, crc]);
}

/** Minimal 8-bit RGB PNG writer for test fixtures. */
export function writeTinyPng(file: string, width: number, height: number, value = 128): void {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // color type: truecolor
  const raw = Buffer.alloc(height * (1 + width * 3), value);
  for (let y = 0; y < height; y++) {
    raw[y * (1 + width * 3)] = 0; // filter: none
  }
  const png = Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk('IHDR', ihdr),
    chunk('IDAT', zlib.deflateSync(raw)),
    chunk('IEND', Buffer.alloc(0)),
  ]);
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, png);
}

export interface FixtureOptions {
  pairs?: number;
  kinds?: string[];
  width?: number;
  height?: number;
}

/** Benchmark directory with a manifest, clean frames and corrupted frames. */
export function makeFixtureBenchmark(dir: string, options: FixtureOptions = {}) {
  const pairs = options.pairs ?? 2;
  const kinds = options.kinds ?? ['contrast', 'fog'];
  const width = options.width ?? 12;
  const height = options.height ?? 8;

  const entries = [];
  for (let i = 0; i < pairs; i++) {
    const pairId = `${String(i).padStart(6, '0')}_10`;
    const frameA = `clean/${pairId}/frame_a.png`;
    const frameB = `clean/${pairId}/frame_b.png`;
    writeTinyPng(path.join(dir, frameA), width, height, 100 + i);
    writeTinyPng(path.join(dir, frameB), width, height, 110 + i);
    for (const kind of kinds) {
      for (let severity = 1; severity <= 5; severity++) {
        const cell = path.join(dir, kind, String(severity), pairId);
        writeTinyPng(path.join(cell, 'frame_a.png'), width, height, 90);
        writeTinyPng(path.join(cell, 'frame_b.png'), width, height, 95);
      }
    }
    entries.push({
      pair_id: pairId,
      frame_a: frameA,
      frame_b: frameB,
      gt_flow: null,
      gt_format: null,
    });
  }

  const cells: Record<string, string> = {};
  for (const kind of kinds) {
    for (let severity = 1; severity <= 5; severity++) {
      cells[`${kind}/${severity}`] = 'materialized';
    }
  }
  const manifest = {
    schema_version: 1,
    benchmark: 'kitti_fc',
    split: 'eval',
    global_seed: 7,
    timestamp_gap: 0.1,
    corruption_kinds: kinds,
    severities: [1, 2, 3, 4, 5],
    pairs: entries,
    cells,
  };
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, 'manifest.json'), JSON.stringify(manifest, null, 2));
  return { manifest, width, height };
}
