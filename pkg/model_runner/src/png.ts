import * as fs from 'fs';

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

/** Image dimensions from the PNG IHDR chunk (no pixel decoding needed). */
export function readPngSize(path: string): { width: number; height: number } {
  const fd = fs.openSync(path, 'r');
  try {
    const head = Buffer.alloc(33);
    const n = fs.readSync(fd, head, 0, head.length, 0);
    if (n < 33 || !head.subarray(0, 8).equals(PNG_SIGNATURE)) {
      throw new Error(`${path}: not a PNG file`);
    }
    if (head.toString('ascii', 12, 16) !== 'IHDR') {
      throw new Error(`${path}: missing IHDR chunk`);
    }
    const width = head.readUInt32BE(16);
    const height = head.readUInt32BE(20);
    if (width < 1 || height < 1) {
      throw new Error(`${path}: degenerate dimensions ${width}x${height}`);
    }
    return { width, height };
  } finally {
    fs.closeSync(fd);
  }
}
