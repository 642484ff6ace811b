import * as fs from 'fs';
import * as path from 'path';

import { ModelAdapter } from './adapters';
import { validateRoundTrip } from './flo';
import { Manifest, SEVERITIES, framePaths, predictionPath } from './manifest';
import { readPngSize } from './png';

export interface RunStats {
  files: number;
  pairs: number;
  cells: number;
}

function atomicWrite(target: string, payload: Buffer): void {
  fs.mkdirSync(path.dirname(target), { recursive: true });
  const tmp = `${target}.tmp-${process.pid}`;
  fs.writeFileSync(tmp, payload);
  fs.renameSync(tmp, target);
}

/**
 * Run one adapter over every manifest cell and write predictions in the
 * evaluator's naming: clean/<pair_id>.flo and <kind>/<severity>/<pair_id>.flo.
 *
 * Every output passes the .flo round-trip validator before being written;
 * writes are atomic (temp file + rename). Inference failures abort with the
 * offending pair id.
 */
export function runOverManifest(
  manifest: Manifest,
  benchmarkDir: string,
  adapter: ModelAdapter,
  outDir: string,
  log: (line: string) => void = () => {},
): RunStats {
  const cells: Array<{ kind: string | null; severity?: number }> = [{ kind: null }];
  for (const kind of manifest.corruption_kinds) {
    for (const severity of SEVERITIES) {
      cells.push({ kind, severity });
    }
  }

  let files = 0;
  for (const pair of manifest.pairs) {
    // Baselines depend only on dimensions, which corruption preserves, so
    // the clean frame header serves every cell of the pair.
    const clean = framePaths(benchmarkDir, pair, null);
    const { width, height } = readPngSize(clean.frameA);
    for (const cell of cells) {
      const frames = cell.kind === null ? clean : framePaths(benchmarkDir, pair, cell.kind, cell.severity);
      let payload: Buffer;
      try {
        const flow = adapter.infer({
          pairId: pair.pair_id,
          frameA: frames.frameA,
          frameB: frames.frameB,
          width,
          height,
        });
        if (flow.width !== width || flow.height !== height) {
          throw new Error(
            `adapter returned ${flow.width}x${flow.height}, pair is ${width}x${height}`,
          );
        }
        payload = validateRoundTrip(flow);
      } catch (err) {
        const cellName = cell.kind === null ? 'clean' : `${cell.kind}/s${cell.severity}`;
        throw new Error(
          `inference failed for pair ${pair.pair_id} at ${cellName}: ${(err as Error).message}`,
        );
      }
      atomicWrite(predictionPath(outDir, pair.pair_id, cell.kind, cell.severity), payload);
      files += 1;
    }
    log(`${pair.pair_id}: ${cells.length} cells`);
  }
  return { files, pairs: manifest.pairs.length, cells: cells.length };
}
