import * as fs from 'fs';
import * as path from 'path';

export const MANIFEST_SCHEMA_VERSION = 1;
export const SEVERITIES = [1, 2, 3, 4, 5] as const;

export interface PairEntry {
  pair_id: string;
  frame_a: string;
  frame_b: string;
  gt_flow: string | null;
  gt_format: string | null;
  sequence?: string;
}

export interface Manifest {
  schema_version: number;
  benchmark: string;
  split: string | null;
  global_seed: number;
  timestamp_gap: number;
  corruption_kinds: string[];
  severities: number[];
  pairs: PairEntry[];
  cells: Record<string, string>;
}

export function loadManifest(dirOrFile: string): { manifest: Manifest; dir: string } {
  let file = dirOrFile;
  if (fs.statSync(dirOrFile).isDirectory()) {
    file = path.join(dirOrFile, 'manifest.json');
  }
  const manifest = JSON.parse(fs.readFileSync(file, 'utf-8')) as Manifest;
  if (manifest.schema_version !== MANIFEST_SCHEMA_VERSION) {
    throw new Error(`unsupported manifest schema ${manifest.schema_version}`);
  }
  if (!Array.isArray(manifest.pairs) || manifest.pairs.length === 0) {
    throw new Error('manifest has no pairs');
  }
  return { manifest, dir: path.dirname(file) };
}

/** Prediction naming shared with the evaluator: clean/<id>.flo and <kind>/<sev>/<id>.flo */
export function predictionPath(
  predDir: string,
  pairId: string,
  kind: string | null,
  severity?: number,
): string {
  const sub = kind === null ? 'clean' : path.join(kind, String(severity));
  return path.join(predDir, sub, `${pairId}.flo`);
}

/** Frame pair as the model sees it for one grid cell (null kind = clean). */
export function framePaths(
  benchmarkDir: string,
  pair: PairEntry,
  kind: string | null,
  severity?: number,
): { frameA: string; frameB: string } {
  if (kind === null) {
    return {
      frameA: path.join(benchmarkDir, pair.frame_a),
      frameB: path.join(benchmarkDir, pair.frame_b),
    };
  }
  const cell = path.join(benchmarkDir, kind, String(severity), pair.pair_id);
  return { frameA: path.join(cell, 'frame_a.png'), frameB: path.join(cell, 'frame_b.png') };
}
