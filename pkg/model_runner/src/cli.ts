#!/usr/bin/env node
import { loadRunnerConfig, resolveAdapter } from './adapters';
import { loadManifest } from './manifest';
import { runOverManifest } from './runner';

function usage(): never {
  console.error(
    [
      'usage: flowbench-run --manifest <benchmark-dir> --out <pred-dir> --model <spec> [--config models.json] [--quiet]',
      '',
      'model specs:',
      '  zero_flow              all-zero flow baseline',
      '  constant_flow:U,V      constant (U, V) flow baseline',
      '  <id>                   external model from --config (command template)',
    ].join('\n'),
  );
  process.exit(2);
}

function main(argv: string[]): number {
  const opts: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--quiet') {
      opts.quiet = true;
    } else if (arg.startsWith('--')) {
      const value = argv[++i];
      if (value === undefined) usage();
      opts[arg.slice(2)] = value;
    } else {
      usage();
    }
  }
  if (!opts.manifest || !opts.out || !opts.model) usage();

  const config = opts.config ? loadRunnerConfig(String(opts.config)) : undefined;
  const adapter = resolveAdapter(String(opts.model), config);
  const { manifest, dir } = loadManifest(String(opts.manifest));
  const log = opts.quiet ? () => {} : (line: string) => console.error(line);
  const stats = runOverManifest(manifest, dir, adapter, String(opts.out), log);
  console.log(
    `wrote ${stats.files} predictions (${stats.pairs} pairs x ${stats.cells} cells) for ${adapter.modelId}`,
  );
  return 0;
}

try {
  process.exit(main(process.argv.slice(2)));
} catch (err) {
  console.error(`error: ${(err as Error).message}`);
  process.exit(1);
}
