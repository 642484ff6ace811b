import { execFileSync } from 'child_process';
import * as fs from 'fs';

import { FlowField, decodeFlo, makeFlow } from './flo';

/** One inference request: the two frames of a pair at some grid cell. */
export interface InferenceInput {
  pairId: string;
  frameA: string;
  frameB: string;
  width: number;
  height: number;
}

export interface ModelAdapter {
  modelId: string;
  /** GRU-style decoders iterate; published checkpoints use 12. */
  iterations?: number;
  infer(input: InferenceInput): FlowField;
}

/**
 * Baselines are pure functions of the pair dimensions, never of the pixel
 * content, hence corruption-invariant by construction.
 */
export function zeroFlow(): ModelAdapter {
  return {
    modelId: 'zero_flow',
    infer: (input) => makeFlow(input.width, input.height),
  };
}

export function constantFlow(u: number, v: number): ModelAdapter {
  return {
    modelId: `constant_flow_${u}_${v}`,
    infer: (input) => {
      const flow = makeFlow(input.width, input.height);
      for (let i = 0; i < flow.data.length; i += 2) {
        flow.data[i] = u;
        flow.data[i + 1] = v;
      }
      return flow;
    },
  };
}

export function builtinBaselines(): Record<string, (args: number[]) => ModelAdapter> {
  return {
    zero_flow: () => zeroFlow(),
    constant_flow: (args) => {
      if (args.length !== 2) {
        throw new Error('constant_flow needs two arguments: u,v');
      }
      return constantFlow(args[0], args[1]);
    },
  };
}

export interface ExternalModelConfig {
  /** argv template; {frame_a} {frame_b} {out} {iterations} are substituted */
  command: string[];
  checkpoint?: string;
  iterations?: number;
}

export interface RunnerConfig {
  models: Record<string, ExternalModelConfig>;
}

export function loadRunnerConfig(path: string): RunnerConfig {
  const config = JSON.parse(fs.readFileSync(path, 'utf-8')) as RunnerConfig;
  if (!config.models) {
    throw new Error(`${path}: config must carry a "models" map`);
  }
  return config;
}

/**
 * Adapter that shells out to an external inference command which must write
 * a .flo file at the {out} placeholder path.
 */
export function externalAdapter(modelId: string, config: ExternalModelConfig): ModelAdapter {
  const iterations = config.iterations ?? 12;
  return {
    modelId,
    iterations,
    infer: (input) => {
      const outPath = `${input.frameA}.pred.flo`;
      const argv = config.command.map((token) =>
        token
          .replace('{frame_a}', input.frameA)
          .replace('{frame_b}', input.frameB)
          .replace('{out}', outPath)
          .replace('{checkpoint}', config.checkpoint ?? '')
          .replace('{iterations}', String(iterations)),
      );
      execFileSync(argv[0], argv.slice(1), { stdio: 'pipe' });
      const flow = decodeFlo(fs.readFileSync(outPath));
      fs.rmSync(outPath, { force: true });
      return flow;
    },
  };
}

/** Resolve a model spec: builtin name (optionally with :args) or config id. */
export function resolveAdapter(spec: string, config?: RunnerConfig): ModelAdapter {
  const [name, argText] = spec.split(':', 2);
  const builtins = builtinBaselines();
  if (name in builtins) {
    const args = argText ? argText.split(',').map(Number) : [];
    if (args.some(Number.isNaN)) {
      throw new Error(`invalid numeric arguments in model spec '${spec}'`);
    }
    return builtins[name](args);
  }
  if (config && name in config.models) {
    return externalAdapter(name, config.models[name]);
  }
  const known = Object.keys(builtins).concat(Object.keys(config?.models ?? {}));
  throw new Error(`unknown model '${name}'; known: ${known.join(', ')}`);
}
