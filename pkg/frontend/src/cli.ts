/** Standalone figure renderer for warpflow run outputs.
 *
 * Usage:
 *   node dist/cli.js --kind decay          --input run/diagnostics.csv --output decay.svg
 *   node dist/cli.js --kind angle_envelope --input run/diagnostics.csv --output angle.svg
 *   node dist/cli.js --kind order --input a/diagnostics.csv --input b/diagnostics.csv --output order.svg
 *   node dist/cli.js --kind dss_region     --input dss/dss_verification.csv --output region.svg
 *
 * Optional: --title TEXT, --xlim LO,HI, --ylim LO,HI.
 * Sibling summary.json / dss_report.json / manifest.json files are read
 * from the input CSV's directory when the figure needs them.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { dirname } from 'node:path';

import { FigureKind, PlotSpec, buildFigure } from './figures.js';

const KINDS: FigureKind[] = ['decay', 'angle_envelope', 'order', 'dss_region'];

function parseLim(raw: string, flag: string): [number, number] {
  const parts = raw.split(',').map(Number);
  if (parts.length !== 2 || parts.some((v) => !Number.isFinite(v))) {
    throw new Error(`${flag} expects LO,HI, got ${raw}`);
  }
  return [parts[0], parts[1]];
}

export function parseArgs(argv: string[]): PlotSpec {
  const inputs: string[] = [];
  let kind: FigureKind | undefined;
  let output: string | undefined;
  let title: string | undefined;
  let xLim: [number, number] | undefined;
  let yLim: [number, number] | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${arg} expects a value`);
      return argv[++i];
    };
    switch (arg) {
      case '--kind': {
        const raw = next();
        if (!KINDS.includes(raw as FigureKind)) {
          throw new Error(`--kind must be one of ${KINDS.join(', ')}, got ${raw}`);
        }
        kind = raw as FigureKind;
        break;
      }
      case '--input':
        inputs.push(next());
        break;
      case '--output':
        output = next();
        break;
      case '--title':
        title = next();
        break;
      case '--xlim':
        xLim = parseLim(next(), '--xlim');
        break;
      case '--ylim':
        yLim = parseLim(next(), '--ylim');
        break;
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!kind) throw new Error('--kind is required');
  if (!output) throw new Error('--output is required');
  if (inputs.length === 0) throw new Error('at least one --input is required');
  return { kind, inputs, output, title, xLim, yLim };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const svg = buildFigure(spec);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, svg);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
