/** The four diagnostic figures, built strictly from solver run outputs.
 *
 * No physics is recomputed here: every plotted quantity is a column of a
 * run CSV (or a scalar from the run's summary/report JSON), at most
 * squared or max-aggregated for display. A sha256 checksum of the
 * consumed columns is embedded in the figure metadata.
 */

import { createHash } from 'node:crypto';
import { dirname, join } from 'node:path';

import { CsvTable, column, readCsv, readJson } from './csv.js';
import { ChartSpec, Series, renderChart } from './svg.js';

export type FigureKind = 'decay' | 'angle_envelope' | 'order' | 'dss_region';

export interface PlotSpec {
  kind: FigureKind;
  inputs: string[]; // CSV paths; sibling summary/report/manifest JSONs are found next to them
  output: string;
  title?: string;
  xLim?: [number, number];
  yLim?: [number, number];
}

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

function checksumOf(parts: Array<[string, number[]]>): string {
  const h = createHash('sha256');
  for (const [name, values] of parts) {
    h.update(name);
    h.update(Buffer.from(Float64Array.from(values).buffer));
  }
  return h.digest('hex');
}

function sibling(csvPath: string, name: string): string {
  return join(dirname(csvPath), name);
}

function requireInputs(spec: PlotSpec, count: number, atLeast = false): void {
  if (atLeast ? spec.inputs.length < count : spec.inputs.length !== count) {
    throw new Error(
      `${spec.kind}: expected ${atLeast ? 'at least ' : ''}${count} input CSV(s), got ${spec.inputs.length}`,
    );
  }
}

export function buildDecay(spec: PlotSpec): ChartSpec {
  requireInputs(spec, 1);
  const diag = readCsv(spec.inputs[0]);
  const t = column(diag, 't');
  const supU = column(diag, 'sup_u');
  const R = column(diag, 'R_of_t');
  return {
    title: spec.title ?? 'Height decay vs parallel-slice barrier',
    xLabel: 't',
    yLabel: 'height',
    series: [
      { label: 'sup|u|(t)', x: t, y: supU, color: COLORS[0] },
      { label: 'barrier R(t)', x: t, y: R, color: COLORS[1], dash: '5 3' },
    ],
    xLim: spec.xLim,
    yLim: spec.yLim,
    checksum: checksumOf([
      ['t', t],
      ['sup_u', supU],
      ['R_of_t', R],
    ]),
  };
}

export function buildAngleEnvelope(spec: PlotSpec): ChartSpec {
  requireInputs(spec, 1);
  const diag = readCsv(spec.inputs[0]);
  const t = column(diag, 't');
  const minTheta = column(diag, 'min_theta');
  const fBar = column(diag, 'f_bar_of_t');
  const summary = readJson(sibling(spec.inputs[0], 'summary.json'));
  const fLimit = summary.barrier.f_limit as number;
  const minThetaSq = minTheta.map((v) => v * v); // display transform of the column
  const refLines =
    Number.isFinite(fLimit) ? [{ axis: 'y' as const, value: fLimit, label: 'limit of f_bar', color: '#555555' }] : [];
  return {
    title: spec.title ?? 'Angle floor vs comparison bound',
    xLabel: 't',
    yLabel: 'squared angle',
    series: [
      { label: 'min Theta^2(t)', x: t, y: minThetaSq, color: COLORS[0] },
      { label: 'f_bar(t)', x: t, y: fBar, color: COLORS[1], dash: '5 3' },
    ],
    refLines,
    xLim: spec.xLim,
    yLim: spec.yLim,
    checksum: checksumOf([
      ['t', t],
      ['min_theta', minTheta],
      ['f_bar_of_t', fBar],
      ['f_limit', [fLimit]],
    ]),
  };
}

function gridSpacing(csvPath: string): number {
  const manifest = readJson(sibling(csvPath, 'manifest.json'));
  const cfg = manifest.config ?? {};
  const nx = cfg['base.nx'];
  if (typeof nx !== 'number') {
    throw new Error(`${csvPath}: manifest lacks base.nx; cannot infer grid spacing`);
  }
  const period = typeof cfg['base.period_x'] === 'number' ? cfg['base.period_x'] : 1.0;
  return period / nx;
}

export function buildOrder(spec: PlotSpec): ChartSpec {
  requireInputs(spec, 2, true);
  const dxs: number[] = [];
  const res26: number[] = [];
  const res31: number[] = [];
  for (const input of spec.inputs) {
    const diag = readCsv(input);
    dxs.push(gridSpacing(input));
    res26.push(Math.max(...column(diag, 'res_cor26')));
    res31.push(Math.max(...column(diag, 'res_thm31_eq')));
  }
  const order = [...dxs.keys()].sort((a, b) => dxs[a] - dxs[b]);
  const dxSorted = order.map((i) => dxs[i]);
  const r26 = order.map((i) => res26[i]);
  const r31 = order.map((i) => res31[i]);
  // slope-2 reference anchored at the finest point of the first residual
  const refX = [dxSorted[0], dxSorted[dxSorted.length - 1]];
  const refY = refX.map((dx) => r26[0] * Math.pow(dx / dxSorted[0], 2));
  const series: Series[] = [
    { label: 'height-evolution residual', x: dxSorted, y: r26, color: COLORS[0], markers: true },
    { label: 'angle-evolution residual', x: dxSorted, y: r31, color: COLORS[1], markers: true },
    { label: 'slope 2 reference', x: refX, y: refY, color: '#777777', dash: '4 3' },
  ];
  return {
    title: spec.title ?? 'Residual convergence order',
    xLabel: 'grid spacing dx',
    yLabel: 'max residual',
    series,
    xLog: true,
    yLog: true,
    xLim: spec.xLim,
    yLim: spec.yLim,
    checksum: checksumOf([
      ['dx', dxSorted],
      ['res_cor26', r26],
      ['res_thm31_eq', r31],
    ]),
  };
}

export function buildDssRegion(spec: PlotSpec): ChartSpec {
  requireInputs(spec, 1);
  const table = readCsv(spec.inputs[0]);
  const s = column(table, 's');
  const cond = column(table, 'condition_value');
  const iden = column(table, 'identity_value');
  const report = readJson(sibling(spec.inputs[0], 'dss_report.json'));
  const sStar = report.s_star as number;
  return {
    title: spec.title ?? 'Admissibility region of the dSS warp',
    xLabel: 's',
    yLabel: 'h h″ − (h′)²',
    series: [
      { label: 'h h″ − (h′)²', x: s, y: cond, color: COLORS[0] },
      { label: 'm n s^(2−n)/2 − 1', x: s, y: iden, color: COLORS[1], dash: '5 3' },
    ],
    refLines: [
      { axis: 'x', value: sStar, label: 's_star', color: '#555555' },
      { axis: 'y', value: 0.0, label: '', color: '#aaaaaa' },
    ],
    xLim: spec.xLim,
    yLim: spec.yLim,
    checksum: checksumOf([
      ['s', s],
      ['condition_value', cond],
      ['identity_value', iden],
      ['s_star', [sStar]],
    ]),
  };
}

export function buildFigure(spec: PlotSpec): string {
  switch (spec.kind) {
    case 'decay':
      return renderChart(buildDecay(spec));
    case 'angle_envelope':
      return renderChart(buildAngleEnvelope(spec));
    case 'order':
      return renderChart(buildOrder(spec));
    case 'dss_region':
      return renderChart(buildDssRegion(spec));
    default:
      throw new Error(`unknown figure kind ${(spec as PlotSpec).kind}`);
  }
}
