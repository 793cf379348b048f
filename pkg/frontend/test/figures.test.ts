import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { column, readCsv, readJson } from '../src/csv.js';
import { PlotSpec, buildFigure, buildOrder } from '../src/figures.js';

const FIXTURES = join(__dirname, 'fixtures');
const FLOW = join(FIXTURES, 'flow32', 'diagnostics.csv');
const FLOW_COARSE = join(FIXTURES, 'flow24', 'diagnostics.csv');
const FLOW_FINE = join(FIXTURES, 'flow48', 'diagnostics.csv');
const DSS = join(FIXTURES, 'dss', 'dss_verification.csv');

function spec(kind: PlotSpec['kind'], inputs: string[]): PlotSpec {
  return { kind, inputs, output: '/dev/null' };
}

describe('decay figure', () => {
  it('renders both curves and embeds a checksum', () => {
    const svg = buildFigure(spec('decay', [FLOW]));
    expect(svg).toContain('<svg');
    expect(svg).toContain('sup|u|(t)');
    expect(svg).toContain('barrier R(t)');
    expect(svg).toMatch(/data-checksum=[0-9a-f]{64}/);
  });

  it('containment holds in the plotted data itself', () => {
    // re-assert from the CSV: the solver's height stays under the barrier
    const table = readCsv(FLOW);
    const supU = column(table, 'sup_u');
    const R = column(table, 'R_of_t');
    for (let i = 0; i < supU.length; i++) {
      expect(supU[i]).toBeLessThanOrEqual(R[i] + 1e-3);
    }
  });
});

describe('angle envelope figure', () => {
  it('draws the angle floor, the bound, and the horizontal asymptote', () => {
    const svg = buildFigure(spec('angle_envelope', [FLOW]));
    expect(svg).toContain('min Theta^2(t)');
    expect(svg).toContain('f_bar(t)');
    expect(svg).toContain('limit of f_bar');
    // the asymptote value comes from the run summary, not a recomputation
    const summary = readJson(join(FIXTURES, 'flow32', 'summary.json'));
    expect(typeof summary.barrier.f_limit).toBe('number');
  });

  it('angle bound holds in the plotted data itself', () => {
    const table = readCsv(FLOW);
    const minTheta = column(table, 'min_theta');
    const fBar = column(table, 'f_bar_of_t');
    for (let i = 0; i < minTheta.length; i++) {
      expect(minTheta[i] * minTheta[i]).toBeGreaterThanOrEqual(fBar[i] - 1e-3);
    }
  });
});

describe('order figure', () => {
  it('uses log axes and a slope-2 reference', () => {
    const svg = buildFigure(spec('order', [FLOW_COARSE, FLOW_FINE]));
    expect(svg).toContain('slope 2 reference');
    expect(svg).toContain('height-evolution residual');
    expect(svg).toContain('1e'); // log tick labels
  });

  it('residuals in the consumed CSVs actually refine near second order', () => {
    const chart = buildOrder(spec('order', [FLOW_COARSE, FLOW_FINE]));
    const r26 = chart.series[0];
    const ratio = r26.y[1] / r26.y[0]; // coarse over fine, dx sorted ascending
    const orderObserved = Math.log2(ratio) / Math.log2(r26.x[1] / r26.x[0]);
    expect(orderObserved).toBeGreaterThan(1.5);
    expect(orderObserved).toBeLessThan(2.5);
  });

  it('requires at least two inputs', () => {
    expect(() => buildFigure(spec('order', [FLOW_COARSE]))).toThrow(/at least 2/);
  });
});

describe('dss region figure', () => {
  it('marks the critical height from the report', () => {
    const svg = buildFigure(spec('dss_region', [DSS]));
    expect(svg).toContain('s_star');
    const report = readJson(join(FIXTURES, 'dss', 'dss_report.json'));
    expect(report.s_star).toBe(1.5);
  });

  it('condition and identity columns agree in the data', () => {
    const table = readCsv(DSS);
    const cond = column(table, 'condition_value');
    const iden = column(table, 'identity_value');
    for (let i = 0; i < cond.length; i++) {
      expect(Math.abs(cond[i] - iden[i])).toBeLessThanOrEqual(1e-6);
    }
  });
});

describe('failure modes', () => {
  it('missing column fails with the offending file', () => {
    expect(() => buildFigure(spec('decay', [DSS]))).toThrow(/missing column/);
    expect(() => buildFigure(spec('decay', [DSS]))).toThrow(/dss_verification\.csv/);
  });

  it('missing file fails with the path', () => {
    expect(() => buildFigure(spec('decay', [join(FIXTURES, 'nope.csv')]))).toThrow(/nope\.csv/);
  });
});
