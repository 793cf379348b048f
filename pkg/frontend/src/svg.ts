/** Minimal deterministic SVG line-chart renderer.
 *
 * Fixed 720x480 canvas, no timestamps, no randomness: identical inputs
 * produce byte-identical SVG, so figures can be golden-hashed. The data
 * checksum supplied by the figure builder is embedded in <metadata>.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dash?: string;
  markers?: boolean;
}

export interface RefLine {
  axis: 'x' | 'y';
  value: number;
  label: string;
  color: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  refLines?: RefLine[];
  xLog?: boolean;
  yLog?: boolean;
  xLim?: [number, number];
  yLim?: [number, number];
  checksum: string;
}

const W = 720;
const H = 480;
const M = { left: 72, right: 24, top: 44, bottom: 52 };

function fmt(v: number): string {
  if (!Number.isFinite(v)) return '0';
  return v.toFixed(2);
}

function fmtTick(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace('e', 'e');
  return Number(v.toPrecision(4)).toString();
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(1, n - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi) + 1e-12; e++) {
    ticks.push(e);
  }
  if (ticks.length < 2) return [lo, hi];
  return ticks;
}

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function renderChart(spec: ChartSpec): string {
  const tf = (v: number, log: boolean | undefined) => (log ? Math.log10(v) : v);

  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of spec.series) {
    for (let i = 0; i < s.x.length; i++) {
      const xv = tf(s.x[i], spec.xLog);
      const yv = tf(s.y[i], spec.yLog);
      if (Number.isFinite(xv) && Number.isFinite(yv)) {
        xs.push(xv);
        ys.push(yv);
      }
    }
  }
  if (xs.length === 0) {
    throw new Error(`chart "${spec.title}": no finite data points`);
  }
  for (const r of spec.refLines ?? []) {
    const v = tf(r.value, r.axis === 'x' ? spec.xLog : spec.yLog);
    if (Number.isFinite(v)) (r.axis === 'x' ? xs : ys).push(v);
  }

  let x0 = spec.xLim ? tf(spec.xLim[0], spec.xLog) : Math.min(...xs);
  let x1 = spec.xLim ? tf(spec.xLim[1], spec.xLog) : Math.max(...xs);
  let y0 = spec.yLim ? tf(spec.yLim[0], spec.yLog) : Math.min(...ys);
  let y1 = spec.yLim ? tf(spec.yLim[1], spec.yLog) : Math.max(...ys);
  if (x1 - x0 < 1e-300) [x0, x1] = [x0 - 1, x1 + 1];
  if (y1 - y0 < 1e-300) [y0, y1] = [y0 - 1, y1 + 1];
  const padY = 0.06 * (y1 - y0);
  if (!spec.yLim) {
    y0 -= padY;
    y1 += padY;
  }

  const px = (v: number) => M.left + ((v - x0) / (x1 - x0)) * (W - M.left - M.right);
  const py = (v: number) => H - M.bottom - ((v - y0) / (y1 - y0)) * (H - M.top - M.bottom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
  );
  parts.push(`<metadata>data-checksum=${spec.checksum}</metadata>`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(
    `<text x="${W / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">${esc(spec.title)}</text>`,
  );

  const xticks = spec.xLog ? logTicks(x0, x1) : niceTicks(x0, x1);
  const yticks = spec.yLog ? logTicks(y0, y1) : niceTicks(y0, y1);
  for (const t of xticks) {
    const x = px(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${M.top}" x2="${fmt(x)}" y2="${H - M.bottom}" stroke="#dddddd" stroke-width="1"/>`,
    );
    const label = spec.xLog ? `1e${fmtTick(t)}` : fmtTick(t);
    parts.push(
      `<text x="${fmt(x)}" y="${H - M.bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${esc(label)}</text>`,
    );
  }
  for (const t of yticks) {
    const y = py(t);
    parts.push(
      `<line x1="${M.left}" y1="${fmt(y)}" x2="${W - M.right}" y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    const label = spec.yLog ? `1e${fmtTick(t)}` : fmtTick(t);
    parts.push(
      `<text x="${M.left - 6}" y="${fmt(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${esc(label)}</text>`,
    );
  }
  parts.push(
    `<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${(M.left + W - M.right) / 2}" y="${H - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${esc(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${(M.top + H - M.bottom) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${(M.top + H - M.bottom) / 2})">${esc(spec.yLabel)}</text>`,
  );

  for (const r of spec.refLines ?? []) {
    const v = tf(r.value, r.axis === 'x' ? spec.xLog : spec.yLog);
    if (!Number.isFinite(v)) continue;
    if (r.axis === 'x') {
      const x = px(v);
      parts.push(
        `<line x1="${fmt(x)}" y1="${M.top}" x2="${fmt(x)}" y2="${H - M.bottom}" stroke="${r.color}" stroke-width="1.5" stroke-dasharray="6 3"/>`,
      );
      parts.push(
        `<text x="${fmt(x + 4)}" y="${M.top + 14}" font-family="sans-serif" font-size="11" fill="${r.color}">${esc(r.label)}</text>`,
      );
    } else {
      const y = py(v);
      parts.push(
        `<line x1="${M.left}" y1="${fmt(y)}" x2="${W - M.right}" y2="${fmt(y)}" stroke="${r.color}" stroke-width="1.5" stroke-dasharray="6 3"/>`,
      );
      parts.push(
        `<text x="${W - M.right - 4}" y="${fmt(y - 5)}" text-anchor="end" font-family="sans-serif" font-size="11" fill="${r.color}">${esc(r.label)}</text>`,
      );
    }
  }

  for (const s of spec.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const xv = tf(s.x[i], spec.xLog);
      const yv = tf(s.y[i], spec.yLog);
      if (Number.isFinite(xv) && Number.isFinite(yv)) {
        pts.push(`${fmt(px(xv))},${fmt(py(yv))}`);
      }
    }
    if (pts.length === 0) continue;
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : '';
    if (pts.length > 1) {
      parts.push(
        `<polyline points="${pts.join(' ')}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`,
      );
    }
    if (s.markers || pts.length === 1) {
      for (const p of pts) {
        const [cx, cy] = p.split(',');
        parts.push(`<circle cx="${cx}" cy="${cy}" r="3.2" fill="${s.color}"/>`);
      }
    }
  }

  const legendX = M.left + 10;
  let legendY = M.top + 16;
  for (const s of spec.series) {
    parts.push(
      `<line x1="${legendX}" y1="${legendY - 4}" x2="${legendX + 26}" y2="${legendY - 4}" stroke="${s.color}" stroke-width="2"${s.dash ? ` stroke-dasharray="${s.dash}"` : ''}/>`,
    );
    parts.push(
      `<text x="${legendX + 32}" y="${legendY}" font-family="sans-serif" font-size="12">${esc(s.label)}</text>`,
    );
    legendY += 16;
  }

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
