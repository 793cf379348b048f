import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { column, readCsv } from '../src/csv.js';

const FIXTURES = join(__dirname, 'fixtures');

function tmpCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), 'wfplots-'));
  const path = join(dir, 'data.csv');
  writeFileSync(path, content);
  return path;
}

describe('readCsv', () => {
  it('parses solver diagnostics with all declared columns', () => {
    const table = readCsv(join(FIXTURES, 'flow32', 'diagnostics.csv'));
    expect(table.columns).toContain('sup_u');
    expect(table.columns).toContain('R_of_t');
    expect(table.rows).toBeGreaterThan(3);
    expect(column(table, 't')[0]).toBe(0);
  });

  it('throws with the path on an empty file', () => {
    const path = tmpCsv('');
    expect(() => readCsv(path)).toThrow(path);
  });

  it('throws with the path on a header-only file', () => {
    const path = tmpCsv('t,sup_u\n');
    expect(() => readCsv(path)).toThrow(/no data rows/);
  });

  it('throws on ragged rows with the line number', () => {
    const path = tmpCsv('a,b\n1,2\n3\n');
    expect(() => readCsv(path)).toThrow(/:3:/);
  });

  it('names missing columns and lists available ones', () => {
    const table = readCsv(tmpCsv('a,b\n1,2\n'));
    expect(() => column(table, 'zzz')).toThrow(/missing column zzz/);
    expect(() => column(table, 'zzz')).toThrow(/has: a, b/);
  });

  it('keeps nan cells as NaN', () => {
    const table = readCsv(tmpCsv('a\nnan\n1.5\n'));
    const a = column(table, 'a');
    expect(Number.isNaN(a[0])).toBe(true);
    expect(a[1]).toBe(1.5);
  });
});
