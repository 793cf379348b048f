import { readFileSync } from 'node:fs';

export interface CsvTable {
  path: string;
  columns: string[];
  rows: number;
  data: Map<string, number[]>;
}

/** Parse a numeric CSV with a header row. Throws with the file path on
 * structural problems; values that fail to parse become NaN (the solver
 * writes "nan" for monitors that were switched off). */
export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, 'utf8');
  const lines = text.split('\n').filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  const columns = lines[0].split(',').map((c) => c.trim());
  if (lines.length === 1) {
    throw new Error(`${path}: no data rows`);
  }
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== columns.length) {
      throw new Error(`${path}:${i + 1}: expected ${columns.length} cells, got ${cells.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      data.get(columns[j])!.push(Number(cells[j]));
    }
  }
  return { path, columns, rows: lines.length - 1, data };
}

/** Fetch a column, throwing with the file path when absent. */
export function column(table: CsvTable, name: string): number[] {
  const col = table.data.get(name);
  if (col === undefined) {
    throw new Error(`${table.path}: missing column ${name} (has: ${table.columns.join(', ')})`);
  }
  return col;
}

export function readJson(path: string): any {
  return JSON.parse(readFileSync(path, 'utf8'));
}
