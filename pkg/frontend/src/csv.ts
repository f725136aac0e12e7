/**
 * CSV ingestion for the solver's documented output schemas.
 *
 * profile.csv      x,u,v,region
 * convergence.csv  level,h,tau,nodes,elements,err_u,rate_u,err_v,rate_v
 *
 * Rate fields are empty on the first level; empty cells parse as NaN.
 */

import { readFileSync } from "fs";

export interface Table {
  header: string[];
  rows: string[][];
}

export class CsvError extends Error {}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new CsvError(`${path}: expected a header row and at least one data row`);
  }
  const header = lines[0]!.split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new CsvError(
        `${path}: row ${i + 1} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    return cells;
  });
  return { header, rows };
}

export function column(table: Table, name: string, path = "<csv>"): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`${path}: missing column '${name}' (have: ${table.header.join(",")})`);
  }
  return table.rows.map((row) => {
    const cell = row[idx]!;
    if (cell === "") return NaN;
    const value = Number(cell);
    if (Number.isNaN(value) && cell !== "nan") {
      throw new CsvError(`${path}: non-numeric cell '${cell}' in column '${name}'`);
    }
    return value;
  });
}

export interface Profile {
  x: number[];
  u: number[];
  v: number[];
  label: string;
}

export function readProfile(path: string, label: string): Profile {
  const table = readCsv(path);
  return {
    x: column(table, "x", path),
    u: column(table, "u", path),
    v: column(table, "v", path),
    label,
  };
}

export interface ConvergenceRows {
  h: number[];
  errU: number[];
  errV: number[];
}

export function readConvergence(path: string): ConvergenceRows {
  const table = readCsv(path);
  return {
    h: column(table, "h", path),
    errU: column(table, "err_u", path),
    errV: column(table, "err_v", path),
  };
}
