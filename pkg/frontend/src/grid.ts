/**
 * Embedding grid: places per-transition views on the cells served by the
 * cluster payload (a space-filling-curve layout computed server-side). The
 * UI consumes the mapping verbatim — cell-for-cell.
 */

import type { ClusterPayload } from "./api.js";

export interface GridCell {
  leaf: number; // index into the reduced matrix
  label: string;
  row: number;
  col: number;
  isMedoid: boolean;
}

export interface GridView {
  size: number; // grid is size x size
  cells: GridCell[];
}

export function buildGrid(payload: ClusterPayload): GridView {
  const size = 1 << payload.grid_order;
  const labelByLeaf = new Map<number, string>();
  payload.member_indices.forEach((leaf, i) => {
    labelByLeaf.set(leaf, payload.members[i]);
  });
  const cells: GridCell[] = [];
  const seen = new Set<string>();
  for (const [leafStr, [row, col]] of Object.entries(payload.cells)) {
    const leaf = Number(leafStr);
    if (row < 0 || col < 0 || row >= size || col >= size) {
      throw new Error(`cell (${row}, ${col}) outside ${size}x${size} grid`);
    }
    const key = `${row},${col}`;
    if (seen.has(key)) throw new Error(`duplicate cell ${key}`);
    seen.add(key);
    const label = labelByLeaf.get(leaf);
    if (label === undefined) throw new Error(`cell for unknown leaf ${leaf}`);
    cells.push({ leaf, label, row, col, isMedoid: leaf === payload.medoid });
  }
  if (cells.length !== payload.members.length) {
    throw new Error(
      `grid has ${cells.length} cells for ${payload.members.length} members`,
    );
  }
  return { size, cells };
}

/** "Show Medoid": exactly the one served medoid cell gets the outline. */
export function medoidCells(view: GridView): GridCell[] {
  return view.cells.filter((c) => c.isMedoid);
}

/** Cells in served leaf order (consecutive views sit in adjacent cells). */
export function cellsInOrder(view: GridView, leafOrder: number[]): GridCell[] {
  const byLeaf = new Map(view.cells.map((c) => [c.leaf, c]));
  return leafOrder.map((leaf) => {
    const cell = byLeaf.get(leaf);
    if (!cell) throw new Error(`leaf ${leaf} missing from grid`);
    return cell;
  });
}
