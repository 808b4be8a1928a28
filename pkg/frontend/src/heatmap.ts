/**
 * Distance heatmap assembly: served float32 row tiles are painted into an
 * RGBA pixel buffer in the served row/column order (shared with the
 * dendrogram axis). Values are never recomputed locally.
 */

import type { DistanceTile } from "./api.js";
import { heatmapColor } from "./colormap.js";

export interface HeatmapImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

export function allocImage(rows: number, cols: number): HeatmapImage {
  return {
    width: cols,
    height: rows,
    rgba: new Uint8ClampedArray(rows * cols * 4),
  };
}

/** Paint one tile into the image, normalizing by vmax. */
export function paintTile(
  img: HeatmapImage,
  tile: DistanceTile,
  vmax: number,
): void {
  if (tile.cols !== img.width) {
    throw new Error(`tile cols ${tile.cols} != image width ${img.width}`);
  }
  if (tile.rowStart + tile.rows > img.height) {
    throw new Error("tile exceeds image height");
  }
  for (let r = 0; r < tile.rows; r++) {
    for (let c = 0; c < tile.cols; c++) {
      const v = tile.values[r * tile.cols + c];
      const [red, green, blue] = heatmapColor(vmax > 0 ? v / vmax : 0);
      const o = ((tile.rowStart + r) * img.width + c) * 4;
      img.rgba[o] = red;
      img.rgba[o + 1] = green;
      img.rgba[o + 2] = blue;
      img.rgba[o + 3] = 255;
    }
  }
}

export function tileMax(tile: DistanceTile): number {
  let m = 0;
  for (const v of tile.values) if (v > m) m = v;
  return m;
}

/** Cell under a pointer position, given the current pan/zoom column range. */
export function pickCell(
  px: number,
  py: number,
  viewWidth: number,
  viewHeight: number,
  colRange: [number, number],
  rowRange: [number, number],
): { row: number; col: number } | null {
  if (px < 0 || py < 0 || px >= viewWidth || py >= viewHeight) return null;
  const cols = colRange[1] - colRange[0];
  const rows = rowRange[1] - rowRange[0];
  return {
    row: rowRange[0] + Math.floor((py / viewHeight) * rows),
    col: colRange[0] + Math.floor((px / viewWidth) * cols),
  };
}
