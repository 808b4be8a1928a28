/**
 * Client-side tessellation of superquadric glyphs from the served parameters
 * (center, quaternion, semi-axes, exponent pair). Only geometry is built
 * here; all strain numbers arrive precomputed.
 */

import type { GlyphRecord } from "./api.js";

export interface Mesh {
  positions: Float32Array; // xyz triples
  normals: Float32Array;
  vertexCount: number;
}

function signedPow(x: number, e: number): number {
  // c(θ)^e with sign preserved; e = 0 collapses to the sign (box-like limit)
  const s = Math.sign(x);
  const a = Math.abs(x);
  if (e === 0) return s;
  return s * Math.pow(a, e);
}

export function quaternionToMatrix(
  [w, x, y, z]: [number, number, number, number],
): number[][] {
  return [
    [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
    [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
    [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
  ];
}

/**
 * Sample the superquadric surface on a (resU+1) x (resV+1) parameter grid.
 *
 *   p(θ, φ) = [ a sgncos^e1(φ) sgncos^e2(θ),
 *               b sgncos^e1(φ) sgnsin^e2(θ),
 *               c sgnsin^e1(φ) ]
 *
 * θ ∈ [-π, π], φ ∈ [-π/2, π/2]; e1/e2 come from the served exponent pair.
 */
export function tessellate(
  glyph: GlyphRecord,
  resU = 32,
  resV = 32,
): Mesh {
  const [e1, e2] = glyph.exponents;
  const [a, b, c] = glyph.semi_axes;
  const R = quaternionToMatrix(glyph.quaternion);
  const [cx, cy, cz] = glyph.center;

  const count = (resU + 1) * (resV + 1);
  const positions = new Float32Array(count * 3);
  const normals = new Float32Array(count * 3);
  let o = 0;
  for (let j = 0; j <= resV; j++) {
    const phi = -Math.PI / 2 + (Math.PI * j) / resV;
    for (let i = 0; i <= resU; i++) {
      const theta = -Math.PI + (2 * Math.PI * i) / resU;
      const lx = a * signedPow(Math.cos(phi), e1) * signedPow(Math.cos(theta), e2);
      const ly = b * signedPow(Math.cos(phi), e1) * signedPow(Math.sin(theta), e2);
      const lz = c * signedPow(Math.sin(phi), e1);
      // implicit-surface gradient in local frame gives the normal direction
      const nxl = signedPow(Math.cos(phi), 2 - e1) * signedPow(Math.cos(theta), 2 - e2) / a;
      const nyl = signedPow(Math.cos(phi), 2 - e1) * signedPow(Math.sin(theta), 2 - e2) / b;
      const nzl = signedPow(Math.sin(phi), 2 - e1) / c;
      const wx = R[0][0] * lx + R[0][1] * ly + R[0][2] * lz;
      const wy = R[1][0] * lx + R[1][1] * ly + R[1][2] * lz;
      const wz = R[2][0] * lx + R[2][1] * ly + R[2][2] * lz;
      positions[o] = wx + cx;
      positions[o + 1] = wy + cy;
      positions[o + 2] = wz + cz;
      let nx = R[0][0] * nxl + R[0][1] * nyl + R[0][2] * nzl;
      let ny = R[1][0] * nxl + R[1][1] * nyl + R[1][2] * nzl;
      let nz = R[2][0] * nxl + R[2][1] * nyl + R[2][2] * nzl;
      const len = Math.hypot(nx, ny, nz) || 1;
      nx /= len;
      ny /= len;
      nz /= len;
      normals[o] = nx;
      normals[o + 1] = ny;
      normals[o + 2] = nz;
      o += 3;
    }
  }
  return { positions, normals, vertexCount: count };
}

/** Reduced tessellation resolution when many views are visible (LOD). */
export function lodResolution(visibleViews: number): number {
  return visibleViews > 200 ? 12 : 32;
}
