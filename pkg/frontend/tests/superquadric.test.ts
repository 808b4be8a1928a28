import { describe, it, expect } from "vitest";
import type { GlyphRecord } from "../src/api.js";
import { tessellate, quaternionToMatrix, lodResolution } from "../src/superquadric.js";

function glyph(overrides: Partial<GlyphRecord> = {}): GlyphRecord {
  return {
    atom: 0,
    center: [0, 0, 0],
    quaternion: [1, 0, 0, 0],
    semi_axes: [1, 1, 1],
    exponents: [1, 1],
    color_scalar: 0,
    alpha: 1,
    degenerate: false,
    ...overrides,
  };
}

describe("quaternionToMatrix", () => {
  it("identity quaternion gives the identity matrix", () => {
    expect(quaternionToMatrix([1, 0, 0, 0])).toEqual([
      [1, 0, 0],
      [0, 1, 0],
      [0, 0, 1],
    ]);
  });

  it("a z-axis quarter turn maps x to y", () => {
    const s = Math.SQRT1_2;
    const R = quaternionToMatrix([s, 0, 0, s]);
    const v = [R[0][0], R[1][0], R[2][0]]; // image of x̂
    expect(v[0]).toBeCloseTo(0, 12);
    expect(v[1]).toBeCloseTo(1, 12);
    expect(v[2]).toBeCloseTo(0, 12);
  });
});

describe("tessellate", () => {
  it("unit exponents with equal semi-axes give a sphere of that radius", () => {
    const mesh = tessellate(glyph({ semi_axes: [2, 2, 2] }), 16, 16);
    expect(mesh.vertexCount).toBe(17 * 17);
    for (let i = 0; i < mesh.vertexCount; i++) {
      const r = Math.hypot(
        mesh.positions[3 * i],
        mesh.positions[3 * i + 1],
        mesh.positions[3 * i + 2],
      );
      // positions are stored as float32, so compare at single precision
      expect(r).toBeCloseTo(2, 5);
    }
  });

  it("positions stay inside the semi-axis bounding box and normals are unit", () => {
    const g = glyph({ semi_axes: [1.5, 0.5, 2], exponents: [0.3, 1.7] });
    const mesh = tessellate(g, 24, 24);
    for (let i = 0; i < mesh.vertexCount; i++) {
      expect(Math.abs(mesh.positions[3 * i])).toBeLessThanOrEqual(1.5 + 1e-9);
      expect(Math.abs(mesh.positions[3 * i + 1])).toBeLessThanOrEqual(0.5 + 1e-9);
      expect(Math.abs(mesh.positions[3 * i + 2])).toBeLessThanOrEqual(2 + 1e-9);
      const n = Math.hypot(
        mesh.normals[3 * i],
        mesh.normals[3 * i + 1],
        mesh.normals[3 * i + 2],
      );
      expect(n).toBeCloseTo(1, 6);
    }
  });

  it("applies center translation and quaternion rotation", () => {
    const s = Math.SQRT1_2;
    const g = glyph({
      semi_axes: [3, 1, 1],
      center: [10, 20, 30],
      quaternion: [s, 0, 0, s], // quarter turn about z: long axis now along y
    });
    const mesh = tessellate(g, 8, 8);
    let maxDx = 0;
    let maxDy = 0;
    for (let i = 0; i < mesh.vertexCount; i++) {
      maxDx = Math.max(maxDx, Math.abs(mesh.positions[3 * i] - 10));
      maxDy = Math.max(maxDy, Math.abs(mesh.positions[3 * i + 1] - 20));
    }
    expect(maxDy).toBeCloseTo(3, 6);
    expect(maxDx).toBeLessThanOrEqual(1 + 1e-6);
  });

  it("defaults to a 33 x 33 vertex grid", () => {
    expect(tessellate(glyph()).vertexCount).toBe(33 * 33);
  });
});

describe("lodResolution", () => {
  it("drops to the coarse mesh only above 200 visible views", () => {
    expect(lodResolution(1)).toBe(32);
    expect(lodResolution(200)).toBe(32);
    expect(lodResolution(201)).toBe(12);
    expect(lodResolution(5000)).toBe(12);
  });
});
