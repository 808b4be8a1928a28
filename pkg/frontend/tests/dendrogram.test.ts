import { describe, it, expect } from "vitest";
import type { DendrogramPayload, TreeNode } from "../src/api.js";
import { layoutDendrogram, subtreesBelowCutoff, panRange } from "../src/dendrogram.js";

function leaf(id: number, member: number): TreeNode {
  return {
    node_id: id,
    merge_height: 0,
    members: [member],
    medoid: member,
    color: "#888888",
    hue_range: [0, 360],
    label: `t${member}`,
  };
}

// ((0, 2) at h=1.0, 1) at h=2.5  — served leaf order is [0, 2, 1]
const TREE: TreeNode = {
  node_id: 4,
  merge_height: 2.5,
  members: [0, 2, 1],
  medoid: 0,
  color: "#222222",
  hue_range: [0, 360],
  label: "root",
  children: [
    {
      node_id: 3,
      merge_height: 1.0,
      members: [0, 2],
      medoid: 0,
      color: "#444444",
      hue_range: [0, 135],
      label: "pair",
      children: [leaf(0, 0), leaf(1, 2)],
    },
    leaf(2, 1),
  ],
};

const PAYLOAD: DendrogramPayload = {
  tree: TREE,
  leaf_order: [0, 2, 1],
  ordering_cost: 3.5,
  labels: ["a__b", "c__d", "e__f"],
  cluster_cutoff: 0,
};

describe("layoutDendrogram", () => {
  it("puts leaves at the served order slots (shared axis with the heatmap)", () => {
    const layout = layoutDendrogram(PAYLOAD);
    expect(layout.leafX.get(0)).toBe(0);
    expect(layout.leafX.get(2)).toBe(1);
    expect(layout.leafX.get(1)).toBe(2);
  });

  it("spans internal segments across child midpoints at the merge height", () => {
    const layout = layoutDendrogram(PAYLOAD);
    const pair = layout.segments.find((s) => s.nodeId === 3)!;
    expect(pair.x0).toBe(0);
    expect(pair.x1).toBe(1);
    expect(pair.xMid).toBe(0.5);
    expect(pair.y).toBe(1.0);
    const root = layout.segments.find((s) => s.nodeId === 4)!;
    expect(root.x0).toBe(0.5);
    expect(root.x1).toBe(2);
    expect(root.y).toBe(2.5);
    expect(layout.maxHeight).toBe(2.5);
  });

  it("rejects a leaf missing from the served order", () => {
    const bad = { ...PAYLOAD, leaf_order: [0, 2] };
    expect(() => layoutDendrogram(bad)).toThrow(/missing from served order/);
  });
});

describe("subtreesBelowCutoff", () => {
  it("returns maximal subtrees at or below the line", () => {
    expect(subtreesBelowCutoff(TREE, 1.0).sort()).toEqual([2, 3]);
    expect(subtreesBelowCutoff(TREE, 0.5).sort()).toEqual([0, 1, 2]);
    expect(subtreesBelowCutoff(TREE, 3)).toEqual([4]);
  });
});

describe("panRange", () => {
  it("keeps the window inside the leaf axis", () => {
    expect(panRange(0, 5, 10)).toEqual([0, 5]);
    expect(panRange(8, 5, 10)).toEqual([5, 10]);
    expect(panRange(-3, 5, 10)).toEqual([0, 5]);
  });
});
