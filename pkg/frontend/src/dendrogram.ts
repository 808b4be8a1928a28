/**
 * Dendrogram layout from the served tree: leaf x-positions follow the served
 * leaf order exactly (the heatmap shares the same axis), merge heights map to
 * y. Layout only — cluster structure and colors come from the service.
 */

import type { DendrogramPayload, TreeNode } from "./api.js";

export interface DendroSegment {
  nodeId: number;
  x0: number;
  x1: number;
  xMid: number;
  y: number; // merge height
  color: string;
  label: string;
  isLeaf: boolean;
}

export interface DendroLayout {
  segments: DendroSegment[];
  leafX: Map<number, number>; // leaf index -> x slot
  maxHeight: number;
}

export function layoutDendrogram(payload: DendrogramPayload): DendroLayout {
  const leafX = new Map<number, number>();
  payload.leaf_order.forEach((leaf, i) => leafX.set(leaf, i));

  const segments: DendroSegment[] = [];
  let maxHeight = 0;

  function place(node: TreeNode): { x0: number; x1: number; xMid: number } {
    if (!node.children || node.children.length === 0) {
      const x = leafX.get(node.members[0]);
      if (x === undefined) {
        throw new Error(`leaf ${node.members[0]} missing from served order`);
      }
      segments.push({
        nodeId: node.node_id,
        x0: x,
        x1: x,
        xMid: x,
        y: 0,
        color: node.color,
        label: node.label,
        isLeaf: true,
      });
      return { x0: x, x1: x, xMid: x };
    }
    const spans = node.children.map(place);
    const mids = spans.map((s) => s.xMid);
    const x0 = Math.min(...mids);
    const x1 = Math.max(...mids);
    const xMid = (x0 + x1) / 2;
    maxHeight = Math.max(maxHeight, node.merge_height);
    segments.push({
      nodeId: node.node_id,
      x0,
      x1,
      xMid,
      y: node.merge_height,
      color: node.color,
      label: node.label,
      isLeaf: false,
    });
    return { x0, x1, xMid };
  }

  place(payload.tree);
  return { segments, leafX, maxHeight };
}

/** Node ids of subtrees fully below the cutoff line (for rectangle overlays
 * on the heatmap; the authoritative flat clustering is POSTed to the service). */
export function subtreesBelowCutoff(tree: TreeNode, cutoff: number): number[] {
  const out: number[] = [];
  function descend(node: TreeNode): void {
    if (node.merge_height <= cutoff) {
      out.push(node.node_id);
      return;
    }
    for (const c of node.children ?? []) descend(c);
  }
  descend(tree);
  return out;
}

/** Shared-axis pan: converting a dendrogram pan (in leaf slots) to the
 * identical heatmap column range. */
export function panRange(
  firstSlot: number,
  visibleSlots: number,
  totalLeaves: number,
): [number, number] {
  const start = Math.max(0, Math.min(firstSlot, totalLeaves - visibleSlots));
  return [start, Math.min(totalLeaves, start + visibleSlots)];
}
