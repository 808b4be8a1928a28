/**
 * Group displacement view: per-position render decision from the served
 * correlation values and the local threshold slider. Raising the threshold
 * never colors a gray atom (monotone filtering).
 */

import type { FieldPayload, FieldPoint, TransitionPayload } from "./api.js";

export interface GroupRenderItem {
  index: number;
  position: [number, number, number];
  kind: "colored" | "gray";
  corr: number;
  arrow: [number, number, number] | null;
}

export function renderDecision(point: FieldPoint, index: number, tau: number): GroupRenderItem {
  if (point.corr >= tau) {
    return {
      index,
      position: point.position,
      kind: "colored",
      corr: point.corr,
      arrow: point.mean_displacement,
    };
  }
  return {
    index,
    position: point.position,
    kind: "gray",
    corr: point.corr,
    arrow: null,
  };
}

export function renderField(field: FieldPayload, tau: number): GroupRenderItem[] {
  if (tau < 0 || tau > 1) throw new RangeError("tau must be in [0, 1]");
  return field.points.map((p, i) => renderDecision(p, i, tau));
}

export function coloredCount(items: GroupRenderItem[]): number {
  return items.reduce((n, it) => n + (it.kind === "colored" ? 1 : 0), 0);
}

/** Time-slider positions: linear blend of the served endpoint states. */
export function interpolatePositions(
  payload: TransitionPayload,
  s: number,
): number[][] {
  if (s < 0 || s > 1) throw new RangeError("s must be in [0, 1]");
  return payload.initial.map((p0, i) => {
    const p1 = payload.final[i];
    return [0, 1, 2].map((k) => (1 - s) * p0[k] + s * p1[k]);
  });
}
