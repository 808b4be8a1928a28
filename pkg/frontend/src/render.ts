/**
 * Thin rendering orchestration: instanced batches per view, offscreen
 * culling, and stale-response bookkeeping. The WebGL context is injected so
 * the scheduling logic stays headless-testable.
 */

export interface Viewport {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface EmbeddedView {
  id: string;
  viewport: Viewport;
  instanceCount: number;
  requestSeq: number; // sequence number of the data backing this view
}

export interface InstancedBackend {
  drawInstanced(viewId: string, instances: number): void;
}

export function intersects(a: Viewport, b: Viewport): boolean {
  return (
    a.x < b.x + b.width &&
    b.x < a.x + a.width &&
    a.y < b.y + b.height &&
    b.y < a.y + a.height
  );
}

/** Views whose viewports intersect the visible screen region. */
export function visibleViews(views: EmbeddedView[], screen: Viewport): EmbeddedView[] {
  return views.filter((v) => intersects(v.viewport, screen));
}

export class RenderScheduler {
  private latestSeq = new Map<string, number>();

  constructor(private backend: InstancedBackend) {}

  /** Record the newest request sequence issued for a view; responses with an
   * older sequence are discarded instead of rendered. */
  issued(viewId: string, seq: number): void {
    const prev = this.latestSeq.get(viewId) ?? -1;
    if (seq > prev) this.latestSeq.set(viewId, seq);
  }

  isStale(viewId: string, seq: number): boolean {
    return seq < (this.latestSeq.get(viewId) ?? -1);
  }

  /** One frame: draw only the onscreen views, one instanced call each. */
  frame(views: EmbeddedView[], screen: Viewport): number {
    let draws = 0;
    for (const v of visibleViews(views, screen)) {
      if (this.isStale(v.id, v.requestSeq)) continue;
      this.backend.drawInstanced(v.id, v.instanceCount);
      draws++;
    }
    return draws;
  }
}
