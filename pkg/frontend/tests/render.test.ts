import { describe, it, expect } from "vitest";
import type { EmbeddedView, InstancedBackend, Viewport } from "../src/render.js";
import { RenderScheduler, intersects, visibleViews } from "../src/render.js";

const SCREEN: Viewport = { x: 0, y: 0, width: 800, height: 600 };

function view(id: string, x: number, y: number, seq = 0): EmbeddedView {
  return { id, viewport: { x, y, width: 100, height: 100 }, instanceCount: 147, requestSeq: seq };
}

class RecordingBackend implements InstancedBackend {
  calls: [string, number][] = [];
  drawInstanced(viewId: string, instances: number): void {
    this.calls.push([viewId, instances]);
  }
}

describe("intersects / visibleViews", () => {
  it("culls views fully outside the screen", () => {
    const views = [view("on", 10, 10), view("edge", 750, 550), view("off", 900, 0), view("neg", -200, -200)];
    expect(visibleViews(views, SCREEN).map((v) => v.id)).toEqual(["on", "edge"]);
  });

  it("touching edges do not count as overlap", () => {
    expect(intersects({ x: 0, y: 0, width: 10, height: 10 }, { x: 10, y: 0, width: 10, height: 10 })).toBe(false);
    expect(intersects({ x: 0, y: 0, width: 11, height: 10 }, { x: 10, y: 0, width: 10, height: 10 })).toBe(true);
  });
});

describe("RenderScheduler", () => {
  it("draws one instanced call per onscreen view", () => {
    const backend = new RecordingBackend();
    const sched = new RenderScheduler(backend);
    const draws = sched.frame([view("a", 0, 0), view("b", 200, 0), view("off", 5000, 0)], SCREEN);
    expect(draws).toBe(2);
    expect(backend.calls).toEqual([
      ["a", 147],
      ["b", 147],
    ]);
  });

  it("discards responses older than the latest issued request", () => {
    const backend = new RecordingBackend();
    const sched = new RenderScheduler(backend);
    sched.issued("a", 1);
    sched.issued("a", 3);
    sched.issued("a", 2); // out-of-order issue does not roll back
    expect(sched.isStale("a", 2)).toBe(true);
    expect(sched.isStale("a", 3)).toBe(false);
    const draws = sched.frame([view("a", 0, 0, 2), view("b", 200, 0, 0)], SCREEN);
    expect(draws).toBe(1);
    expect(backend.calls).toEqual([["b", 147]]);
  });

  it("renders the view once fresh data arrives", () => {
    const backend = new RecordingBackend();
    const sched = new RenderScheduler(backend);
    sched.issued("a", 5);
    expect(sched.frame([view("a", 0, 0, 4)], SCREEN)).toBe(0);
    expect(sched.frame([view("a", 0, 0, 5)], SCREEN)).toBe(1);
  });
});
