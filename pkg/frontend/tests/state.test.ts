import { describe, it, expect } from "vitest";
import { ViewStateStore, isHovered } from "../src/state.js";

describe("ViewStateStore", () => {
  it("propagates hover to every subscriber within the same frame", () => {
    const store = new ViewStateStore();
    const seenAtFrame: number[] = [];
    for (let v = 0; v < 4; v++) {
      store.subscribe(() => seenAtFrame.push(store.currentFrame()));
    }
    store.tick();
    store.tick();
    const frameAtHover = store.currentFrame();
    store.setHover({ kind: "atom", id: "17" });
    // emit was synchronous: all four views saw the change in the hover frame
    expect(seenAtFrame).toEqual([frameAtHover, frameAtHover, frameAtHover, frameAtHover]);
    expect(store.hoverFrame).toBe(frameAtHover);
  });

  it("does not re-emit for an identical hover target", () => {
    const store = new ViewStateStore();
    let calls = 0;
    store.subscribe(() => calls++);
    store.setHover({ kind: "leaf", id: "3" });
    store.setHover({ kind: "leaf", id: "3" });
    expect(calls).toBe(1);
    store.setHover(null);
    expect(calls).toBe(2);
    store.setHover(null);
    expect(calls).toBe(2);
  });

  it("identifies the hovered target for highlighting", () => {
    const store = new ViewStateStore();
    store.setHover({ kind: "transition", id: "s0__s1" });
    expect(isHovered(store.get(), { kind: "transition", id: "s0__s1" })).toBe(true);
    expect(isHovered(store.get(), { kind: "transition", id: "s0__s2" })).toBe(false);
    expect(isHovered(store.get(), { kind: "atom", id: "s0__s1" })).toBe(false);
  });

  it("validates slider and threshold ranges", () => {
    const store = new ViewStateStore();
    expect(() => store.setTimeSlider(-0.1)).toThrow(RangeError);
    expect(() => store.setTimeSlider(1.1)).toThrow(RangeError);
    expect(() => store.setTau(2)).toThrow(RangeError);
    expect(() => store.setClusterCutoff(-1)).toThrow(RangeError);
    store.setTimeSlider(0.5);
    store.setTau(0.75);
    store.setClusterCutoff(1.5);
    expect(store.get().timeSlider).toBe(0.5);
    expect(store.get().tau).toBe(0.75);
    expect(store.get().clusterCutoff).toBe(1.5);
  });

  it("unsubscribes cleanly", () => {
    const store = new ViewStateStore();
    let calls = 0;
    const off = store.subscribe(() => calls++);
    store.setMode("superquadric");
    off();
    store.setMode("group");
    expect(calls).toBe(1);
    expect(store.get().mode).toBe("group");
  });
});
