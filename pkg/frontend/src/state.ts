/**
 * Shared view state with linked hover: hovering an object in one view
 * highlights it in every other view in the same update tick.
 */

export type VizMode = "atom" | "superquadric" | "group";

export interface HoverTarget {
  kind: "transition" | "leaf" | "cluster" | "atom";
  id: string;
}

export interface ViewState {
  hovered: HoverTarget | null;
  timeSlider: number; // s in [0, 1]
  mode: VizMode;
  scalarChannel: string | null;
  tau: number;
  clusterCutoff: number;
}

export type Listener = (state: ViewState) => void;

export class ViewStateStore {
  private state: ViewState = {
    hovered: null,
    timeSlider: 0,
    mode: "atom",
    scalarChannel: null,
    tau: 0,
    clusterCutoff: 0,
  };
  private listeners = new Set<Listener>();
  private frame = 0;
  /** frame counter at the time of the last hover change; views compare
   * against this to verify single-frame propagation */
  hoverFrame = -1;

  get(): ViewState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  /** One render tick: bump the frame counter. */
  tick(): number {
    return ++this.frame;
  }

  currentFrame(): number {
    return this.frame;
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  setHover(target: HoverTarget | null): void {
    const prev = this.state.hovered;
    if (prev === target) return;
    if (prev && target && prev.kind === target.kind && prev.id === target.id) {
      return;
    }
    this.state = { ...this.state, hovered: target };
    this.hoverFrame = this.frame;
    this.emit(); // synchronous: all views see the hover this frame
  }

  setTimeSlider(s: number): void {
    if (s < 0 || s > 1) throw new RangeError("time slider must be in [0, 1]");
    this.state = { ...this.state, timeSlider: s };
    this.emit();
  }

  setMode(mode: VizMode): void {
    this.state = { ...this.state, mode };
    this.emit();
  }

  setScalarChannel(name: string | null): void {
    this.state = { ...this.state, scalarChannel: name };
    this.emit();
  }

  setTau(tau: number): void {
    if (tau < 0 || tau > 1) throw new RangeError("tau must be in [0, 1]");
    this.state = { ...this.state, tau };
    this.emit();
  }

  setClusterCutoff(value: number): void {
    if (value < 0) throw new RangeError("cutoff must be >= 0");
    this.state = { ...this.state, clusterCutoff: value };
    this.emit();
  }
}

/** Is `target` the hovered object (for highlight rendering)? */
export function isHovered(state: ViewState, target: HoverTarget): boolean {
  return (
    state.hovered !== null &&
    state.hovered.kind === target.kind &&
    state.hovered.id === target.id
  );
}
