/**
 * Scratchpad canvas model: free-positioned items (text notes, titles,
 * transition and cluster views) plus visual group rectangles. Serializes to
 * the documents the service persists in the session file.
 */

export interface ScratchItemDoc {
  kind: "transition" | "cluster" | "text";
  position: [number, number];
  text?: string;
  is_title?: boolean;
  ref?: string;
  viz?: string;
  camera?: Record<string, unknown>;
  interpolation?: number;
}

export interface VisualGroupDoc {
  name: string;
  rect: [number, number, number, number]; // x, y, w, h
  parent?: string | null;
}

export class Scratchpad {
  items: ScratchItemDoc[] = [];
  groups: VisualGroupDoc[] = [];
  private groupCounter = 0;

  addText(x: number, y: number, text: string, isTitle = false): ScratchItemDoc {
    const item: ScratchItemDoc = {
      kind: "text",
      position: [x, y],
      text,
      is_title: isTitle,
    };
    this.items.push(item);
    return item;
  }

  addView(
    kind: "transition" | "cluster",
    x: number,
    y: number,
    ref: string,
    viz = "atom",
  ): ScratchItemDoc {
    const item: ScratchItemDoc = { kind, position: [x, y], ref, viz };
    this.items.push(item);
    return item;
  }

  addGroup(x: number, y: number, w: number, h: number): VisualGroupDoc {
    const g: VisualGroupDoc = {
      name: `group_${++this.groupCounter}`,
      rect: [x, y, w, h],
    };
    this.groups.push(g);
    return g;
  }

  move(item: ScratchItemDoc, x: number, y: number): void {
    item.position = [x, y];
  }

  remove(item: ScratchItemDoc): void {
    const i = this.items.indexOf(item);
    if (i >= 0) this.items.splice(i, 1);
  }

  removeGroup(group: VisualGroupDoc): void {
    const i = this.groups.indexOf(group);
    if (i >= 0) this.groups.splice(i, 1);
  }

  /** Innermost group rectangle containing a point ('' for the canvas). */
  innermostGroup(x: number, y: number): string {
    let best = "";
    let bestArea = Infinity;
    for (const g of this.groups) {
      const [gx, gy, gw, gh] = g.rect;
      if (x >= gx && x <= gx + gw && y >= gy && y <= gy + gh) {
        const area = gw * gh;
        if (area < bestArea) {
          bestArea = area;
          best = g.name;
        }
      }
    }
    return best;
  }

  /** The bold title inside a rectangle names it (innermost wins). */
  displayName(group: VisualGroupDoc): string {
    const [gx, gy, gw, gh] = group.rect;
    for (const item of this.items) {
      if (item.kind !== "text" || !item.is_title) continue;
      const [x, y] = item.position;
      if (x >= gx && x <= gx + gw && y >= gy && y <= gy + gh) {
        if (this.innermostGroup(x, y) === group.name) return item.text ?? group.name;
      }
    }
    return group.name;
  }

  toDocs(): { items: ScratchItemDoc[]; groups: VisualGroupDoc[] } {
    return { items: this.items, groups: this.groups };
  }

  static fromDocs(items: ScratchItemDoc[], groups: VisualGroupDoc[]): Scratchpad {
    const sp = new Scratchpad();
    sp.items = items.map((d) => ({ ...d, position: [...d.position] as [number, number] }));
    sp.groups = groups.map((d) => ({ ...d, rect: [...d.rect] as [number, number, number, number] }));
    sp.groupCounter = groups.length;
    return sp;
  }
}
