/**
 * Typed client for the analysis service. The UI never computes distances,
 * strains, alignments, or correlations itself — every number displayed comes
 * through this module, so the mock-service test harness can account for all
 * data flow.
 */

export type Fetcher = (url: string, init?: RequestInit) => Promise<Response>;

export interface DatasetSummary {
  name: string;
  transitions: number;
  states: number;
  atoms_per_state: number;
  feature_width: number;
  scalars: string[];
  reduction_cutoff: number;
  cluster_cutoff: number;
  kept: number | null;
}

export interface TreeNode {
  node_id: number;
  merge_height: number;
  members: number[];
  medoid: number;
  color: string;
  hue_range: [number, number];
  label: string;
  children?: TreeNode[];
}

export interface DendrogramPayload {
  tree: TreeNode;
  leaf_order: number[];
  ordering_cost: number;
  labels: string[];
  cluster_cutoff: number;
}

export interface ClusterPayload {
  node_id: number;
  label: string;
  members: string[];
  member_indices: number[];
  leaf_order: number[];
  medoid: number;
  medoid_label: string;
  grid_order: number;
  cells: Record<string, [number, number]>;
  merge_height: number;
  color: string;
}

export interface AlignedMember {
  label: string;
  is_reference: boolean;
  rotation: number[][] | null;
  residual: number | null;
  swapped: boolean | null;
  initial: number[][];
  final: number[][];
}

export interface GlyphRecord {
  atom: number;
  center: [number, number, number];
  quaternion: [number, number, number, number];
  semi_axes: [number, number, number];
  exponents: [number, number];
  color_scalar: number;
  alpha: number;
  degenerate: boolean;
}

export interface FieldPoint {
  position: [number, number, number];
  mean_displacement: [number, number, number];
  corr: number;
}

export interface FieldPayload {
  group_id: string;
  reference: [string, string];
  sigma: number;
  tau: number;
  n_members: number;
  excluded: string[];
  points: FieldPoint[];
}

export interface TransitionPayload {
  label: string;
  symbols: string[];
  initial: number[][];
  final: number[][];
  displacement_vectors: number[][];
  scalar: string | null;
  channels: Record<string, number[]>;
}

export interface DistanceTile {
  rowStart: number;
  rows: number;
  cols: number;
  values: Float32Array;
}

export interface HistogramPayload {
  counts: number[];
  edges: number[];
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public retryAfterMs?: number,
  ) {
    super(message);
  }
}

async function raiseFor(resp: Response): Promise<void> {
  if (resp.ok) return;
  let code = "error";
  let message = resp.statusText;
  let retry: number | undefined;
  try {
    const body = await resp.json();
    const detail = body.detail ?? body;
    if (typeof detail === "string") {
      message = detail;
    } else {
      code = detail.code ?? code;
      message = detail.message ?? JSON.stringify(detail);
      retry = detail.retry_after_ms;
    }
  } catch {
    /* non-JSON error body */
  }
  throw new ServiceError(resp.status, code, message, retry);
}

/** Decode a raw little-endian float32 row block using the tile headers. */
export function decodeTile(buffer: ArrayBuffer, headers: Headers): DistanceTile {
  const dtype = headers.get("X-Dtype");
  if (dtype !== "<f4") {
    throw new Error(`unsupported tile dtype ${dtype}`);
  }
  const rowsHeader = headers.get("X-Rows");
  const colsHeader = headers.get("X-Cols");
  if (rowsHeader === null || colsHeader === null) {
    throw new Error("missing X-Rows/X-Cols tile headers");
  }
  const rows = Number(rowsHeader);
  const cols = Number(colsHeader);
  const rowStart = Number(headers.get("X-Row-Start") ?? 0);
  if (!Number.isInteger(rows) || !Number.isInteger(cols)) {
    throw new Error("malformed X-Rows/X-Cols tile headers");
  }
  if (buffer.byteLength !== rows * cols * 4) {
    throw new Error(
      `tile size mismatch: ${buffer.byteLength} bytes for ${rows}x${cols}`,
    );
  }
  // wire format is little-endian; go through DataView so big-endian hosts
  // decode correctly too
  const values = new Float32Array(rows * cols);
  const view = new DataView(buffer);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(i * 4, true);
  }
  return { rowStart, rows, cols, values };
}

export class ApiClient {
  private seq = 0;

  constructor(
    private base: string,
    private fetcher: Fetcher = (u, i) => fetch(u, i),
  ) {}

  /** Monotone sequence number used to discard stale async responses. */
  nextSeq(): number {
    return ++this.seq;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetcher(this.base + path);
    await raiseFor(resp);
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetcher(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseFor(resp);
    return (await resp.json()) as T;
  }

  summary(): Promise<DatasetSummary> {
    return this.getJson("/dataset/summary");
  }

  async distanceTile(
    which: "full" | "reduced",
    rows?: [number, number],
  ): Promise<DistanceTile> {
    const q = rows ? `?rows=${rows[0]}:${rows[1]}` : "";
    const resp = await this.fetcher(`${this.base}/distance/${which}${q}`);
    await raiseFor(resp);
    return decodeTile(await resp.arrayBuffer(), resp.headers);
  }

  reductionHistogram(): Promise<HistogramPayload> {
    return this.getJson("/reduction/histogram");
  }

  setReduction(cutoff: number): Promise<{ cutoff: number; kept: number; cached: boolean }> {
    return this.postJson("/reduction", { cutoff });
  }

  dendrogram(): Promise<DendrogramPayload> {
    return this.getJson("/dendrogram");
  }

  setClusterCutoff(value: number): Promise<{ value: number; clusters: number }> {
    return this.postJson("/cluster-cutoff", { value });
  }

  cluster(nodeId: number): Promise<ClusterPayload> {
    return this.getJson(`/cluster/${nodeId}`);
  }

  alignedGroup(nodeId: number): Promise<{ members: AlignedMember[]; warnings: string[] }> {
    return this.getJson(`/cluster/${nodeId}/aligned`);
  }

  glyphs(nodeId: number): Promise<{ k1_scale: number; glyphs: Record<string, GlyphRecord[]> }> {
    return this.getJson(`/cluster/${nodeId}/glyphs`);
  }

  groupField(nodeId: number, tau = 0, sigma?: number): Promise<FieldPayload> {
    const s = sigma !== undefined ? `&sigma=${sigma}` : "";
    return this.getJson(`/cluster/${nodeId}/field?tau=${tau}${s}`);
  }

  transition(label: string, scalar?: string): Promise<TransitionPayload> {
    const q = scalar ? `?scalar=${encodeURIComponent(scalar)}` : "";
    return this.getJson(`/transition/${encodeURIComponent(label)}${q}`);
  }

  setLabel(nodeId: number, text: string): Promise<{ label: string }> {
    return this.postJson(`/node/${nodeId}/label`, { text });
  }

  setNotes(nodeId: number, text: string): Promise<{ notes: string }> {
    return this.postJson(`/node/${nodeId}/notes`, { text });
  }

  getScratchpad(): Promise<{ items: unknown[]; groups: unknown[] }> {
    return this.getJson("/scratchpad");
  }

  saveScratchpad(items: unknown[], groups: unknown[]): Promise<{ items: number; groups: number }> {
    return this.postJson("/scratchpad", { items, groups });
  }

  exportData(mode: "all" | "scratchpad", outDir: string): Promise<{ out_dir: string }> {
    return this.postJson("/export", { mode, out_dir: outDir });
  }
}
