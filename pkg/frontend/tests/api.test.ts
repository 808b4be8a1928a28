import { describe, it, expect } from "vitest";
import { ApiClient, ServiceError, decodeTile } from "../src/api.js";
import { MockService, makeTile } from "./mock_service.js";

const BASE = "http://service.test";

describe("decodeTile", () => {
  it("decodes a little-endian float32 row block", () => {
    const buf = new ArrayBuffer(6 * 4);
    const dv = new DataView(buf);
    const vals = [0, 1.5, -2.25, 3, 4.5, 100.125];
    vals.forEach((v, i) => dv.setFloat32(i * 4, v, true));
    const headers = new Headers({
      "X-Rows": "2",
      "X-Cols": "3",
      "X-Dtype": "<f4",
      "X-Row-Start": "7",
    });
    const tile = decodeTile(buf, headers);
    expect(tile.rows).toBe(2);
    expect(tile.cols).toBe(3);
    expect(tile.rowStart).toBe(7);
    expect(Array.from(tile.values)).toEqual(vals);
  });

  it("rejects an unknown dtype", () => {
    const headers = new Headers({ "X-Rows": "1", "X-Cols": "1", "X-Dtype": ">f8" });
    expect(() => decodeTile(new ArrayBuffer(8), headers)).toThrow(/dtype/);
  });

  it("rejects a size mismatch", () => {
    const headers = new Headers({ "X-Rows": "2", "X-Cols": "2", "X-Dtype": "<f4" });
    expect(() => decodeTile(new ArrayBuffer(12), headers)).toThrow(/size mismatch/);
  });

  it("rejects missing row/col headers", () => {
    const headers = new Headers({ "X-Dtype": "<f4" });
    expect(() => decodeTile(new ArrayBuffer(0), headers)).toThrow(/X-Rows/);
  });
});

describe("ApiClient", () => {
  it("fetches the dataset summary from the service", async () => {
    const svc = new MockService();
    svc.route("/dataset/summary", {
      body: {
        name: "demo",
        transitions: 6,
        states: 7,
        atoms_per_state: 13,
        feature_width: 3,
        scalars: ["energy"],
        reduction_cutoff: 1.0,
        cluster_cutoff: 0.0,
        kept: 6,
      },
    });
    const api = new ApiClient(BASE, svc.fetcher());
    const summary = await api.summary();
    expect(summary.transitions).toBe(6);
    expect(svc.requests.map((r) => r.url)).toEqual(["/dataset/summary"]);
  });

  it("requests and decodes distance tiles with a row range", async () => {
    const svc = new MockService();
    svc.route("/distance/reduced?rows=2:4", makeTile(2, 5, 2, (r, c) => r * 10 + c));
    const api = new ApiClient(BASE, svc.fetcher());
    const tile = await api.distanceTile("reduced", [2, 4]);
    expect(tile.rowStart).toBe(2);
    expect(tile.rows).toBe(2);
    expect(tile.cols).toBe(5);
    expect(tile.values[7]).toBeCloseTo(12, 6);
  });

  it("maps a 404 envelope to ServiceError with code unknown_id", async () => {
    const svc = new MockService();
    svc.route("/cluster/99", {
      status: 404,
      body: { detail: { code: "unknown_id", message: "no node 99" } },
    });
    const api = new ApiClient(BASE, svc.fetcher());
    const err = await api.cluster(99).catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("unknown_id");
    expect(err.message).toMatch(/no node 99/);
  });

  it("maps a 409 envelope to ServiceError with retry hint", async () => {
    const svc = new MockService();
    svc.route("/reduction", {
      status: 409,
      body: { detail: { code: "busy", message: "recompute running", retry_after_ms: 250 } },
    });
    const api = new ApiClient(BASE, svc.fetcher());
    const err = await api.setReduction(0.5).catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.code).toBe("busy");
    expect(err.retryAfterMs).toBe(250);
  });

  it("POSTs state changes with JSON bodies", async () => {
    const svc = new MockService();
    svc.route("/reduction", { body: { cutoff: 0.5, kept: 4, cached: false } });
    svc.route("/cluster-cutoff", { body: { value: 1.2, clusters: 3 } });
    svc.route("/node/5/label", { body: { label: "ridge hop" } });
    const api = new ApiClient(BASE, svc.fetcher());
    await api.setReduction(0.5);
    await api.setClusterCutoff(1.2);
    await api.setLabel(5, "ridge hop");
    expect(svc.requests).toEqual([
      { url: "/reduction", method: "POST", body: { cutoff: 0.5 } },
      { url: "/cluster-cutoff", method: "POST", body: { value: 1.2 } },
      { url: "/node/5/label", method: "POST", body: { text: "ridge hop" } },
    ]);
  });

  it("round-trips the scratchpad documents", async () => {
    const svc = new MockService();
    const items = [{ kind: "text", position: [1, 2], text: "hi" }];
    svc.route("/scratchpad", { body: { items, groups: [] } });
    const api = new ApiClient(BASE, svc.fetcher());
    const pad = await api.getScratchpad();
    expect(pad.items).toEqual(items);
    await api.saveScratchpad(pad.items, pad.groups);
    const post = svc.requests.find((r) => r.method === "POST");
    expect(post?.body).toEqual({ items, groups: [] });
  });

  it("escapes transition labels and scalar names in URLs", async () => {
    const svc = new MockService();
    svc.route("/transition/a%20b__c?scalar=e%2Ff", {
      body: {
        label: "a b__c",
        symbols: [],
        initial: [],
        final: [],
        displacement_vectors: [],
        scalar: "e/f",
        channels: {},
      },
    });
    const api = new ApiClient(BASE, svc.fetcher());
    const t = await api.transition("a b__c", "e/f");
    expect(t.scalar).toBe("e/f");
  });

  it("issues strictly increasing request sequence numbers", () => {
    const api = new ApiClient(BASE, new MockService().fetcher());
    const a = api.nextSeq();
    const b = api.nextSeq();
    expect(b).toBeGreaterThan(a);
  });
});
