"""Local HTTP/JSON service driving the explorer UI.

All numerical analysis happens here; the UI only renders served values.
Distance heatmaps are served as raw little-endian float32 row blocks.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from .engine import BusyError, Engine, UnknownIdError
from .model import ValidationError
from .session import ScratchItem, Session, VisualGroup, export_all, export_scratchpad


class ReductionRequest(BaseModel):
    cutoff: float = Field(ge=0)


class CutoffRequest(BaseModel):
    value: float = Field(ge=0)


class TextRequest(BaseModel):
    text: str


class ExportRequest(BaseModel):
    mode: str  # "all" | "scratchpad"
    out_dir: str


class ScratchpadDoc(BaseModel):
    items: list[dict] = Field(default_factory=list)
    groups: list[dict] = Field(default_factory=list)


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="mdtransit service")
    engine.ensure_pipeline()

    def _404(detail: str) -> HTTPException:
        return HTTPException(404, {"code": "unknown_id", "message": detail})

    @app.get("/dataset/summary")
    def dataset_summary():
        ds = engine.dataset
        return {
            "name": ds.name,
            "transitions": ds.n_transitions,
            "states": len(ds.states),
            "atoms_per_state": next(iter(ds.transitions.values())).n,
            "feature_width": ds.k,
            "scalars": sorted(ds.scalars),
            "reduction_cutoff": engine.session.reduction_cutoff,
            "cluster_cutoff": engine.session.cluster_cutoff,
            "kept": len(engine.reduction.kept) if engine.reduction else None,
        }

    def _tile_response(which: str, rows: str | None) -> Response:
        dm = engine.full_dm if which == "full" else engine.reduction.reduced
        m = dm.m
        start, stop = 0, m
        if rows:
            try:
                a, b = rows.split(":")
                start, stop = int(a), int(b)
            except ValueError:
                raise HTTPException(422, "rows must be 'start:stop'")
        try:
            payload = engine.distance_rows(which, start, stop)
        except ValidationError as e:
            raise HTTPException(422, str(e))
        return Response(
            content=payload,
            media_type="application/octet-stream",
            headers={
                "X-Rows": str(stop - start),
                "X-Cols": str(m),
                "X-Dtype": "<f4",
                "X-Row-Start": str(start),
            },
        )

    @app.get("/distance/full")
    def distance_full(rows: str | None = Query(default=None)):
        return _tile_response("full", rows)

    @app.get("/distance/reduced")
    def distance_reduced(rows: str | None = Query(default=None)):
        return _tile_response("reduced", rows)

    @app.get("/reduction/histogram")
    def reduction_histogram():
        return engine.reduction_histogram()

    @app.post("/reduction")
    def post_reduction(req: ReductionRequest):
        try:
            result, cached = engine.set_reduction(req.cutoff)
        except BusyError as e:
            raise HTTPException(
                409, {"code": "busy", "message": str(e), "retry_after_ms": 500}
            )
        return {
            "cutoff": result.cutoff,
            "kept": len(result.kept),
            "removed": sum(len(v) for v in result.removed.values()),
            "cached": cached,
        }

    @app.get("/dendrogram")
    def dendrogram():
        return engine.dendrogram_payload()

    @app.post("/cluster-cutoff")
    def cluster_cutoff(req: CutoffRequest):
        engine.set_cluster_cutoff(req.value)
        return {
            "value": engine.session.cluster_cutoff,
            "clusters": len(engine.flat_clusters()),
        }

    @app.get("/cluster/{node_id}")
    def cluster(node_id: int):
        try:
            return engine.cluster_payload(node_id)
        except UnknownIdError as e:
            raise _404(str(e))

    @app.get("/cluster/{node_id}/aligned")
    def cluster_aligned(node_id: int):
        try:
            aligned, ga = engine.aligned_group(node_id)
        except UnknownIdError as e:
            raise _404(str(e))
        out = []
        for i, t in enumerate(aligned):
            r = ga.results[i]
            out.append(
                {
                    "label": "__".join(t.label),
                    "is_reference": i == ga.reference_index,
                    "rotation": None if r is None else r.rotation.tolist(),
                    "residual": None if r is None else r.residual,
                    "swapped": None if r is None else r.swapped,
                    "initial": t.initial.positions.tolist(),
                    "final": t.final.positions.tolist(),
                }
            )
        return {"node_id": node_id, "members": out, "warnings": ga.warnings}

    @app.get("/cluster/{node_id}/glyphs")
    def cluster_glyphs(node_id: int):
        try:
            return engine.glyphs(node_id)
        except UnknownIdError as e:
            raise _404(str(e))

    @app.get("/cluster/{node_id}/field")
    def cluster_field(
        node_id: int,
        sigma: float | None = Query(default=None, gt=0),
        tau: float = Query(default=0.0),
    ):
        if not 0.0 <= tau <= 1.0:
            raise HTTPException(422, "tau must be in [0, 1]")
        try:
            field = engine.group_field(node_id, sigma)
        except UnknownIdError as e:
            raise _404(str(e))
        from .groupfield import serialize_field

        return serialize_field(field, tau)

    @app.get("/transition/{label}")
    def transition(label: str, scalar: str | None = Query(default=None)):
        try:
            return engine.transition_payload(label, scalar)
        except UnknownIdError as e:
            raise _404(str(e))

    @app.post("/node/{node_id}/label")
    def set_label(node_id: int, req: TextRequest):
        try:
            node = engine.node(node_id)
        except UnknownIdError as e:
            raise _404(str(e))
        node.label = req.text
        engine.session.labels[str(node_id)] = req.text
        return {"node_id": node_id, "label": req.text}

    @app.post("/node/{node_id}/notes")
    def set_notes(node_id: int, req: TextRequest):
        try:
            engine.node(node_id)
        except UnknownIdError as e:
            raise _404(str(e))
        engine.session.notes[str(node_id)] = req.text
        return {"node_id": node_id, "notes": req.text}

    @app.get("/scratchpad")
    def get_scratchpad():
        s = engine.session
        return {
            "items": [i.to_doc() for i in s.scratchpad],
            "groups": [g.to_doc() for g in s.visual_groups],
        }

    @app.post("/scratchpad")
    def post_scratchpad(doc: ScratchpadDoc):
        try:
            items = [ScratchItem.from_doc(d) for d in doc.items]
            groups = [VisualGroup.from_doc(d) for d in doc.groups]
        except (KeyError, ValidationError) as e:
            raise HTTPException(422, str(e))
        engine.session.scratchpad = items
        engine.session.visual_groups = groups
        return {"items": len(items), "groups": len(groups)}

    @app.post("/export")
    def export(req: ExportRequest):
        out = Path(req.out_dir)
        if req.mode == "all":
            export_all(
                engine.session,
                engine.dataset,
                engine.require_tree(),
                engine.reduction.reduced.labels,
                out,
                removed=engine.reduction.removed,
            )
        elif req.mode == "scratchpad":
            export_scratchpad(engine.session, engine.dataset, out)
        else:
            raise HTTPException(422, "mode must be 'all' or 'scratchpad'")
        return {"out_dir": str(out)}

    return app
