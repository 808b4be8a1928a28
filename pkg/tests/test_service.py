import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mdtransit.engine import Engine
from mdtransit.service import create_app
from mdtransit.synth import two_motif_dataset


@pytest.fixture(scope="module")
def client():
    ds = two_motif_dataset(np.random.default_rng(11), per_motif=5)
    engine = Engine(ds)
    engine.session.reduction_cutoff = 0.0
    app = create_app(engine)
    with TestClient(app) as c:
        c.engine = engine
        yield c


class TestSummaryAndDistance:
    def test_summary(self, client):
        doc = client.get("/dataset/summary").json()
        assert doc["transitions"] == 10
        assert doc["kept"] == 10
        assert "displacement" in doc["scalars"]
        assert doc["feature_width"] == 3

    def test_full_matrix_tile_protocol(self, client):
        r = client.get("/distance/full")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("application/octet-stream")
        rows = int(r.headers["X-Rows"])
        cols = int(r.headers["X-Cols"])
        assert r.headers["X-Dtype"] == "<f4"
        block = np.frombuffer(r.content, dtype="<f4").reshape(rows, cols)
        assert rows == cols == 10
        assert np.allclose(block, block.T, atol=1e-6)
        assert np.all(np.diag(block) == 0)

    def test_row_range(self, client):
        r = client.get("/distance/reduced", params={"rows": "3:7"})
        assert int(r.headers["X-Rows"]) == 4
        assert int(r.headers["X-Row-Start"]) == 3
        block = np.frombuffer(r.content, dtype="<f4").reshape(4, 10)
        full = np.frombuffer(
            client.get("/distance/reduced").content, dtype="<f4"
        ).reshape(10, 10)
        assert np.array_equal(block, full[3:7])

    def test_bad_row_range(self, client):
        assert client.get("/distance/full", params={"rows": "7:99"}).status_code == 422
        assert client.get("/distance/full", params={"rows": "abc"}).status_code == 422


class TestReductionAndClusters:
    def test_histogram(self, client):
        doc = client.get("/reduction/histogram").json()
        assert sum(doc["counts"]) == 10
        assert len(doc["edges"]) == len(doc["counts"]) + 1

    def test_post_reduction_and_cached_flag(self, client):
        r1 = client.post("/reduction", json={"cutoff": 0.25}).json()
        assert r1["kept"] + r1["removed"] == 10
        assert not r1["cached"]
        r2 = client.post("/reduction", json={"cutoff": 0.25}).json()
        assert r2["cached"]
        # restore the identity reduction for the other tests
        client.post("/reduction", json={"cutoff": 0.0})

    def test_negative_cutoff_rejected(self, client):
        assert client.post("/reduction", json={"cutoff": -1}).status_code == 422

    def test_dendrogram_and_cutoff(self, client):
        tree = client.get("/dendrogram").json()
        assert sorted(tree["leaf_order"]) == list(range(10))
        root_h = tree["tree"]["merge_height"]
        doc = client.post("/cluster-cutoff", json={"value": root_h + 1}).json()
        assert doc["clusters"] == 1
        doc = client.post("/cluster-cutoff", json={"value": 0.0}).json()
        assert doc["clusters"] == 10

    def test_cluster_views(self, client):
        root_id = client.get("/dendrogram").json()["tree"]["node_id"]
        doc = client.get(f"/cluster/{root_id}").json()
        assert len(doc["members"]) == 10
        assert doc["grid_order"] == 2

        aligned = client.get(f"/cluster/{root_id}/aligned").json()
        assert len(aligned["members"]) == 10
        refs = [m for m in aligned["members"] if m["is_reference"]]
        assert len(refs) == 1
        assert refs[0]["rotation"] is None

        glyphs = client.get(f"/cluster/{root_id}/glyphs").json()
        assert len(glyphs["glyphs"]) == 10

        field = client.get(f"/cluster/{root_id}/field", params={"tau": 0.4}).json()
        assert field["tau"] == 0.4
        assert all(0 <= p["corr"] <= 1 for p in field["points"])

    def test_unknown_cluster_404_shape(self, client):
        r = client.get("/cluster/123456")
        assert r.status_code == 404
        detail = r.json()["detail"]
        assert detail["code"] == "unknown_id"
        assert "123456" in detail["message"]

    def test_field_validation(self, client):
        root_id = client.get("/dendrogram").json()["tree"]["node_id"]
        assert client.get(
            f"/cluster/{root_id}/field", params={"tau": 1.5}
        ).status_code == 422
        assert client.get(
            f"/cluster/{root_id}/field", params={"sigma": -1}
        ).status_code == 422


class TestTransitionAndAnnotations:
    def test_transition_payload(self, client):
        label = client.get("/dendrogram").json()["labels"][0]
        doc = client.get(f"/transition/{label}").json()
        assert doc["label"] == label
        assert len(doc["initial"]) == len(doc["symbols"])
        assert "bond_delta" in doc["channels"]

    def test_transition_scalar_select_and_404(self, client):
        label = client.get("/dendrogram").json()["labels"][0]
        doc = client.get(
            f"/transition/{label}", params={"scalar": "displacement"}
        ).json()
        assert list(doc["channels"]) == ["displacement"]
        r = client.get("/transition/not__there")
        assert r.status_code == 404
        assert r.json()["detail"]["code"] == "unknown_id"

    def test_label_and_notes(self, client):
        root_id = client.get("/dendrogram").json()["tree"]["node_id"]
        assert client.post(
            f"/node/{root_id}/label", json={"text": "the works"}
        ).json()["label"] == "the works"
        client.post(f"/node/{root_id}/notes", json={"text": "remember this"})
        tree = client.get("/dendrogram").json()["tree"]
        assert tree["label"] == "the works"
        assert client.post(
            "/node/424242/label", json={"text": "x"}
        ).status_code == 404

    def test_scratchpad_roundtrip(self, client):
        doc = {
            "items": [
                {"kind": "text", "position": [1, 2], "text": "hi"},
            ],
            "groups": [{"name": "g", "rect": [0, 0, 50, 50]}],
        }
        r = client.post("/scratchpad", json=doc)
        assert r.json() == {"items": 1, "groups": 1}
        back = client.get("/scratchpad").json()
        assert back["items"][0]["text"] == "hi"
        assert back["groups"][0]["name"] == "g"

    def test_scratchpad_bad_item(self, client):
        bad = {"items": [{"position": [0, 0]}], "groups": []}
        assert client.post("/scratchpad", json=bad).status_code == 422


class TestExport:
    def test_export_all_and_scratchpad(self, client, tmp_path):
        out = tmp_path / "dump"
        r = client.post("/export", json={"mode": "all", "out_dir": str(out)})
        assert r.status_code == 200
        assert len(list(out.rglob("*.extxyz"))) == 10

        out2 = tmp_path / "sp"
        r = client.post(
            "/export", json={"mode": "scratchpad", "out_dir": str(out2)}
        )
        assert (out2 / "report.html").exists()

    def test_export_bad_mode(self, client, tmp_path):
        r = client.post(
            "/export", json={"mode": "nope", "out_dir": str(tmp_path)}
        )
        assert r.status_code == 422
