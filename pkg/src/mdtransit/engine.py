"""Request orchestration: runs the analysis pipeline over a dataset and
caches derived artifacts keyed by their parameters."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import alignment as al
from . import cluster as cl
from . import descriptors as de
from . import groupfield as gf
from . import strain as st
from .ingest import dataset_content_hash
from .model import Dataset, Transition, TransitionLabel, ValidationError, label_str
from .session import Session


class UnknownIdError(KeyError):
    pass


class BusyError(RuntimeError):
    pass


@dataclass
class StageTiming:
    name: str
    seconds: float


@dataclass
class PipelineSummary:
    transitions_in: int = 0
    transitions_kept: int = 0
    clusters_at_cutoff: int = 0
    timings: list[StageTiming] = field(default_factory=list)


class Engine:
    """Single-dataset analysis engine.

    Derived artifacts (distance matrix, reduction, dendrogram, alignments,
    fields) are cached against the parameters that produced them; session
    mutations serialize through one lock.
    """

    # Bar-Joseph ordering is cubic-ish; above this leaf count the depth-first
    # order is served instead of blocking the interface.
    OLO_LEAF_CAP = 1024

    def __init__(self, dataset: Dataset, cache_dir: str | Path | None = None):
        dataset.validate()
        self.dataset = dataset
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.session = Session(dataset_hash=dataset_content_hash(dataset))
        self.summary = PipelineSummary(transitions_in=dataset.n_transitions)
        self._lock = threading.Lock()
        self._cache: dict[tuple, object] = {}

        self.deltas: dict[TransitionLabel, de.FeatureDelta] = {}
        self.descriptors: list[de.TransitionDescriptor] = []
        self.whitening: de.WhiteningTransform | None = None
        self.full_dm: de.DistanceMatrix | None = None
        self.reduction: cl.ReductionResult | None = None
        self.tree: cl.DendrogramNode | None = None
        self.ordering: cl.LeafOrdering | None = None

    # ---- pipeline stages -------------------------------------------------

    def _timed(self, name: str, fn):
        t0 = time.perf_counter()
        out = fn()
        self.summary.timings.append(StageTiming(name, time.perf_counter() - t0))
        return out

    def compute_descriptors(self) -> None:
        def run():
            for label, t in self.dataset.transitions.items():
                df = de.feature_delta(
                    t,
                    self.dataset.features[label[0]].values,
                    self.dataset.features[label[1]].values,
                )
                self.deltas[label] = df
                self.descriptors.append(
                    de.coulombic_aggregate(df, t.initial.positions)
                )

        self._timed("descriptors", run)

    def compute_distances(self, epsilon: float | None = None) -> None:
        def run():
            key = de.descriptor_cache_key(self.descriptors, epsilon)
            if self.cache_dir:
                cached = de.load_distance_cache(self.cache_dir / "distance", key)
                if cached is not None:
                    self.whitening = de.fit_whitening(self.descriptors, epsilon)
                    self.full_dm = cached
                    return
            self.whitening = de.fit_whitening(self.descriptors, epsilon)
            self.full_dm = de.distance_matrix(self.descriptors, self.whitening)
            if self.cache_dir:
                de.save_distance_cache(self.cache_dir / "distance", self.full_dm, key)

        self._timed("distance-matrix", run)

    def set_reduction(self, cutoff: float) -> tuple[cl.ReductionResult, bool]:
        """Apply the cleaning-by-clustering reduction; returns (result, cached)."""
        if self.full_dm is None:
            raise ValidationError("distances not computed yet")
        key = ("reduction", float(cutoff))
        if key in self._cache:
            self.reduction = self._cache[key]  # type: ignore[assignment]
            self._finish_reduction()
            return self.reduction, True
        if not self._lock.acquire(blocking=False):
            raise BusyError("reduction recompute in progress")
        try:
            result = self._timed(
                "reduction", lambda: cl.reduce_ensemble(self.full_dm, cutoff)
            )
            self._cache[key] = result
            self.reduction = result
            self.session.reduction_cutoff = float(cutoff)
            self._finish_reduction()
            self.summary.transitions_kept = len(result.kept)
            return result, False
        finally:
            self._lock.release()

    def _finish_reduction(self) -> None:
        """Recluster the reduced matrix and refresh ordering and colors."""
        assert self.reduction is not None
        dm = self.reduction.reduced
        key = ("tree", self.reduction.cutoff)
        if key in self._cache:
            self.tree, self.ordering = self._cache[key]  # type: ignore[assignment]
            return

        def run():
            tree = cl.ward_cluster(dm)
            cl.assign_colors(tree)
            if dm.m <= self.OLO_LEAF_CAP:
                ordering = cl.optimal_leaf_order(tree, dm)
            else:
                perm = tree.leaves_depth_first()
                ordering = cl.LeafOrdering(perm, cl.ordering_cost(perm, dm))
            return tree, ordering

        self.tree, self.ordering = self._timed("clustering", run)
        self._cache[key] = (self.tree, self.ordering)

    def ensure_pipeline(self, reduction_cutoff: float | None = None) -> None:
        if not self.descriptors:
            self.compute_descriptors()
        if self.full_dm is None:
            self.compute_distances()
        if self.reduction is None or (
            reduction_cutoff is not None
            and self.reduction.cutoff != reduction_cutoff
        ):
            cutoff = (
                reduction_cutoff
                if reduction_cutoff is not None
                else self.session.reduction_cutoff
            )
            self.set_reduction(cutoff)

    # ---- queries ---------------------------------------------------------

    def require_tree(self) -> cl.DendrogramNode:
        if self.tree is None:
            raise ValidationError("pipeline not run yet")
        return self.tree

    def node(self, node_id: int) -> cl.DendrogramNode:
        found = self.require_tree().find(node_id)
        if found is None:
            raise UnknownIdError(f"unknown cluster node {node_id}")
        return found

    def transition(self, label_text: str) -> Transition:
        for label, t in self.dataset.transitions.items():
            if label_str(label) == label_text:
                return t
        raise UnknownIdError(f"unknown transition {label_text}")

    def set_cluster_cutoff(self, value: float) -> None:
        if value < 0:
            raise ValidationError("cluster cutoff must be >= 0")
        self.session.cluster_cutoff = float(value)

    def flat_clusters(self) -> list[cl.DendrogramNode]:
        assert self.ordering is not None
        return cl.flatten(
            self.require_tree(),
            self.session.cluster_cutoff,
            self.ordering.position(),
        )

    def reduction_histogram(self, bins: int = 32) -> dict:
        assert self.reduction is not None
        means = list(self.reduction.group_mean_distance.values())
        counts, edges = np.histogram(means, bins=bins)
        return {
            "counts": counts.tolist(),
            "edges": edges.tolist(),
        }

    def cluster_payload(self, node_id: int) -> dict:
        node = self.node(node_id)
        dm = self.reduction.reduced  # type: ignore[union-attr]
        key = ("cluster-view", node_id)
        if key in self._cache:
            return self._cache[key]  # type: ignore[return-value]
        members = sorted(node.members)
        sub_labels = [dm.labels[i] for i in members]
        if len(members) <= self.OLO_LEAF_CAP and not node.is_leaf:
            sub = dm.submatrix(members)
            remap = {local: members[local] for local in range(len(members))}
            local_tree = cl.ward_cluster(sub)
            local_order = cl.optimal_leaf_order(local_tree, sub)
            order = [remap[l] for l in local_order.permutation]
        else:
            full_pos = self.ordering.position()  # type: ignore[union-attr]
            order = sorted(members, key=lambda l: full_pos[l])
        layout = cl.hilbert_layout(
            cl.LeafOrdering(order, 0.0)
        )
        payload = {
            "node_id": node_id,
            "label": node.label or self.session.labels.get(str(node_id), ""),
            "members": [label_str(l) for l in sub_labels],
            "member_indices": members,
            "leaf_order": order,
            "medoid": node.medoid,
            "medoid_label": label_str(dm.labels[node.medoid]),
            "grid_order": layout.order,
            "cells": {str(k): list(v) for k, v in layout.cells.items()},
            "merge_height": node.merge_height,
            "color": node.color,
            "heatmap_labels": [label_str(l) for l in sub_labels],
        }
        self._cache[key] = payload
        return payload

    def aligned_group(self, node_id: int) -> tuple[list[Transition], al.GroupAlignment]:
        node = self.node(node_id)
        key = ("aligned", node_id)
        if key in self._cache:
            return self._cache[key]  # type: ignore[return-value]
        dm = self.reduction.reduced  # type: ignore[union-attr]
        members = sorted(node.members)
        transitions = [self.dataset.transitions[dm.labels[i]] for i in members]
        deltas = [self.deltas[dm.labels[i]] for i in members]
        ga = al.align_group(transitions, deltas, dm, member_indices=members)
        aligned = [
            transitions[i] if r is None else (r.aligned or transitions[i])
            for i, r in enumerate(ga.results)
        ]
        self._cache[key] = (aligned, ga)
        return aligned, ga

    def group_field(self, node_id: int, sigma: float | None = None) -> gf.GroupDisplacementField:
        key = ("field", node_id, sigma)
        if key in self._cache:
            return self._cache[key]  # type: ignore[return-value]
        aligned, ga = self.aligned_group(node_id)
        reference = aligned[ga.reference_index]
        field_ = gf.build_field(
            str(node_id), reference, aligned, sigma=sigma,
            excluded=[w.split(":")[0] for w in ga.warnings],
        )
        self._cache[key] = field_
        return field_

    def glyphs(self, node_id: int) -> dict:
        key = ("glyphs", node_id)
        if key in self._cache:
            return self._cache[key]  # type: ignore[return-value]
        from .model import bond_graph

        aligned, ga = self.aligned_group(node_id)
        dm = self.reduction.reduced  # type: ignore[union-attr]
        node = self.node(node_id)
        cutoff = self.dataset.effective_bond_cutoff()
        per_transition = {}
        fields = []
        for t in aligned:
            bonds = bond_graph(t, cutoff)
            fields.append(st.strain_field(t, bonds))
        k1_scale = max(
            (abs(a.K1) for f in fields for a in f.atoms), default=0.0
        ) or 1.0
        for t, f in zip(aligned, fields):
            per_transition[label_str(t.label)] = st.serialize_glyphs(
                st.glyph_set(f, t, k1_scale=k1_scale)
            )
        payload = {"node_id": node_id, "k1_scale": k1_scale,
                   "glyphs": per_transition}
        self._cache[key] = payload
        return payload

    def transition_payload(self, label_text: str, scalar: str | None = None) -> dict:
        from .descriptors import (
            bond_delta_scalars,
            displacement_magnitudes,
            displacement_vectors,
        )
        from .model import bond_graph

        t = self.transition(label_text)
        cutoff = self.dataset.effective_bond_cutoff()
        channels: dict[str, list[float]] = {}
        bonds = bond_graph(t, cutoff)
        channels["bond_delta"] = bond_delta_scalars(t, bonds).tolist()
        channels["displacement"] = displacement_magnitudes(t).tolist()
        for name, sf in self.dataset.scalars.items():
            vec = sf.per_transition.get(t.label)
            if vec is not None:
                channels[name] = vec.tolist()
        if scalar is not None and scalar not in channels:
            raise UnknownIdError(f"unknown scalar channel {scalar}")
        return {
            "label": label_text,
            "symbols": list(t.initial.element_symbols),
            "initial": t.initial.positions.tolist(),
            "final": t.final.positions.tolist(),
            "displacement_vectors": displacement_vectors(t).tolist(),
            "scalar": scalar,
            "channels": channels if scalar is None else {scalar: channels[scalar]},
        }

    def dendrogram_payload(self) -> dict:
        tree = self.require_tree()
        # session labels override in-tree labels
        for node in tree.walk():
            label = self.session.labels.get(str(node.node_id))
            if label:
                node.label = label
        doc = cl.serialize_tree(tree)
        assert self.ordering is not None
        return {
            "tree": doc,
            "leaf_order": self.ordering.permutation,
            "ordering_cost": self.ordering.cost,
            "labels": [label_str(l) for l in self.reduction.reduced.labels],  # type: ignore[union-attr]
            "cluster_cutoff": self.session.cluster_cutoff,
        }

    def distance_rows(self, which: str, start: int, stop: int) -> bytes:
        dm = self.full_dm if which == "full" else (
            self.reduction.reduced if self.reduction else None
        )
        if dm is None:
            raise ValidationError("distances not available")
        if not (0 <= start <= stop <= dm.m):
            raise ValidationError(f"row range {start}:{stop} out of bounds (m={dm.m})")
        block = np.ascontiguousarray(dm.d[start:stop], dtype="<f4")
        return block.tobytes()
