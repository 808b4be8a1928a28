"""Hierarchical organization of the ensemble: ward clustering, reduction by
medoid replacement, optimal leaf ordering, hierarchical colors, Hilbert grid."""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field

import numpy as np

from .descriptors import DistanceMatrix
from .model import TransitionLabel, ValidationError


@dataclass
class DendrogramNode:
    node_id: int
    children: tuple["DendrogramNode", "DendrogramNode"] | tuple = ()
    merge_height: float = 0.0
    members: list[int] = field(default_factory=list)  # leaf indices
    medoid: int = -1
    hue_range: tuple[float, float] = (0.0, 360.0)
    color: str = "#808080"
    label: str = ""

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def find(self, node_id: int) -> "DendrogramNode | None":
        for node in self.walk():
            if node.node_id == node_id:
                return node
        return None

    def leaves_depth_first(self) -> list[int]:
        if self.is_leaf:
            return list(self.members)
        out: list[int] = []
        for c in self.children:
            out.extend(c.leaves_depth_first())
        return out


def _ward_update(d_ki: float, d_kj: float, d_ij: float,
                 ni: int, nj: int, nk: int) -> float:
    """Lance-Williams ward update on distances (via squares)."""
    tot = ni + nj + nk
    sq = ((ni + nk) * d_ki**2 + (nj + nk) * d_kj**2 - nk * d_ij**2) / tot
    return float(np.sqrt(max(sq, 0.0)))


def ward_cluster(dm: DistanceMatrix) -> DendrogramNode:
    """Agglomerative ward merge tree over the given distances.

    Ties break deterministically on the smallest (i, j) slot pair; a merged
    cluster takes the smaller slot, so slot order is reproducible across runs.
    """
    m = dm.m
    if not np.all(np.isfinite(dm.d)):
        raise ValidationError("non-finite distances")
    nodes: list[DendrogramNode] = [
        DendrogramNode(node_id=i, members=[i], medoid=i) for i in range(m)
    ]
    if m == 1:
        return nodes[0]

    D = dm.d.astype(float).copy()
    np.fill_diagonal(D, np.inf)
    active = np.ones(m, dtype=bool)
    sizes = np.ones(m, dtype=int)
    slot_node: list[DendrogramNode | None] = list(nodes)

    # Per-slot cached min over j > i (first argmin = smallest j on ties).
    INF = np.inf
    row_min = np.full(m, INF)
    row_arg = np.full(m, -1, dtype=int)

    def rescan(i: int) -> None:
        js = np.where(active)[0]
        js = js[js > i]
        if js.size == 0:
            row_min[i], row_arg[i] = INF, -1
            return
        vals = D[i, js]
        a = int(np.argmin(vals))
        row_min[i], row_arg[i] = float(vals[a]), int(js[a])

    for i in range(m):
        rescan(i)

    next_id = m
    root = None
    for _ in range(m - 1):
        # Smallest (i, j) pair among minimum-distance pairs: scan slots in
        # ascending order, keep the first slot achieving the global min.
        best = int(np.argmin(row_min))  # first occurrence = smallest i
        i, j = best, int(row_arg[best])
        h = float(row_min[best])

        left, right = slot_node[i], slot_node[j]
        merged = DendrogramNode(
            node_id=next_id,
            children=(left, right),
            merge_height=h,
            members=left.members + right.members,
        )
        next_id += 1

        # Ward-update distances from every other active slot to the merge,
        # stored in slot i; slot j retires.
        ni, nj = int(sizes[i]), int(sizes[j])
        d_ij = D[i, j]
        others = np.where(active)[0]
        others = others[(others != i) & (others != j)]
        if others.size:
            nk = sizes[others]
            sq = (
                (ni + nk) * D[others, i] ** 2
                + (nj + nk) * D[others, j] ** 2
                - nk * d_ij**2
            ) / (ni + nj + nk)
            newd = np.sqrt(np.maximum(sq, 0.0))
            D[others, i] = newd
            D[i, others] = newd
        active[j] = False
        sizes[i] = ni + nj
        slot_node[i] = merged
        slot_node[j] = None
        D[j, :] = INF
        D[:, j] = INF
        row_min[j], row_arg[j] = INF, -1

        # Refresh caches: slot i changed entirely; any slot whose cached best
        # pointed at i or j must rescan; others may only have improved via i.
        rescan(i)
        for a in np.where(active)[0]:
            if a == i:
                continue
            if row_arg[a] in (i, j):
                rescan(a)
            elif a < i and D[a, i] < row_min[a]:
                row_min[a], row_arg[a] = float(D[a, i]), i
        root = merged

    assert root is not None
    _assign_medoids(root, dm)
    return root


def ward_cluster_reference(dm: DistanceMatrix) -> list[tuple[int, int, float]]:
    """Brute-force Lance-Williams ward reference: full rescan every step.

    Returns the merge sequence as (slot_i, slot_j, height) with the same
    smallest-(i, j) tie rule as ward_cluster. Independent bookkeeping; used
    as an oracle.
    """
    m = dm.m
    D = dm.d.astype(float).copy()
    alive = list(range(m))
    sizes = {i: 1 for i in range(m)}
    merges: list[tuple[int, int, float]] = []
    for _ in range(m - 1):
        best = None
        for ai, i in enumerate(alive):
            for j in alive[ai + 1:]:
                if best is None or D[i, j] < best[2]:
                    best = (i, j, D[i, j])
        i, j, h = best
        for k in alive:
            if k in (i, j):
                continue
            D[k, i] = D[i, k] = _ward_update(
                D[k, i], D[k, j], D[i, j], sizes[i], sizes[j], sizes[k]
            )
        sizes[i] += sizes[j]
        alive.remove(j)
        merges.append((i, j, float(h)))
    return merges


def merge_sequence(root: DendrogramNode) -> list[tuple[int, int, float]]:
    """Merge events of a tree in height-resolved id order, as produced slots."""
    events = []
    for node in root.walk():
        if not node.is_leaf:
            events.append((node.node_id, node.merge_height, node))
    # node ids were assigned in merge order, ascending from m
    events.sort(key=lambda e: e[0])
    out = []
    for _, h, node in events:
        l = min(node.children[0].members)
        r = min(node.children[1].members)
        out.append((min(l, r), max(l, r), h))
    return out


def medoid(members: list[int], dm: DistanceMatrix) -> int:
    """Member minimizing summed distance to the rest; ties -> smallest index."""
    if not members:
        raise ValidationError("medoid of empty set")
    idx = np.asarray(sorted(members))
    sub = dm.d[np.ix_(idx, idx)]
    sums = sub.sum(axis=1)
    return int(idx[int(np.argmin(sums))])


def _assign_medoids(root: DendrogramNode, dm: DistanceMatrix) -> None:
    for node in root.walk():
        node.medoid = medoid(node.members, dm)


def flatten(
    root: DendrogramNode,
    cutoff: float,
    leaf_position: dict[int, int] | None = None,
) -> list[DendrogramNode]:
    """Maximal subtrees with merge_height <= cutoff.

    Cluster order follows the supplied leaf ordering when given, else the
    tree's depth-first order.
    """
    if cutoff < 0:
        raise ValidationError("cutoff must be >= 0")
    out: list[DendrogramNode] = []

    def descend(node: DendrogramNode) -> None:
        if node.merge_height <= cutoff:
            out.append(node)
        else:
            for c in node.children:
                descend(c)

    descend(root)
    if leaf_position:
        out.sort(key=lambda nd: min(leaf_position[l] for l in nd.members))
    return out


@dataclass
class ReductionResult:
    cutoff: float
    kept: list[TransitionLabel]
    removed: dict[TransitionLabel, list[TransitionLabel]]
    reduced: DistanceMatrix
    group_mean_distance: dict[TransitionLabel, float]
    group_members: dict[TransitionLabel, list[int]]


def reduce_ensemble(dm: DistanceMatrix, cutoff: float) -> ReductionResult:
    """Cleaning by clustering: flatten the ward tree at the cutoff and keep
    only each flat group's medoid. Cutoff 0 disables the reduction."""
    if cutoff < 0:
        raise ValidationError("cutoff must be >= 0")
    if cutoff == 0:
        # disabled: keep everything, even exact duplicates at distance 0
        return ReductionResult(
            cutoff=0.0,
            kept=list(dm.labels),
            removed={},
            reduced=dm.submatrix(list(range(dm.m))),
            group_mean_distance={l: 0.0 for l in dm.labels},
            group_members={l: [i] for i, l in enumerate(dm.labels)},
        )
    root = ward_cluster(dm)
    groups = flatten(root, cutoff)
    kept_idx: list[int] = []
    removed: dict[TransitionLabel, list[TransitionLabel]] = {}
    means: dict[TransitionLabel, float] = {}
    group_members: dict[TransitionLabel, list[int]] = {}
    for g in groups:
        rep = g.medoid
        rep_label = dm.labels[rep]
        kept_idx.append(rep)
        removed[rep_label] = [dm.labels[i] for i in g.members if i != rep]
        group_members[rep_label] = sorted(g.members)
        if len(g.members) > 1:
            idx = np.asarray(g.members)
            sub = dm.d[np.ix_(idx, idx)]
            means[rep_label] = float(
                sub[np.triu_indices(len(idx), k=1)].mean()
            )
        else:
            means[rep_label] = 0.0
    kept_idx.sort()
    return ReductionResult(
        cutoff=cutoff,
        kept=[dm.labels[i] for i in kept_idx],
        removed={k: v for k, v in removed.items() if v} if cutoff > 0 else {},
        reduced=dm.submatrix(kept_idx),
        group_mean_distance=means,
        group_members=group_members,
    )


@dataclass
class LeafOrdering:
    permutation: list[int]  # leaf indices in display order
    cost: float

    def position(self) -> dict[int, int]:
        return {leaf: t for t, leaf in enumerate(self.permutation)}


def ordering_cost(perm: list[int], dm: DistanceMatrix) -> float:
    return float(sum(dm.d[perm[t], perm[t + 1]] for t in range(len(perm) - 1)))


def optimal_leaf_order(root: DendrogramNode, dm: DistanceMatrix) -> LeafOrdering:
    """Bar-Joseph optimal leaf ordering: among all subtree-flip orderings,
    minimize the summed distance between adjacent leaves.

    Dynamic program over (node, first leaf, last leaf) with numpy min-plus
    combination; roughly O(m^3) on balanced trees.
    """
    D = dm.d
    tables: dict[int, tuple[list[int], np.ndarray]] = {}

    def build(node: DendrogramNode) -> tuple[list[int], np.ndarray]:
        if node.is_leaf:
            res = ([node.members[0]], np.zeros((1, 1)))
            tables[node.node_id] = res
            return res
        (lv, ML) = build(node.children[0])
        (rv, MR) = build(node.children[1])
        dlr = D[np.ix_(lv, rv)]
        # block[i, j]: best cost of an ordering starting at left leaf i and
        # ending at right leaf j.
        a, b = len(lv), len(rv)
        T = np.empty((a, b))
        for ii in range(a):
            T[ii] = np.min(ML[ii][:, None] + dlr, axis=0)
        block = np.empty((a, b))
        for ii in range(a):
            block[ii] = np.min(T[ii][:, None] + MR, axis=0)
        leaves = lv + rv
        nfull = a + b
        M = np.full((nfull, nfull), np.inf)
        M[:a, a:] = block
        M[a:, :a] = block.T
        res = (leaves, M)
        tables[node.node_id] = res
        return res

    leaves_root, M_root = build(root)
    flat = int(np.argmin(M_root))
    si, sj = divmod(flat, len(leaves_root))
    start, end = leaves_root[si], leaves_root[sj]

    def reconstruct(node: DendrogramNode, first: int, last: int) -> list[int]:
        if node.is_leaf:
            return [node.members[0]]
        lv, ML = tables[node.children[0].node_id]
        rv, MR = tables[node.children[1].node_id]
        if first in lv:
            L, R, MLs, MRs = node.children[0], node.children[1], ML, MR
            lvv, rvv = lv, rv
        else:
            L, R, MLs, MRs = node.children[1], node.children[0], MR, ML
            lvv, rvv = rv, lv
        fi = lvv.index(first)
        lj = rvv.index(last)
        # pick the junction (u, w) achieving the block minimum
        cand = (
            MLs[fi][:, None] + D[np.ix_(lvv, rvv)] + MRs[:, lj][None, :]
        )
        u_i, w_j = np.unravel_index(int(np.argmin(cand)), cand.shape)
        left_part = reconstruct(L, first, lvv[u_i])
        right_part = reconstruct(R, rvv[w_j], last)
        return left_part + right_part

    perm = reconstruct(root, start, end)
    return LeafOrdering(perm, ordering_cost(perm, dm))


def enumerate_flip_orderings(root: DendrogramNode):
    """All leaf orders reachable by subtree flips (oracle; 2^(m-1) orders)."""
    if root.is_leaf:
        yield [root.members[0]]
        return
    for lo in enumerate_flip_orderings(root.children[0]):
        for ro in enumerate_flip_orderings(root.children[1]):
            yield lo + ro
            yield ro + lo


def is_flip_ordering(root: DendrogramNode, perm: list[int]) -> bool:
    """True if perm is consistent with some planar embedding of the tree."""
    pos = {leaf: t for t, leaf in enumerate(perm)}

    def check(node: DendrogramNode) -> tuple[int, int] | None:
        if node.is_leaf:
            p = pos[node.members[0]]
            return (p, p)
        spans = [check(c) for c in node.children]
        if any(s is None for s in spans):
            return None
        spans.sort()
        (l0, h0), (l1, h1) = spans
        if h0 + 1 != l1:
            return None
        return (l0, h1)

    return check(root) is not None


def assign_colors(
    root: DendrogramNode,
    base_range: tuple[float, float] = (0.0, 360.0),
    gap_fraction: float = 0.25,
    saturation: float = 0.62,
    lightness: float = 0.52,
) -> None:
    """Hierarchical hue assignment: each node owns a subrange of its parent,
    children split the remainder after a sibling gap proportionally to their
    leaf counts. Node color is the midpoint hue at fixed S/L."""

    def paint(node: DendrogramNode, lo: float, hi: float) -> None:
        node.hue_range = (lo, hi)
        mid = 0.5 * (lo + hi) % 360.0
        r, g, b = colorsys.hls_to_rgb(mid / 360.0, lightness, saturation)
        node.color = "#%02x%02x%02x" % (
            round(r * 255), round(g * 255), round(b * 255)
        )
        if node.is_leaf:
            return
        span = hi - lo
        gap = gap_fraction * span
        usable = span - gap
        left, right = node.children
        wl = len(left.members) / len(node.members)
        w_left = usable * wl
        paint(left, lo, lo + w_left)
        paint(right, hi - (usable - w_left), hi)

    paint(root, base_range[0], base_range[1])


def hilbert_d2xy(order: int, t: int) -> tuple[int, int]:
    """Cell (row, col) of index t on the order-p Hilbert curve.

    Fixed orientation convention: for order 1, t = 0..3 maps to
    (0,0), (0,1), (1,1), (1,0).
    """
    rx = ry = 0
    x = y = 0
    s = 1
    n = 1 << order
    while s < n:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    # (row, col) = (x, y) gives the documented order-1 orientation
    return (x, y)


@dataclass
class GridLayout:
    order: int
    cells: dict[int, tuple[int, int]]  # leaf index -> (row, col)


def hilbert_layout(ordering: LeafOrdering) -> GridLayout:
    """Map leaves, in display order, onto consecutive Hilbert-curve cells of
    the smallest 2^p x 2^p grid with enough cells."""
    m = len(ordering.permutation)
    if m < 1:
        raise ValidationError("empty ordering")
    order = 0
    while (1 << (2 * order)) < m:
        order += 1
    cells = {
        leaf: hilbert_d2xy(order, t)
        for t, leaf in enumerate(ordering.permutation)
    }
    return GridLayout(order, cells)


def serialize_tree(node: DendrogramNode) -> dict:
    """Nested JSON-friendly form consumed by the UI and export."""
    doc = {
        "node_id": node.node_id,
        "merge_height": node.merge_height,
        "members": node.members,
        "medoid": node.medoid,
        "color": node.color,
        "hue_range": list(node.hue_range),
        "label": node.label,
    }
    if not node.is_leaf:
        doc["children"] = [serialize_tree(c) for c in node.children]
    return doc
