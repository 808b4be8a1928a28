"""Session state (cutoffs, labels, notes, scratchpad, visual groups) with
persistence, hierarchical export, and a self-contained HTML report."""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .cluster import DendrogramNode, flatten
from .model import Dataset, Transition, TransitionLabel, ValidationError, label_str

SCHEMA_VERSION = 1

# export precision: 12 significant digits, documented format contract
_EXPORT_PREC = "%.12g"


class SessionParseError(ValidationError):
    pass


@dataclass
class ScratchItem:
    kind: str  # "transition" | "cluster" | "text"
    position: tuple[float, float]
    text: str = ""
    is_title: bool = False
    ref: str = ""  # transition label string or cluster node id (as str)
    viz: str = "atom"  # visualization type for view items
    camera: dict = field(default_factory=dict)
    interpolation: float = 0.0

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "position": list(self.position),
            "text": self.text,
            "is_title": self.is_title,
            "ref": self.ref,
            "viz": self.viz,
            "camera": self.camera,
            "interpolation": self.interpolation,
        }

    @staticmethod
    def from_doc(doc: dict) -> "ScratchItem":
        pos = tuple(doc.get("position", (0.0, 0.0)))
        if not all(isinstance(x, (int, float)) and x == x for x in pos):
            raise SessionParseError("scratch item position must be finite")
        return ScratchItem(
            kind=doc["kind"],
            position=(float(pos[0]), float(pos[1])),
            text=doc.get("text", ""),
            is_title=bool(doc.get("is_title", False)),
            ref=doc.get("ref", ""),
            viz=doc.get("viz", "atom"),
            camera=doc.get("camera", {}),
            interpolation=float(doc.get("interpolation", 0.0)),
        )


@dataclass
class VisualGroup:
    name: str
    rect: tuple[float, float, float, float]  # x, y, width, height
    parent: str | None = None

    def contains_point(self, p: tuple[float, float]) -> bool:
        x, y, w, h = self.rect
        return x <= p[0] <= x + w and y <= p[1] <= y + h

    def contains_rect(self, other: "VisualGroup") -> bool:
        x, y, w, h = self.rect
        ox, oy, ow, oh = other.rect
        return x <= ox and y <= oy and ox + ow <= x + w and oy + oh <= y + h

    def to_doc(self) -> dict:
        return {"name": self.name, "rect": list(self.rect), "parent": self.parent}

    @staticmethod
    def from_doc(doc: dict) -> "VisualGroup":
        return VisualGroup(
            name=doc.get("name", ""),
            rect=tuple(float(v) for v in doc["rect"]),
            parent=doc.get("parent"),
        )


@dataclass
class Session:
    dataset_hash: str = ""
    reduction_cutoff: float = 1.0
    cluster_cutoff: float = 0.0
    labels: dict[str, str] = field(default_factory=dict)  # node id -> label
    notes: dict[str, str] = field(default_factory=dict)  # node id -> notes
    scratchpad: list[ScratchItem] = field(default_factory=list)
    visual_groups: list[VisualGroup] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset_hash": self.dataset_hash,
            "reduction_cutoff": self.reduction_cutoff,
            "cluster_cutoff": self.cluster_cutoff,
            "labels": self.labels,
            "notes": self.notes,
            "scratchpad": [i.to_doc() for i in self.scratchpad],
            "visual_groups": [g.to_doc() for g in self.visual_groups],
        }


def save_session(session: Session, path: str | Path) -> None:
    if session.reduction_cutoff < 0 or session.cluster_cutoff < 0:
        raise ValidationError("cutoffs must be >= 0")
    Path(path).write_text(json.dumps(session.to_doc(), indent=2) + "\n")


@dataclass
class StaleReport:
    hash_mismatch: bool = False
    dropped_refs: list[str] = field(default_factory=list)


def load_session(
    path: str | Path, dataset: Dataset | None = None, dataset_hash: str = ""
) -> tuple[Session, StaleReport]:
    """Load a session file; against a mismatched dataset, stale transition
    references are dropped and reported rather than failing."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SessionParseError(
            f"corrupt session file {path}: line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SessionParseError(
            f"unsupported session schema {doc.get('schema_version')!r}"
        )
    session = Session(
        dataset_hash=doc.get("dataset_hash", ""),
        reduction_cutoff=float(doc.get("reduction_cutoff", 1.0)),
        cluster_cutoff=float(doc.get("cluster_cutoff", 0.0)),
        labels={str(k): v for k, v in doc.get("labels", {}).items()},
        notes={str(k): v for k, v in doc.get("notes", {}).items()},
        scratchpad=[ScratchItem.from_doc(d) for d in doc.get("scratchpad", [])],
        visual_groups=[VisualGroup.from_doc(d) for d in doc.get("visual_groups", [])],
    )
    report = StaleReport()
    if dataset is not None:
        known = {label_str(l) for l in dataset.labels}
        if dataset_hash and session.dataset_hash and session.dataset_hash != dataset_hash:
            report.hash_mismatch = True
        kept = []
        for item in session.scratchpad:
            if item.kind == "transition" and item.ref not in known:
                report.dropped_refs.append(item.ref)
            else:
                kept.append(item)
        if report.hash_mismatch or report.dropped_refs:
            session.scratchpad = kept
    return session, report


def _safe_name(name: str) -> str:
    name = re.sub(r"[^\w\-. ]", "_", name).strip() or "unnamed"
    return name


def _unique_dir(parent: Path, name: str) -> Path:
    """Create a child directory, resolving collisions with numeric suffixes."""
    base = _safe_name(name)
    cand = parent / base
    suffix = 1
    while cand.exists():
        suffix += 1
        cand = parent / f"{base}_{suffix}"
    cand.mkdir(parents=True)
    return cand


def write_transition_export(
    path: Path, transition: Transition, dataset: Dataset
) -> None:
    """Two-frame extxyz at 12 significant digits with scalar columns."""
    from .ingest import format_extxyz

    extras = {}
    for name, sf in dataset.scalars.items():
        vec = sf.per_transition.get(transition.label)
        if vec is not None:
            extras[_safe_name(name)] = vec
    text = format_extxyz(transition.initial, extras, _EXPORT_PREC)
    text += format_extxyz(transition.final, extras, _EXPORT_PREC)
    path.write_text(text)


def export_all(
    session: Session,
    dataset: Dataset,
    root: DendrogramNode,
    dm_labels: tuple[TransitionLabel, ...],
    out_dir: str | Path,
    removed: dict[TransitionLabel, list[TransitionLabel]] | None = None,
) -> Path:
    """Hierarchical export: nested folders mirror the tree above the cluster
    cutoff, leaf folders hold member transitions as .extxyz files.

    Reduced-away duplicates are not re-exported; each leaf folder gets a
    sidecar ``absorbed.json`` listing them next to their representative.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cutoff = session.cluster_cutoff
    removed = removed or {}

    def node_name(node: DendrogramNode) -> str:
        return session.labels.get(str(node.node_id)) or f"cluster_{node.node_id}"

    def emit_leaf_folder(node: DendrogramNode, parent: Path) -> None:
        folder = _unique_dir(parent, node_name(node))
        absorbed: dict[str, list[str]] = {}
        for leaf in node.members:
            label = dm_labels[leaf]
            t = dataset.transitions[label]
            write_transition_export(folder / f"{label_str(label)}.extxyz", t, dataset)
            dupes = removed.get(label)
            if dupes:
                absorbed[label_str(label)] = [label_str(d) for d in dupes]
        if absorbed:
            (folder / "absorbed.json").write_text(json.dumps(absorbed, indent=2))
        note = session.notes.get(str(node.node_id))
        if note:
            (folder / "notes.txt").write_text(note)

    def descend(node: DendrogramNode, parent: Path) -> None:
        if node.merge_height <= cutoff:
            emit_leaf_folder(node, parent)
            return
        folder = _unique_dir(parent, node_name(node))
        note = session.notes.get(str(node.node_id))
        if note:
            (folder / "notes.txt").write_text(note)
        for c in node.children:
            descend(c, folder)

    descend(root, out)
    return out


def _nest_groups(groups: list[VisualGroup]) -> dict[str, list[VisualGroup]]:
    """Parent -> children mapping; explicit parents win, else the smallest
    strictly-containing rectangle. Roots live under ''."""
    by_name = {g.name: g for g in groups}
    tree: dict[str, list[VisualGroup]] = {"": []}
    for g in groups:
        parent = ""
        if g.parent and g.parent in by_name:
            parent = g.parent
        else:
            best_area = None
            for other in groups:
                if other is g or not other.contains_rect(g):
                    continue
                area = other.rect[2] * other.rect[3]
                if best_area is None or area < best_area:
                    best_area, parent = area, other.name
        tree.setdefault(parent, []).append(g)
        tree.setdefault(g.name, [])
    return tree


def group_display_name(
    group: VisualGroup,
    items: list[ScratchItem],
    groups: list[VisualGroup] = (),
) -> str:
    """A bold title positioned inside the rectangle names the group; with
    nested rectangles the title belongs to the innermost one containing it."""
    area = group.rect[2] * group.rect[3]
    for item in items:
        if not (item.kind == "text" and item.is_title
                and group.contains_point(item.position)):
            continue
        if any(
            g is not group
            and g.contains_point(item.position)
            and g.rect[2] * g.rect[3] < area
            for g in groups
        ):
            continue
        return item.text
    return group.name


def export_scratchpad(
    session: Session,
    dataset: Dataset,
    out_dir: str | Path,
    view_payloads: dict[str, dict] | None = None,
) -> Path:
    """Map the scratchpad to the filesystem: visual groups become nested
    subdirectories, items land in their innermost containing group (root
    otherwise), plain text becomes .txt files, and a self-contained HTML
    report reproduces the canvas."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups = session.visual_groups
    nesting = _nest_groups(groups)
    dirs: dict[str, Path] = {"": out}

    def build_dirs(parent_key: str) -> None:
        for g in nesting.get(parent_key, []):
            name = group_display_name(g, session.scratchpad, session.visual_groups)
            dirs[g.name] = _unique_dir(dirs[parent_key], name)
            build_dirs(g.name)

    build_dirs("")

    def innermost_group(p: tuple[float, float]) -> str:
        best = ""
        best_area = None
        for g in groups:
            if g.contains_point(p):
                area = g.rect[2] * g.rect[3]
                if best_area is None or area < best_area:
                    best_area, best = area, g.name
        return best

    text_counter = 0
    for item in session.scratchpad:
        folder = dirs[innermost_group(item.position)]
        if item.kind == "transition":
            try:
                label = tuple(item.ref.split("__"))
                t = dataset.transitions[label]  # type: ignore[index]
            except (KeyError, ValueError):
                continue
            write_transition_export(folder / f"{item.ref}.extxyz", t, dataset)
        elif item.kind == "cluster":
            # cluster views export their notes/label context, geometry is
            # reachable through export_all
            info = {
                "node_id": item.ref,
                "label": session.labels.get(item.ref, ""),
                "notes": session.notes.get(item.ref, ""),
            }
            (folder / f"cluster_{_safe_name(item.ref)}.json").write_text(
                json.dumps(info, indent=2)
            )
        elif item.kind == "text" and not item.is_title:
            text_counter += 1
            (folder / f"note_{text_counter}.txt").write_text(item.text)

    report = render_html_report(session, view_payloads or {})
    (out / "report.html").write_text(report)
    return out


def render_html_report(session: Session, view_payloads: dict[str, dict]) -> str:
    """Self-contained HTML snapshot of the scratchpad canvas (printable)."""
    parts = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>",
        "<title>Scratchpad report</title>",
        "<style>",
        ".canvas{position:relative;width:1600px;height:1000px;"
        "border:1px solid #999;background:#fafafa}",
        ".item{position:absolute;padding:4px;font-family:sans-serif}",
        ".title{font-weight:bold}",
        ".group{position:absolute;border:2px solid #5577aa;"
        "background:rgba(85,119,170,0.06)}",
        ".view{border:1px solid #ccc;background:#fff;font-size:11px}",
        "</style></head><body>",
        "<h1>Scratchpad report</h1>",
        f"<p>dataset {html.escape(session.dataset_hash[:12] or 'unknown')}, "
        f"reduction cutoff {session.reduction_cutoff}, "
        f"cluster cutoff {session.cluster_cutoff}</p>",
        "<div class='canvas'>",
    ]
    for g in session.visual_groups:
        x, y, w, h = g.rect
        name = group_display_name(g, session.scratchpad, session.visual_groups)
        parts.append(
            f"<div class='group' style='left:{x}px;top:{y}px;"
            f"width:{w}px;height:{h}px' title='{html.escape(name)}'></div>"
        )
    for item in session.scratchpad:
        x, y = item.position
        if item.kind == "text":
            cls = "item title" if item.is_title else "item"
            parts.append(
                f"<div class='{cls}' style='left:{x}px;top:{y}px'>"
                f"{html.escape(item.text)}</div>"
            )
        else:
            payload = view_payloads.get(item.ref, {})
            blob = html.escape(json.dumps(payload)[:4000])
            parts.append(
                f"<div class='item view' style='left:{x}px;top:{y}px'>"
                f"{html.escape(item.kind)}: {html.escape(item.ref)}"
                f" ({html.escape(item.viz)}, s={item.interpolation})"
                f"<script type='application/json'>{blob}</script></div>"
            )
    parts.append("</div></body></html>")
    return "\n".join(parts)
