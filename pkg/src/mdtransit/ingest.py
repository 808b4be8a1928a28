"""Dataset IO: manifest loading, Extended XYZ parsing/writing, content hashing."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import yaml

from .model import (
    AtomicState,
    Dataset,
    FeatureMatrix,
    LoadError,
    ScalarField,
    Transition,
    TransitionLabel,
    ValidationError,
    label_str,
)

# extxyz written at full float64 round-trip precision so reload is bit-identical;
# the export module uses a shorter documented precision instead.
_FULL_PREC = "%.17g"


def parse_extxyz(text: str, source: str = "<string>") -> list[AtomicState]:
    """Parse all frames of an Extended XYZ document.

    Supports the common Properties=species:S:1:pos:R:3[...] layout; extra
    per-atom columns are ignored on read. A ``state_id=...`` token in the
    comment line names the frame.
    """
    lines = text.splitlines()
    frames: list[AtomicState] = []
    i = 0
    frame_no = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            n = int(lines[i].strip())
        except ValueError:
            raise LoadError(f"{source}: expected atom count at line {i + 1}")
        if i + 1 + n >= len(lines) + 1 and n > 0 and i + 1 + n > len(lines):
            raise LoadError(f"{source}: truncated frame at line {i + 1}")
        comment = lines[i + 1] if i + 1 < len(lines) else ""
        state_id = f"frame{frame_no}"
        for token in comment.split():
            if token.lower().startswith("state_id="):
                state_id = token.split("=", 1)[1].strip('"')
        symbols: list[str] = []
        positions = np.empty((n, 3), dtype=float)
        for a in range(n):
            parts = lines[i + 2 + a].split()
            if len(parts) < 4:
                raise LoadError(f"{source}: short atom line {i + 3 + a}")
            symbols.append(parts[0])
            positions[a] = [float(parts[1]), float(parts[2]), float(parts[3])]
        frames.append(AtomicState(state_id, positions, tuple(symbols)))
        frame_no += 1
        i += 2 + n
    return frames


def format_extxyz(
    state: AtomicState,
    extra_columns: dict[str, np.ndarray] | None = None,
    precision: str = _FULL_PREC,
) -> str:
    """Render one state as an extxyz frame, optionally with scalar columns."""
    extra = extra_columns or {}
    props = "species:S:1:pos:R:3"
    for name in extra:
        props += f":{name}:R:1"
    out = [str(state.n), f'state_id={state.state_id} Properties={props}']
    for a in range(state.n):
        row = [state.element_symbols[a]] + [
            precision % x for x in state.positions[a]
        ]
        for name in extra:
            row.append(precision % extra[name][a])
        out.append(" ".join(row))
    return "\n".join(out) + "\n"


def write_transition_extxyz(
    path: Path,
    transition: Transition,
    extra_columns: dict[str, np.ndarray] | None = None,
    precision: str = _FULL_PREC,
) -> None:
    """Write a transition as a two-frame extxyz file (initial then final)."""
    text = format_extxyz(transition.initial, extra_columns, precision)
    text += format_extxyz(transition.final, extra_columns, precision)
    path.write_text(text)


def read_transition_extxyz(path: Path, label: TransitionLabel) -> Transition:
    if not path.exists():
        raise LoadError(f"missing transition file: {path}")
    frames = parse_extxyz(path.read_text(), str(path))
    if len(frames) != 2:
        raise LoadError(f"{path}: expected 2 frames, found {len(frames)}")
    initial = AtomicState(label[0], frames[0].positions, frames[0].element_symbols)
    final = AtomicState(label[1], frames[1].positions, frames[1].element_symbols)
    return Transition(label, initial, final)


def _read_feature_file(path: Path, state_id: str) -> FeatureMatrix:
    if not path.exists():
        raise LoadError(f"missing feature file: {path}")
    if path.suffix == ".npy":
        values = np.load(path)
    else:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    return FeatureMatrix(state_id, values)


def _read_scalar_file(path: Path, name: str) -> ScalarField:
    """Scalar CSV rows: initial_id,final_id,v1,...,vn."""
    if not path.exists():
        raise LoadError(f"missing scalar file: {path}")
    per: dict[TransitionLabel, np.ndarray] = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 3:
            raise ValidationError(f"{path}: short scalar row")
        label = (parts[0].strip(), parts[1].strip())
        per[label] = np.array([float(x) for x in parts[2:]])
    field = ScalarField(name, per)
    field.compute_range()
    return field


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Load a transition ensemble from a YAML manifest.

    Manifest layout::

        name: my-ensemble
        bond_cutoff: 3.0          # optional, Angstrom
        transitions:
          - label: [stateA, stateB]
            geometry: transitions/A__B.extxyz    # two frames, or:
          - label: [stateB, stateC]
            initial: states/B.extxyz             # single-frame pair
            final: states/C.extxyz
        features:
          stateA: features/stateA.npy            # or .csv, n x k
        scalars:                                  # optional
          cna_delta: scalars/cna_delta.csv

    Paths are relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise LoadError(f"missing manifest: {manifest_path}")
    try:
        doc = yaml.safe_load(manifest_path.read_text())
    except yaml.YAMLError as e:
        raise LoadError(f"malformed manifest {manifest_path}: {e}") from e
    if not isinstance(doc, dict):
        raise LoadError(f"malformed manifest {manifest_path}: not a mapping")
    root = manifest_path.parent

    entries = doc.get("transitions") or []
    if not entries:
        raise ValidationError("empty ensemble")
    transitions: dict[TransitionLabel, Transition] = {}
    for entry in entries:
        label = tuple(entry["label"])
        if len(label) != 2:
            raise ValidationError(f"transition label must be a pair: {label!r}")
        if label in transitions:
            raise ValidationError(f"duplicate transition label {label_str(label)}")
        if "geometry" in entry:
            t = read_transition_extxyz(root / entry["geometry"], label)
        else:
            frames = []
            for key, sid in (("initial", label[0]), ("final", label[1])):
                p = root / entry[key]
                if not p.exists():
                    raise LoadError(f"missing transition file: {p}")
                fs = parse_extxyz(p.read_text(), str(p))
                if len(fs) != 1:
                    raise LoadError(f"{p}: expected a single frame")
                frames.append(AtomicState(sid, fs[0].positions, fs[0].element_symbols))
            t = Transition(label, frames[0], frames[1])
        transitions[label] = t

    features = {
        sid: _read_feature_file(root / rel, sid)
        for sid, rel in (doc.get("features") or {}).items()
    }
    scalars = {
        name: _read_scalar_file(root / rel, name)
        for name, rel in (doc.get("scalars") or {}).items()
    }

    ds = Dataset(
        name=doc.get("name", manifest_path.stem),
        transitions=transitions,
        features=features,
        scalars=scalars,
        bond_cutoff=doc.get("bond_cutoff"),
    )
    ds.validate()
    return ds


def save_dataset(dataset: Dataset, out_dir: str | Path) -> Path:
    """Write a dataset back to disk in manifest form; returns the manifest path.

    Positions and features round-trip bit-identically (features as .npy,
    positions at full float64 text precision).
    """
    out = Path(out_dir)
    (out / "transitions").mkdir(parents=True, exist_ok=True)
    (out / "features").mkdir(exist_ok=True)
    entries = []
    for label, t in dataset.transitions.items():
        rel = f"transitions/{label_str(label)}.extxyz"
        write_transition_extxyz(out / rel, t)
        entries.append({"label": list(label), "geometry": rel})
    feats = {}
    for sid, fm in dataset.features.items():
        rel = f"features/{sid}.npy"
        np.save(out / rel, fm.values)
        feats[sid] = rel
    scalars = {}
    if dataset.scalars:
        (out / "scalars").mkdir(exist_ok=True)
        for name, sf in dataset.scalars.items():
            rel = f"scalars/{name}.csv"
            rows = []
            for lbl, vec in sf.per_transition.items():
                rows.append(
                    ",".join([lbl[0], lbl[1]] + [_FULL_PREC % v for v in vec])
                )
            (out / rel).write_text("\n".join(rows) + "\n")
            scalars[name] = rel
    doc = {
        "name": dataset.name,
        "transitions": entries,
        "features": feats,
    }
    if scalars:
        doc["scalars"] = scalars
    if dataset.bond_cutoff is not None:
        doc["bond_cutoff"] = dataset.bond_cutoff
    manifest = out / "manifest.yaml"
    manifest.write_text(yaml.safe_dump(doc, sort_keys=False))
    return manifest


def dataset_content_hash(dataset: Dataset) -> str:
    """Stable hash over positions, features, and labels; keys session files."""
    h = hashlib.sha256()
    for label in sorted(dataset.transitions):
        t = dataset.transitions[label]
        h.update(label_str(label).encode())
        h.update(np.ascontiguousarray(t.initial.positions).tobytes())
        h.update(np.ascontiguousarray(t.final.positions).tobytes())
    for sid in sorted(dataset.features):
        h.update(sid.encode())
        h.update(np.ascontiguousarray(dataset.features[sid].values).tobytes())
    return h.hexdigest()
