"""Core domain model: atomic states, transitions, features, bonds, scalars."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when input data violates a structural invariant."""


class LoadError(IOError):
    """Raised when a dataset file is missing or unreadable."""


TransitionLabel = tuple[str, str]


def label_str(label: TransitionLabel) -> str:
    return f"{label[0]}__{label[1]}"


def parse_label(text: str) -> TransitionLabel:
    parts = text.split("__")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ValidationError(f"malformed transition label {text!r}")
    return (parts[0], parts[1])


@dataclass(frozen=True)
class AtomicState:
    """A single configuration: n atoms with 3D positions (Angstrom)."""

    state_id: str
    positions: np.ndarray  # (n, 3) float64
    element_symbols: tuple[str, ...]

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValidationError(
                f"state {self.state_id}: positions must be (n, 3) with n >= 1"
            )
        if not np.all(np.isfinite(pos)):
            raise ValidationError(f"state {self.state_id}: non-finite coordinates")
        if len(self.element_symbols) != pos.shape[0]:
            raise ValidationError(
                f"state {self.state_id}: {len(self.element_symbols)} symbols "
                f"for {pos.shape[0]} atoms"
            )
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class Transition:
    """An ordered pair of consistently-labeled atomic states."""

    label: TransitionLabel
    initial: AtomicState
    final: AtomicState

    def __post_init__(self):
        if self.initial.n != self.final.n:
            raise ValidationError(
                f"transition {label_str(self.label)}: atom count mismatch "
                f"({self.initial.n} vs {self.final.n})"
            )
        if self.initial.element_symbols != self.final.element_symbols:
            raise ValidationError(
                f"transition {label_str(self.label)}: element symbols differ row-wise"
            )

    @property
    def n(self) -> int:
        return self.initial.n

    def swapped(self) -> "Transition":
        return Transition((self.label[1], self.label[0]), self.final, self.initial)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-atom features for one state: (n, k), unitless."""

    state_id: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] < 1:
            raise ValidationError(
                f"features for state {self.state_id}: expected (n, k) with k >= 1"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError(
                f"features for state {self.state_id}: non-finite values"
            )
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass
class ScalarField:
    """A named per-atom scalar channel with its global range over the ensemble."""

    name: str
    per_transition: dict[TransitionLabel, np.ndarray]
    global_min: float = 0.0
    global_max: float = 0.0

    def compute_range(self) -> None:
        lo = min(float(v.min()) for v in self.per_transition.values())
        hi = max(float(v.max()) for v in self.per_transition.values())
        self.global_min, self.global_max = lo, hi


@dataclass(frozen=True)
class BondGraph:
    """Bond connectivity of both states of a transition, with lengths."""

    label: TransitionLabel
    edges_initial: dict[tuple[int, int], float]
    edges_final: dict[tuple[int, int], float]

    def incident(self, which: str, atom: int) -> list[tuple[int, int]]:
        edges = self.edges_initial if which == "initial" else self.edges_final
        return [e for e in edges if atom in e]


def compute_bonds(state: AtomicState, cutoff: float) -> dict[tuple[int, int], float]:
    """All unordered pairs (i, j) with 0 < |r_i - r_j| <= cutoff, mapped to length.

    Coincident atoms are a hard error: zero-length bonds break strain and
    alignment math downstream.
    """
    if cutoff <= 0:
        raise ValidationError("bond cutoff must be positive")
    pos = state.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    iu, ju = np.triu_indices(state.n, k=1)
    pair_d = dist[iu, ju]
    if np.any(pair_d == 0.0):
        a = int(np.argmin(pair_d))
        raise ValidationError(
            f"state {state.state_id}: coincident atoms {iu[a]} and {ju[a]}"
        )
    keep = pair_d <= cutoff
    return {
        (int(i), int(j)): float(d)
        for i, j, d in zip(iu[keep], ju[keep], pair_d[keep])
    }


def nearest_neighbor_distances(state: AtomicState) -> np.ndarray:
    """Distance from each atom to its nearest neighbor (brute force, n >= 2)."""
    if state.n < 2:
        raise ValidationError("need at least 2 atoms")
    pos = state.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def default_bond_cutoff(state: AtomicState) -> float:
    """1.2 x median nearest-neighbor distance: first-shell heuristic for metals."""
    return 1.2 * float(np.median(nearest_neighbor_distances(state)))


def bond_graph(transition: Transition, cutoff: float) -> BondGraph:
    return BondGraph(
        transition.label,
        compute_bonds(transition.initial, cutoff),
        compute_bonds(transition.final, cutoff),
    )


@dataclass
class Dataset:
    """An immutable-after-load transition ensemble with features and scalars."""

    name: str
    transitions: dict[TransitionLabel, Transition]
    features: dict[str, FeatureMatrix]
    scalars: dict[str, ScalarField] = field(default_factory=dict)
    bond_cutoff: float | None = None

    @property
    def labels(self) -> list[TransitionLabel]:
        return list(self.transitions.keys())

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    @property
    def states(self) -> dict[str, AtomicState]:
        out: dict[str, AtomicState] = {}
        for t in self.transitions.values():
            out.setdefault(t.initial.state_id, t.initial)
            out.setdefault(t.final.state_id, t.final)
        return out

    @property
    def k(self) -> int:
        first = next(iter(self.features.values()))
        return first.k

    def effective_bond_cutoff(self) -> float:
        if self.bond_cutoff is not None:
            return self.bond_cutoff
        first = next(iter(self.transitions.values()))
        return default_bond_cutoff(first.initial)

    def validate(self) -> None:
        if not self.transitions:
            raise ValidationError("empty ensemble")
        n_ref: int | None = None
        k_ref: int | None = None
        for t in self.transitions.values():
            for state in (t.initial, t.final):
                if state.state_id not in self.features:
                    raise ValidationError(
                        f"missing feature matrix for state {state.state_id}"
                    )
                fm = self.features[state.state_id]
                if fm.n != state.n:
                    raise ValidationError(
                        f"state {state.state_id}: feature rows ({fm.n}) != atoms ({state.n})"
                    )
                if n_ref is None:
                    n_ref = state.n
                elif state.n != n_ref:
                    raise ValidationError(
                        f"state {state.state_id}: atom count {state.n} != ensemble n {n_ref}"
                    )
        for sid, fm in self.features.items():
            if k_ref is None:
                k_ref = fm.k
            elif fm.k != k_ref:
                raise ValidationError(
                    f"state {sid}: feature width k={fm.k} != ensemble k {k_ref}"
                )
        for sf in self.scalars.values():
            for lbl, vec in sf.per_transition.items():
                if lbl not in self.transitions:
                    raise ValidationError(
                        f"scalar {sf.name}: unknown transition {label_str(lbl)}"
                    )
                if vec.shape[0] != self.transitions[lbl].n:
                    raise ValidationError(
                        f"scalar {sf.name}: length mismatch for {label_str(lbl)}"
                    )
