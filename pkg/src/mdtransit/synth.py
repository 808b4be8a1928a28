"""Synthetic ensemble generators for tests, benchmarks, and demos."""

from __future__ import annotations

import numpy as np

from .descriptors import FeatureDelta, feature_delta
from .model import AtomicState, Dataset, FeatureMatrix, ScalarField, Transition


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform proper rotation via QR of a Gaussian matrix."""
    A = rng.normal(size=(3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def fcc_lattice(cells: int, spacing: float) -> np.ndarray:
    """FCC lattice positions for a cells^3 cubic supercell."""
    basis = np.array(
        [[0, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]]
    )
    pts = []
    for i in range(cells):
        for j in range(cells):
            for k in range(cells):
                for b in basis:
                    pts.append((np.array([i, j, k]) + b) * spacing)
    return np.array(pts)


def simple_cubic(cells: int, spacing: float) -> np.ndarray:
    g = np.arange(cells) * spacing
    return np.array([[x, y, z] for x in g for y in g for z in g])


def icosahedral_cluster(shells: int = 2, spacing: float = 2.7) -> np.ndarray:
    """Compact FCC-sphere nanoparticle stand-in: atoms within a radius."""
    lat = fcc_lattice(2 * shells + 2, spacing / np.sqrt(2))
    center = lat.mean(axis=0)
    r = np.linalg.norm(lat - center, axis=1)
    keep = r <= shells * spacing + 1e-9
    return lat[keep] - center

def neighbor_distance_features(positions: np.ndarray, k: int = 3) -> np.ndarray:
    """Per-atom features: sorted distances to the k nearest neighbors.

    Invariant to rigid motion of the state and consistent under atom
    permutation, so they behave like the local-structure descriptors the
    pipeline expects as input.
    """
    n = positions.shape[0]
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    dist.sort(axis=1)
    return dist[:, :k].copy()


def random_transition(
    rng: np.random.Generator,
    n: int = 20,
    k: int = 5,
    label: tuple[str, str] = ("a", "b"),
    spread: float = 4.0,
    displacement: float = 0.6,
) -> tuple[Transition, FeatureDelta]:
    """A generic transition with random positions and a random feature delta."""
    pos0 = rng.normal(scale=spread, size=(n, 3))
    pos1 = pos0 + rng.normal(scale=displacement, size=(n, 3))
    symbols = tuple(["Cu"] * n)
    t = Transition(
        label,
        AtomicState(label[0], pos0, symbols),
        AtomicState(label[1], pos1, symbols),
    )
    df = FeatureDelta(label, rng.normal(size=(n, k)))
    return t, df


def rotate_transition(t: Transition, R: np.ndarray,
                      shift: np.ndarray | None = None) -> Transition:
    """Apply one rigid motion to both states."""
    if shift is None:
        shift = np.zeros(3)

    def move(s: AtomicState) -> AtomicState:
        return AtomicState(s.state_id, s.positions @ R.T + shift, s.element_symbols)

    return Transition(t.label, move(t.initial), move(t.final))


def permute_transition(
    t: Transition, df: FeatureDelta, perm: np.ndarray
) -> tuple[Transition, FeatureDelta]:
    """Relabel atoms consistently across states, features included."""

    def move(s: AtomicState) -> AtomicState:
        return AtomicState(
            s.state_id,
            s.positions[perm],
            tuple(s.element_symbols[i] for i in perm),
        )

    return (
        Transition(t.label, move(t.initial), move(t.final)),
        FeatureDelta(df.label, df.delta[perm]),
    )


def two_motif_dataset(
    rng: np.random.Generator,
    per_motif: int = 25,
    shells: int = 2,
    moved_atoms: int = 6,
) -> Dataset:
    """Synthetic two-motif ensemble: surface-shuffle vs core-swap transitions
    on a common nanoparticle, each under a random pose.

    Each motif repeatedly applies the same displacement pattern to the same
    fixed atom set, with a random amplitude per transition, so intra-motif
    variation stays well below the inter-motif difference. The motif is
    recoverable from the transition label prefix ("surf"/"core"), so cluster
    purity can be checked downstream.
    """
    base = icosahedral_cluster(shells)
    n = base.shape[0]
    r = np.linalg.norm(base, axis=1)
    surface = np.argsort(r)[-moved_atoms:]
    core = np.argsort(r)[:moved_atoms]
    pattern_rng = np.random.default_rng(1234)  # motif patterns are fixed
    surf_pattern = pattern_rng.normal(size=(moved_atoms, 3))
    surf_pattern /= np.linalg.norm(surf_pattern, axis=1, keepdims=True)
    core_pattern = pattern_rng.normal(size=(moved_atoms, 3))
    core_pattern /= np.linalg.norm(core_pattern, axis=1, keepdims=True)

    transitions: dict[tuple[str, str], Transition] = {}
    features: dict[str, FeatureMatrix] = {}
    symbols = tuple(["Cu"] * n)

    def add(motif: str, idx: int, moved: np.ndarray,
            pattern: np.ndarray, scale: float) -> None:
        pos0 = base + rng.normal(scale=0.01, size=base.shape)
        pos1 = pos0.copy()
        amplitude = scale * (0.8 + 0.4 * rng.random())
        pos1[moved] += amplitude * pattern + rng.normal(
            scale=0.05, size=pattern.shape
        )
        R = random_rotation(rng)
        shift = rng.normal(scale=3.0, size=3)
        pos0 = pos0 @ R.T + shift
        pos1 = pos1 @ R.T + shift
        a, b = f"{motif}{idx}i", f"{motif}{idx}f"
        transitions[(a, b)] = Transition(
            (a, b),
            AtomicState(a, pos0, symbols),
            AtomicState(b, pos1, symbols),
        )
        features[a] = FeatureMatrix(a, neighbor_distance_features(pos0))
        features[b] = FeatureMatrix(b, neighbor_distance_features(pos1))

    for i in range(per_motif):
        add("surf", i, surface, surf_pattern, 0.4)
    for i in range(per_motif):
        add("core", i, core, core_pattern, 0.8)

    ds = Dataset("two-motif", transitions, features)
    # one scalar channel so the full pipeline surface is exercised
    mags = {
        lbl: np.linalg.norm(
            t.final.positions - t.initial.positions, axis=1
        )
        for lbl, t in transitions.items()
    }
    sf = ScalarField("displacement", mags)
    sf.compute_range()
    ds.scalars["displacement"] = sf
    return ds


def descriptor_pipeline(dataset: Dataset):
    """Load-to-distance convenience: deltas, descriptors, whitening, matrix."""
    from .descriptors import (
        coulombic_aggregate,
        distance_matrix,
        fit_whitening,
    )

    deltas = {}
    descriptors = []
    for label, t in dataset.transitions.items():
        df = feature_delta(
            t,
            dataset.features[label[0]].values,
            dataset.features[label[1]].values,
        )
        deltas[label] = df
        descriptors.append(coulombic_aggregate(df, t.initial.positions))
    transform = fit_whitening(descriptors)
    dm = distance_matrix(descriptors, transform)
    return deltas, descriptors, transform, dm
