"""Per-transition descriptors: feature deltas, Coulombic aggregation, ZCA
whitening, whitened L2 distance matrix, and per-atom scalar channels."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .model import BondGraph, Transition, TransitionLabel, ValidationError


@dataclass(frozen=True)
class FeatureDelta:
    """Per-atom feature change across a transition: (n, k)."""

    label: TransitionLabel
    delta: np.ndarray


@dataclass(frozen=True)
class TransitionDescriptor:
    """Length-k aggregate descriptor, invariant to rigid motion and permutation."""

    label: TransitionLabel
    vector: np.ndarray


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distances over an ordered label list."""

    labels: tuple[TransitionLabel, ...]
    d: np.ndarray

    def __post_init__(self):
        m = len(self.labels)
        if self.d.shape != (m, m):
            raise ValidationError("distance matrix shape does not match labels")

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label: TransitionLabel) -> int:
        return self.labels.index(label)

    def submatrix(self, indices: list[int]) -> "DistanceMatrix":
        idx = np.asarray(indices)
        return DistanceMatrix(
            tuple(self.labels[i] for i in indices),
            self.d[np.ix_(idx, idx)].copy(),
        )


@dataclass(frozen=True)
class WhiteningTransform:
    """ZCA whitening operator fit on a descriptor ensemble."""

    mean: np.ndarray  # (k,)
    W: np.ndarray  # (k, k), symmetric PD
    epsilon: float

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(vectors) - self.mean) @ self.W


def feature_delta(
    transition: Transition,
    features_initial: np.ndarray,
    features_final: np.ndarray,
) -> FeatureDelta:
    fi = np.asarray(features_initial, dtype=float)
    ff = np.asarray(features_final, dtype=float)
    if fi.shape != ff.shape:
        raise ValidationError(
            f"feature shape mismatch for {transition.label}: {fi.shape} vs {ff.shape}"
        )
    if fi.shape[0] != transition.n:
        raise ValidationError(
            f"feature rows ({fi.shape[0]}) != atoms ({transition.n})"
        )
    return FeatureDelta(transition.label, ff - fi)


def coulombic_aggregate(
    delta: FeatureDelta,
    positions: np.ndarray,
    count_terms: bool = False,
) -> TransitionDescriptor | tuple[TransitionDescriptor, int]:
    """Collapse an (n, k) feature delta into a length-k descriptor.

    Each feature column is treated as pseudo-charges placed at the
    transition's initial-state positions and aggregated with a pairwise
    Coulombic energy over all unordered pairs:

        v_j = sum_{i < i'} delta[i, j] * delta[i', j] / |r_i - r_i'|

    Cost is one term per (pair, feature): k * n * (n - 1) / 2.
    """
    M = delta.delta
    pos = np.asarray(positions, dtype=float)
    n, k = M.shape
    if n < 2:
        raise ValidationError("coulombic aggregation needs at least 2 atoms")
    iu, ju = np.triu_indices(n, k=1)
    sep = pos[iu] - pos[ju]
    dist = np.sqrt((sep**2).sum(axis=1))
    if np.any(dist == 0.0):
        raise ValidationError("coincident atoms: zero pair distance")
    # (n_pairs, k): one explicit term per unordered pair per feature column.
    terms = (M[iu] * M[ju]) / dist[:, None]
    desc = TransitionDescriptor(delta.label, terms.sum(axis=0))
    if count_terms:
        return desc, terms.shape[0] * terms.shape[1]
    return desc


def fit_whitening(
    descriptors: list[TransitionDescriptor],
    epsilon: float | None = None,
) -> WhiteningTransform:
    """Fit a ZCA whitening transform W = U diag(max(lambda, eps))^-1/2 U^T.

    Eigenvalues are floored at eps (default 1e-8 x largest eigenvalue) so
    duplicate-heavy, rank-deficient ensembles stay well-posed.
    """
    X = np.stack([d.vector for d in descriptors])
    if X.shape[0] < 2:
        raise ValidationError("whitening needs at least 2 descriptors")
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite descriptor values")
    mean = X.mean(axis=0)
    Xc = X - mean
    C = (Xc.T @ Xc) / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(C)
    if epsilon is None:
        epsilon = 1e-8 * float(evals.max()) if evals.max() > 0 else 1e-12
    floored = np.maximum(evals, epsilon)
    W = evecs @ np.diag(1.0 / np.sqrt(floored)) @ evecs.T
    return WhiteningTransform(mean, W, float(epsilon))


def distance_matrix(
    descriptors: list[TransitionDescriptor],
    transform: WhiteningTransform,
) -> DistanceMatrix:
    """Pairwise L2 distances between whitened descriptor vectors."""
    X = np.stack([d.vector for d in descriptors])
    Z = transform.apply(X)
    d = cdist(Z, Z)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(tuple(t.label for t in descriptors), d)


def bond_delta_scalars(transition: Transition, bonds: BondGraph) -> np.ndarray:
    """Per-atom mean |bond length change| over edges incident in either state.

    An edge present in only one state contributes the other state's actual
    interatomic distance as its length there. Atoms with no incident edges
    get 0.
    """
    n = transition.n
    union = set(bonds.edges_initial) | set(bonds.edges_final)
    sums = np.zeros(n)
    counts = np.zeros(n)
    pi, pf = transition.initial.positions, transition.final.positions
    for (i, j) in union:
        li = bonds.edges_initial.get((i, j))
        if li is None:
            li = float(np.linalg.norm(pi[i] - pi[j]))
        lf = bonds.edges_final.get((i, j))
        if lf is None:
            lf = float(np.linalg.norm(pf[i] - pf[j]))
        change = abs(lf - li)
        for a in (i, j):
            sums[a] += change
            counts[a] += 1
    out = np.zeros(n)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz]
    return out


def displacement_vectors(transition: Transition) -> np.ndarray:
    """Per-atom displacement: final - initial positions, (n, 3)."""
    return transition.final.positions - transition.initial.positions


def displacement_magnitudes(transition: Transition) -> np.ndarray:
    return np.linalg.norm(displacement_vectors(transition), axis=1)


# Distance-matrix cache: reruns of the O(m^2 k) step are skipped when the
# descriptor ensemble and epsilon are unchanged.

def descriptor_cache_key(
    descriptors: list[TransitionDescriptor], epsilon: float | None
) -> str:
    h = hashlib.sha256()
    for d in descriptors:
        h.update(str(d.label).encode())
        h.update(np.ascontiguousarray(d.vector).tobytes())
    h.update(repr(epsilon).encode())
    return h.hexdigest()


def save_distance_cache(path: str | Path, dm: DistanceMatrix, key: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path.with_suffix(".npy"), dm.d)
    meta = {"key": key, "labels": [list(l) for l in dm.labels]}
    path.with_suffix(".json").write_text(json.dumps(meta))


def load_distance_cache(path: str | Path, key: str) -> DistanceMatrix | None:
    path = Path(path)
    meta_path = path.with_suffix(".json")
    npy_path = path.with_suffix(".npy")
    if not meta_path.exists() or not npy_path.exists():
        return None
    meta = json.loads(meta_path.read_text())
    if meta.get("key") != key:
        return None
    labels = tuple(tuple(l) for l in meta["labels"])
    return DistanceMatrix(labels, np.load(npy_path))
