"""Per-atom continuum encoding of a transition: deformation gradients,
Lagrangian strain tensors, rotation-invariant scalars, superquadric glyphs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import BondGraph, Transition

K2_DEGENERATE = 1e-10


@dataclass
class AtomStrain:
    atom: int
    F: np.ndarray  # (3, 3) deformation gradient
    E: np.ndarray  # (3, 3) symmetric strain
    eigenvalues: np.ndarray  # (3,), ascending
    eigenvectors: np.ndarray  # (3, 3), columns
    K1: float
    K2: float
    K3: float
    neighbor_count: int
    degenerate: bool


@dataclass
class StrainField:
    label: tuple[str, str]
    atoms: list[AtomStrain] = field(default_factory=list)


def neighbor_sets(bonds: BondGraph, n: int) -> list[list[int]]:
    """Initial-state neighbor lists per atom."""
    out: list[list[int]] = [[] for _ in range(n)]
    for (i, j) in bonds.edges_initial:
        out[i].append(j)
        out[j].append(i)
    return out


def deformation_gradient(
    atom: int, transition: Transition, neighbors: list[int]
) -> tuple[np.ndarray, bool]:
    """Least-squares local deformation gradient F from neighbor separations.

    F minimizes sum |dx' - F dx|^2 over initial-state neighbors; closed form
    F = A D^-1 with A = sum dx' dx^T and D = sum dx dx^T. A rank-deficient D
    (fewer than 3 non-coplanar neighbors) is flagged degenerate with F = I.
    """
    if len(neighbors) < 3:
        return np.eye(3), True
    p0 = transition.initial.positions
    p1 = transition.final.positions
    dx = p0[neighbors] - p0[atom]
    dxp = p1[neighbors] - p1[atom]
    D = dx.T @ dx
    A = dxp.T @ dx
    # guard coplanar/collinear neighborhoods
    if np.linalg.matrix_rank(D, tol=1e-10 * max(np.trace(D), 1e-30)) < 3:
        return np.eye(3), True
    F = A @ np.linalg.inv(D)
    return F, False


def lagrangian_strain(F: np.ndarray) -> np.ndarray:
    """E = (F^T F - I) / 2; symmetric, vanishes for rigid motion."""
    E = 0.5 * (F.T @ F - np.eye(3))
    return 0.5 * (E + E.T)


def invariants(E: np.ndarray) -> tuple[float, float, float]:
    """Rotation-invariant scalars of a symmetric strain tensor.

    K1 = tr(E): dilation. The deviator's eigenvalues mu give
    K2 = sqrt(sum mu^2): distortion magnitude, and
    K3 = 3 sqrt(6) mu1 mu2 mu3 / (sum mu^2)^(3/2): distortion mode in
    [-1, 1] (rod at -1, disk at +1). K3 is defined as 0 when K2 ~ 0.
    """
    K1 = float(np.trace(E))
    dev = E - (K1 / 3.0) * np.eye(3)
    mu = np.linalg.eigvalsh(dev)
    ssq = float((mu**2).sum())
    K2 = float(np.sqrt(ssq))
    if K2 < K2_DEGENERATE:
        return K1, K2, 0.0
    K3 = float(3.0 * np.sqrt(6.0) * mu.prod() / ssq**1.5)
    K3 = float(np.clip(K3, -1.0, 1.0))
    return K1, K2, K3


def strain_field(transition: Transition, bonds: BondGraph) -> StrainField:
    n = transition.n
    nbrs = neighbor_sets(bonds, n)
    out = StrainField(transition.label)
    for atom in range(n):
        F, degen = deformation_gradient(atom, transition, nbrs[atom])
        E = lagrangian_strain(F)
        evals, evecs = np.linalg.eigh(E)
        K1, K2, K3 = invariants(E)
        out.atoms.append(
            AtomStrain(
                atom=atom,
                F=F,
                E=E,
                eigenvalues=evals,
                eigenvectors=evecs,
                K1=K1,
                K2=K2,
                K3=K3,
                neighbor_count=len(nbrs[atom]),
                degenerate=degen or K2 < K2_DEGENERATE,
            )
        )
    return out


@dataclass
class SuperquadricGlyph:
    atom: int
    center: np.ndarray  # initial position
    orientation: np.ndarray  # (3, 3) eigenvector columns, eigenvalue-ordered
    semi_axes: np.ndarray  # (3,)
    exponents: tuple[float, float]
    color_scalar: float  # K1
    alpha: float
    degenerate: bool


def shape_exponents(K3: float, sharpness: float = 3.0) -> tuple[float, float]:
    """Superquadric exponent pair driven continuously by the distortion mode.

    Convention (Kindlmann-style): K3 = -1 gives the rod limit (1, 0),
    K3 = +1 the disk limit (0, 1), K3 = 0 a sphere (1, 1).
    """
    cl = max(0.0, -K3)  # rod-like share
    cp = max(0.0, K3)  # disk-like share
    return ((1.0 - cp) ** sharpness, (1.0 - cl) ** sharpness)


def glyph(
    strain: AtomStrain,
    center: np.ndarray,
    k1_scale: float,
    base_radius: float = 0.35,
    exaggeration: float = 4.0,
    sharpness: float = 3.0,
    k2_threshold: float = K2_DEGENERATE,
) -> SuperquadricGlyph:
    """Superquadric glyph parameters for one atom.

    Semi-axes exaggerate the eigenvalue spread; K1 provides the diverging
    color scalar (extension vs contraction) and its magnitude relative to
    the ensemble K1 range drives opacity. Near-zero distortion falls back
    to a small gray sphere.
    """
    degenerate = strain.degenerate or strain.K2 < k2_threshold
    semi = base_radius * (1.0 + exaggeration * np.abs(strain.eigenvalues))
    if degenerate:
        semi = np.full(3, base_radius * 0.5)
        exps = (1.0, 1.0)
        alpha = 1.0
    else:
        exps = shape_exponents(strain.K3, sharpness)
        alpha = min(1.0, abs(strain.K1) / k1_scale) if k1_scale > 0 else 0.0
    return SuperquadricGlyph(
        atom=strain.atom,
        center=np.asarray(center, dtype=float),
        orientation=strain.eigenvectors,
        semi_axes=semi,
        exponents=exps,
        color_scalar=strain.K1,
        alpha=alpha,
        degenerate=degenerate,
    )


def glyph_set(
    field_: StrainField,
    transition: Transition,
    k1_scale: float | None = None,
    **kwargs,
) -> list[SuperquadricGlyph]:
    if k1_scale is None:
        k1_scale = max((abs(a.K1) for a in field_.atoms), default=0.0) or 1.0
    return [
        glyph(a, transition.initial.positions[a.atom], k1_scale, **kwargs)
        for a in field_.atoms
    ]


def rotation_matrix_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) for a proper rotation matrix."""
    t = np.trace(R)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    else:
        i = int(np.argmax(np.diag(R)))
        if i == 0:
            s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
            w = (R[2, 1] - R[1, 2]) / s
            x = 0.25 * s
            y = (R[0, 1] + R[1, 0]) / s
            z = (R[0, 2] + R[2, 0]) / s
        elif i == 1:
            s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
            w = (R[0, 2] - R[2, 0]) / s
            x = (R[0, 1] + R[1, 0]) / s
            y = 0.25 * s
            z = (R[1, 2] + R[2, 1]) / s
        else:
            s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
            w = (R[1, 0] - R[0, 1]) / s
            x = (R[0, 2] + R[2, 0]) / s
            y = (R[1, 2] + R[2, 1]) / s
            z = 0.25 * s
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q)


def serialize_glyphs(glyphs: list[SuperquadricGlyph]) -> list[dict]:
    """Compact per-atom records (center, quaternion, axes, exponents, color);
    tessellation happens client-side."""
    out = []
    for g in glyphs:
        M = g.orientation
        if np.linalg.det(M) < 0:
            M = M.copy()
            M[:, 0] = -M[:, 0]
        out.append(
            {
                "atom": g.atom,
                "center": [float(x) for x in g.center],
                "quaternion": [float(x) for x in rotation_matrix_to_quaternion(M)],
                "semi_axes": [float(x) for x in g.semi_axes],
                "exponents": [float(x) for x in g.exponents],
                "color_scalar": g.color_scalar,
                "alpha": g.alpha,
                "degenerate": g.degenerate,
            }
        )
    return out
