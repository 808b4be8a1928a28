"""Group displacement fields: Gaussian-kernel sampled displacements of an
aligned group on the medoid's initial state, with per-position correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptors import displacement_vectors
from .model import Transition, ValidationError

_UNDERFLOW = 1e-300
_NEUTRAL_DENOM = 1e-20


def sample_displacement(
    transition: Transition, points: np.ndarray, sigma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-kernel interpolation of the transition's displacement field.

    d(p) = sum_a w_a disp_a / sum_a w_a with w_a = exp(-|p - x_a|^2 / 2 sigma^2),
    x_a the atom's initial position. Rows whose weight sum underflows return
    a zero vector and are flagged.

    Returns (displacements (m, 3), underflow flags (m,)).
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = transition.initial.positions
    disp = displacement_vectors(transition)
    d2 = ((pts[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    w = np.exp(-d2 / (2.0 * sigma**2))
    wsum = w.sum(axis=1)
    under = wsum < _UNDERFLOW
    out = np.zeros((pts.shape[0], 3))
    ok = ~under
    out[ok] = (w[ok] @ disp) / wsum[ok, None]
    return out, under


def default_sigma(reference: Transition) -> float:
    """Half the median nearest-neighbor distance of the reference's initial
    state: keeps interpolation local to first-shell neighborhoods."""
    from .model import nearest_neighbor_distances

    return 0.5 * float(np.median(nearest_neighbor_distances(reference.initial)))


def correlation(d_mean: np.ndarray, d_members: np.ndarray) -> np.ndarray:
    """Displacement coherence per position, in [0, 1].

    corr(p) = (1/N) sum_t [ d_mean . d_t / (|d_mean|^2 + |d_t|^2) ] + 1/2,
    with a 0/0 term (both displacements ~ zero) contributing 0 (neutral).
    """
    N = d_members.shape[0]
    dots = (d_members * d_mean[None, :, :]).sum(axis=2)  # (N, m)
    denom = (d_mean**2).sum(axis=1)[None, :] + (d_members**2).sum(axis=2)
    terms = np.zeros_like(dots)
    ok = denom >= _NEUTRAL_DENOM
    terms[ok] = dots[ok] / denom[ok]
    corr = terms.sum(axis=0) / N + 0.5
    return np.clip(corr, 0.0, 1.0)


@dataclass
class GroupDisplacementField:
    group_id: str
    reference_label: tuple[str, str]
    reference: Transition
    positions: np.ndarray  # (n, 3) medoid initial-state atoms
    member_displacements: np.ndarray  # (N, n, 3)
    mean_displacement: np.ndarray  # (n, 3)
    corr: np.ndarray  # (n,)
    sigma: float
    underflow: np.ndarray  # (n,) bool, any member underflowed there
    excluded: list[str]  # member labels excluded (alignment failures)

    @property
    def n_members(self) -> int:
        return self.member_displacements.shape[0]


def build_field(
    group_id: str,
    reference: Transition,
    members: list[Transition],
    sigma: float | None = None,
    excluded: list[str] | None = None,
) -> GroupDisplacementField:
    """Sample every member's displacement at each medoid initial-state atom
    position, average into the mean field, and score coherence per position.

    `members` must already be aligned to the reference (the reference itself
    should be included in the list).
    """
    if not members:
        raise ValidationError("empty group")
    if sigma is None:
        sigma = default_sigma(reference)
    pts = reference.initial.positions
    samples = np.empty((len(members), pts.shape[0], 3))
    under = np.zeros(pts.shape[0], dtype=bool)
    for t, member in enumerate(members):
        samples[t], uf = sample_displacement(member, pts, sigma)
        under |= uf
    mean = samples.mean(axis=0)
    corr = correlation(mean, samples)
    return GroupDisplacementField(
        group_id=group_id,
        reference_label=reference.label,
        reference=reference,
        positions=pts,
        member_displacements=samples,
        mean_displacement=mean,
        corr=corr,
        sigma=sigma,
        underflow=under,
        excluded=excluded or [],
    )


@dataclass
class RenderElement:
    atom: int
    position: np.ndarray
    kind: str  # "colored" or "gray"
    corr: float
    arrow: np.ndarray | None  # mean displacement, colored elements only


def threshold_filter(
    field: GroupDisplacementField, tau: float
) -> list[RenderElement]:
    """Positions with corr >= tau render colored with a mean-displacement
    arrow; the rest render as small gray spheres. Monotone in tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValidationError("tau must be in [0, 1]")
    out = []
    for i in range(field.positions.shape[0]):
        c = float(field.corr[i])
        if c >= tau:
            out.append(
                RenderElement(i, field.positions[i], "colored", c,
                              field.mean_displacement[i])
            )
        else:
            out.append(RenderElement(i, field.positions[i], "gray", c, None))
    return out


def interpolate_reference(field: GroupDisplacementField, s: float) -> np.ndarray:
    """Linear interpolation (1-s) S0 + s S1 of the reference transition."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError("s must be in [0, 1]")
    return (
        (1.0 - s) * field.reference.initial.positions
        + s * field.reference.final.positions
    )


def serialize_field(field: GroupDisplacementField, tau: float = 0.0) -> dict:
    """Per-position records for the UI; arrows and spheres are client-side."""
    return {
        "group_id": field.group_id,
        "reference": list(field.reference_label),
        "sigma": field.sigma,
        "tau": tau,
        "n_members": field.n_members,
        "excluded": field.excluded,
        "points": [
            {
                "position": [float(x) for x in field.positions[i]],
                "mean_displacement": [
                    float(x) for x in field.mean_displacement[i]
                ],
                "corr": float(field.corr[i]),
            }
            for i in range(field.positions.shape[0])
        ],
    }
