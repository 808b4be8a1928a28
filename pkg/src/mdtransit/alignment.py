"""Pose registration of transitions: permutation-invariant pseudo-atoms,
Kabsch rotation, state-swap variant, and group alignment to a medoid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptors import DistanceMatrix, FeatureDelta
from .model import AtomicState, Transition, ValidationError

_WEIGHT_FLOOR = 1e-12


class AlignmentError(ValidationError):
    pass


@dataclass(frozen=True)
class PseudoAtomSet:
    """k pseudo-positions: per-feature weighted centroids of atom positions,
    with |delta f| as effective masses. Permutation-invariant."""

    label: tuple[str, str]
    q: np.ndarray  # (k, 3)
    q_hat: np.ndarray  # (k, 3), centered over valid rows
    valid: np.ndarray  # (k,) bool
    centroid: np.ndarray  # (3,) mean of valid q rows


@dataclass
class AlignmentResult:
    rotation: np.ndarray  # (3, 3), proper
    residual: float
    swapped: bool
    aligned: Transition | None = None
    degenerate: bool = False


def pseudo_atoms(
    transition: Transition,
    delta: FeatureDelta,
    use_final_positions: bool = False,
) -> PseudoAtomSet:
    """Weighted pseudo-centroids q_j = sum_i S_i |df_ij| / sum_i |df_ij|.

    Columns whose weight sum is below 1e-12 carry no displacement signal and
    are flagged invalid; a transition with no valid column at all is an error.
    """
    S = (
        transition.final.positions
        if use_final_positions
        else transition.initial.positions
    )
    W = np.abs(delta.delta)
    if W.shape[0] != S.shape[0]:
        raise ValidationError("feature delta rows do not match atom count")
    sums = W.sum(axis=0)
    valid = sums >= _WEIGHT_FLOOR
    if not valid.any():
        raise AlignmentError(
            f"no displacement signal in transition {transition.label}"
        )
    k = W.shape[1]
    q = np.zeros((k, 3))
    q[valid] = (W[:, valid].T @ S) / sums[valid, None]
    centroid = q[valid].mean(axis=0)
    q_hat = q - centroid
    q_hat[~valid] = 0.0
    return PseudoAtomSet(transition.label, q, q_hat, valid, centroid)


def kabsch(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Proper rotation R minimizing sum_i |R p_i - q_i|^2 for centered rows.

    Returns (R, rms residual, degenerate). Degenerate (all points at the
    origin) yields the identity with zero residual.
    """
    p = np.atleast_2d(p)
    q = np.atleast_2d(q)
    if p.shape != q.shape:
        raise ValidationError("kabsch: shape mismatch")
    if np.allclose(p, 0.0) and np.allclose(q, 0.0):
        return np.eye(3), 0.0, True
    H = p.T @ q
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0:
        d = 1.0
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    diff = p @ R.T - q
    residual = float(np.sqrt((diff**2).sum() / p.shape[0]))
    return R, residual, False


def _apply_pose(
    transition: Transition, R: np.ndarray, center: np.ndarray, target: np.ndarray
) -> Transition:
    """Rotate both states about `center` and translate onto `target`."""

    def move(state: AtomicState) -> AtomicState:
        pos = (state.positions - center) @ R.T + target
        return AtomicState(state.state_id, pos, state.element_symbols)

    return Transition(transition.label, move(transition.initial), move(transition.final))


def align_transition(
    moving: Transition,
    moving_delta: FeatureDelta,
    reference: PseudoAtomSet,
    allow_swap: bool = True,
) -> AlignmentResult:
    """Align `moving` onto a reference pseudo-atom set.

    Evaluates the direct variant (pseudo-atoms from initial-state positions)
    and, when allowed, the state-swapped variant (final-state positions,
    states exchanged); the lower-residual pose wins, ties preferring the
    un-swapped one. The rotation is applied to every atom of both states
    about the moving pseudo-atom centroid.
    """
    candidates: list[tuple[float, bool, np.ndarray, PseudoAtomSet, Transition, bool]] = []
    variants = [(False, moving)]
    if allow_swap:
        variants.append((True, moving.swapped()))
    for swapped, trans in variants:
        pa = pseudo_atoms(trans, moving_delta, use_final_positions=False)
        common = pa.valid & reference.valid
        if not common.any():
            continue
        R, res, degen = kabsch(pa.q_hat[common], reference.q_hat[common])
        candidates.append((res, swapped, R, pa, trans, degen))
    if not candidates:
        raise AlignmentError(
            f"no common valid pseudo-atom columns for {moving.label}"
        )
    candidates.sort(key=lambda c: (c[0], c[1]))
    res, swapped, R, pa, trans, degen = candidates[0]
    aligned = _apply_pose(trans, R, pa.centroid, reference.centroid)
    return AlignmentResult(R, res, swapped, aligned, degen)


@dataclass
class GroupAlignment:
    reference_index: int  # position within the group list
    results: list[AlignmentResult | None]  # None for the reference itself
    warnings: list[str]


def align_group(
    transitions: list[Transition],
    deltas: list[FeatureDelta],
    dm: DistanceMatrix,
    member_indices: list[int] | None = None,
    allow_swap: bool = True,
) -> GroupAlignment:
    """Align every member of a group to the group medoid.

    The reference transition is left untouched; failures on individual
    members become warnings, not a group failure.
    """
    if not transitions:
        raise ValidationError("empty group")
    if member_indices is None:
        member_indices = [dm.index(t.label) for t in transitions]
    from .cluster import medoid as _medoid

    med_global = _medoid(member_indices, dm)
    ref_pos = member_indices.index(med_global)
    reference = pseudo_atoms(transitions[ref_pos], deltas[ref_pos])

    results: list[AlignmentResult | None] = []
    warnings: list[str] = []
    for i, (t, df) in enumerate(zip(transitions, deltas)):
        if i == ref_pos:
            results.append(None)
            continue
        try:
            results.append(align_transition(t, df, reference, allow_swap))
        except AlignmentError as e:
            warnings.append(f"{t.label}: {e}")
            results.append(None)
    return GroupAlignment(ref_pos, results, warnings)
