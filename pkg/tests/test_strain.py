import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdtransit.model import Transition, bond_graph
from mdtransit.strain import (
    deformation_gradient,
    glyph_set,
    invariants,
    lagrangian_strain,
    neighbor_sets,
    rotation_matrix_to_quaternion,
    serialize_glyphs,
    shape_exponents,
    strain_field,
)
from mdtransit.synth import (
    fcc_lattice,
    random_rotation,
    rotate_transition,
)

from conftest import make_state, make_transition


def fcc_transition(deform=None, a=3.6, cells=3):
    pos0 = fcc_lattice(cells, a)
    pos1 = pos0 if deform is None else pos0 @ deform.T
    return make_transition(pos0, pos1), 1.2 * a / np.sqrt(2)


class TestDeformationGradient:
    def test_uniform_stretch_recovered(self):
        # apply a known linear map to every atom: F should equal it exactly
        Fapplied = np.diag([1.1, 0.95, 1.02])
        t, cutoff = fcc_transition(Fapplied)
        bonds = bond_graph(t, cutoff)
        nbrs = neighbor_sets(bonds, t.n)
        atom = int(np.argmax([len(x) for x in nbrs]))
        F, degen = deformation_gradient(atom, t, nbrs[atom])
        assert not degen
        assert np.allclose(F, Fapplied, atol=1e-10)

    def test_shear_recovered(self):
        Fapplied = np.eye(3)
        Fapplied[0, 1] = 0.08
        t, cutoff = fcc_transition(Fapplied)
        bonds = bond_graph(t, cutoff)
        nbrs = neighbor_sets(bonds, t.n)
        atom = int(np.argmax([len(x) for x in nbrs]))
        F, _ = deformation_gradient(atom, t, nbrs[atom])
        assert np.allclose(F, Fapplied, atol=1e-10)

    def test_too_few_neighbors_degenerate(self):
        t = make_transition(
            [[0, 0, 0], [2, 0, 0], [0, 2, 0]],
            [[0, 0, 0], [2, 0, 0], [0, 2, 0]],
        )
        F, degen = deformation_gradient(0, t, [1, 2])
        assert degen and np.allclose(F, np.eye(3))

    def test_coplanar_neighbors_degenerate(self):
        pos = np.array(
            [[0, 0, 0], [2, 0, 0], [0, 2, 0], [2, 2, 0], [-2, 0, 0]],
            dtype=float,
        )
        t = make_transition(pos, pos)
        F, degen = deformation_gradient(0, t, [1, 2, 3, 4])
        assert degen


class TestInvariants:
    def test_rigid_motion_zero_strain(self, rng):
        R = random_rotation(rng)
        E = lagrangian_strain(R)
        assert np.allclose(E, 0.0, atol=1e-12)
        K1, K2, K3 = invariants(E)
        assert K1 == pytest.approx(0.0, abs=1e-12)
        assert K2 == pytest.approx(0.0, abs=1e-12)
        assert K3 == 0.0  # defined as zero at zero distortion

    def test_pure_dilation(self):
        s = 1.1
        E = lagrangian_strain(s * np.eye(3))
        K1, K2, K3 = invariants(E)
        assert K1 == pytest.approx(1.5 * (s**2 - 1))
        assert K2 == pytest.approx(0.0, abs=1e-12)
        assert K3 == 0.0

    def test_one_dominant_eigenvalue_hits_positive_end(self):
        # deviator eigenvalues proportional to (2, -1, -1): product > 0
        E = np.diag([0.3, 0.0, 0.0])
        _, K2, K3 = invariants(E)
        assert K2 > 0
        assert K3 == pytest.approx(1.0)

    def test_two_equal_eigenvalues_hit_negative_end(self):
        # deviator proportional to (1, 1, -2): product < 0
        E = np.diag([0.3, 0.3, 0.0])
        _, _, K3 = invariants(E)
        assert K3 == pytest.approx(-1.0)

    def test_K1_additivity_against_trace(self, rng):
        for _ in range(20):
            A = rng.normal(scale=0.1, size=(3, 3))
            E = 0.5 * (A + A.T)
            K1, _, _ = invariants(E)
            assert K1 == pytest.approx(np.trace(E))

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_rotation_invariance_and_K3_bounds(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(scale=0.2, size=(3, 3))
        E = 0.5 * (A + A.T)
        R = random_rotation(rng)
        k_a = invariants(E)
        k_b = invariants(R @ E @ R.T)
        assert np.allclose(k_a, k_b, rtol=1e-8, atol=1e-9)
        assert -1.0 <= k_a[2] <= 1.0


class TestStrainField:
    def test_rigid_motion_gives_zero_field(self, rng):
        t, cutoff = fcc_transition()
        moved = rotate_transition(t, random_rotation(rng), rng.normal(size=3))
        # same rigid motion on both states: strain must vanish everywhere
        mixed = Transition(
            t.label,
            t.initial,
            moved.initial.__class__(
                t.final.state_id,
                moved.initial.positions,
                t.final.element_symbols,
            ),
        )
        bonds = bond_graph(mixed, cutoff)
        field = strain_field(mixed, bonds)
        for a in field.atoms:
            if not a.degenerate:
                assert abs(a.K1) < 1e-9
                assert a.K2 < 1e-9

    def test_uniform_deformation_uniform_invariants(self):
        F = np.diag([1.08, 1.0, 0.94])
        t, cutoff = fcc_transition(F)
        bonds = bond_graph(t, cutoff)
        field = strain_field(t, bonds)
        Eexp = lagrangian_strain(F)
        K1e, K2e, K3e = invariants(Eexp)
        full = [a for a in field.atoms if not a.degenerate
                and a.neighbor_count == 12]
        assert full
        for a in full:
            assert a.K1 == pytest.approx(K1e, abs=1e-9)
            assert a.K2 == pytest.approx(K2e, abs=1e-9)
            assert a.K3 == pytest.approx(K3e, abs=1e-6)


class TestGlyphs:
    def test_shape_exponent_limits(self):
        assert shape_exponents(0.0) == (1.0, 1.0)  # sphere
        assert shape_exponents(-1.0) == (1.0, 0.0)  # rod limit
        assert shape_exponents(1.0) == (0.0, 1.0)  # disk limit

    def test_shape_exponents_monotone(self):
        ks = np.linspace(-1, 1, 41)
        e0 = [shape_exponents(k)[0] for k in ks]
        e1 = [shape_exponents(k)[1] for k in ks]
        assert all(a >= b - 1e-12 for a, b in zip(e0, e0[1:]))  # decreasing
        assert all(a <= b + 1e-12 for a, b in zip(e1, e1[1:]))  # increasing

    def test_degenerate_fallback_sphere(self):
        t, cutoff = fcc_transition()  # zero strain everywhere
        bonds = bond_graph(t, cutoff)
        field = strain_field(t, bonds)
        glyphs = glyph_set(field, t, base_radius=0.4)
        for g in glyphs:
            assert g.degenerate
            assert np.allclose(g.semi_axes, 0.2)
            assert g.exponents == (1.0, 1.0)

    def test_alpha_scaled_by_k1(self):
        F = np.diag([1.2, 1.0, 1.0])
        t, cutoff = fcc_transition(F)
        bonds = bond_graph(t, cutoff)
        field = strain_field(t, bonds)
        glyphs = glyph_set(field, t, k1_scale=10.0)
        active = [g for g in glyphs if not g.degenerate]
        assert active
        for g in active:
            assert g.alpha == pytest.approx(abs(g.color_scalar) / 10.0)

    def test_serialization_quaternion_is_unit(self, rng):
        F = np.eye(3) + rng.normal(scale=0.05, size=(3, 3))
        t, cutoff = fcc_transition(F)
        bonds = bond_graph(t, cutoff)
        field = strain_field(t, bonds)
        docs = serialize_glyphs(glyph_set(field, t))
        assert len(docs) == t.n
        for d in docs:
            q = np.asarray(d["quaternion"])
            assert np.linalg.norm(q) == pytest.approx(1.0)
            assert len(d["semi_axes"]) == 3


class TestQuaternion:
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        R = random_rotation(rng)
        w, x, y, z = rotation_matrix_to_quaternion(R)
        # rebuild the rotation from the quaternion
        Rq = np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ])
        assert np.allclose(Rq, R, atol=1e-9)

    def test_identity(self):
        q = rotation_matrix_to_quaternion(np.eye(3))
        assert np.allclose(q, [1, 0, 0, 0])

    def test_half_turn_branches(self):
        for axis in range(3):
            R = -np.eye(3)
            R[axis, axis] = 1.0
            q = rotation_matrix_to_quaternion(R)
            expect = np.zeros(4)
            expect[axis + 1] = 1.0
            assert np.allclose(np.abs(q), expect, atol=1e-12)
