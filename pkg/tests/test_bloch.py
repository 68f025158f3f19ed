import math

import numpy as np
import pytest
from generators import random_state, random_unitary
from hypothesis import given, settings
from hypothesis import strategies as st

from qbound.bloch import (
    basis_matrices,
    bloch_angle_from_overlap,
    bloch_from_state,
    is_pure_bloch,
    star_product,
    state_from_bloch,
)
from qbound.errors import DomainError, InvalidDimensionError, NotAStateError, UndefinedOperationError, ValidationError


class TestBasis:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_trace_orthonormal(self, d):
        b = basis_matrices(d)
        assert b.matrices.shape == (d * d - 1, d, d)
        gram = np.einsum("iab,jba->ij", b.matrices, b.matrices)
        assert np.allclose(gram, 2 * np.eye(d * d - 1), atol=1e-12)
        assert np.allclose(np.einsum("iaa->i", b.matrices), 0, atol=1e-12)
        assert np.allclose(b.matrices, b.matrices.conj().transpose(0, 2, 1))

    def test_pauli(self):
        X, Y, Z = basis_matrices(2).matrices
        assert np.allclose(X, [[0, 1], [1, 0]])
        assert np.allclose(Y, [[0, -1j], [1j, 0]])
        assert np.allclose(Z, [[1, 0], [0, -1]])

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_constants(self, d):
        b = basis_matrices(d)
        assert b.c_d == math.sqrt(d * (d - 1) / 2)
        t = b.d_tensor
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            assert np.allclose(t, t.transpose(perm), atol=1e-12)

    def test_qubit_d_tensor_zero(self):
        assert not np.any(basis_matrices(2).d_tensor)

    def test_d888(self):
        # d_888 of SU(3) in the standard normalization is -1/sqrt(3)
        assert basis_matrices(3).d_tensor[7, 7, 7] == pytest.approx(-1 / math.sqrt(3), abs=1e-12)

    def test_d_tensor_against_matrix_identity(self):
        # {s_i, s_j} = (4/d) delta_ij I + 2 d_ijk s_k
        b = basis_matrices(3)
        m = b.matrices
        for i in range(8):
            for j in range(8):
                anti = m[i] @ m[j] + m[j] @ m[i]
                rhs = (4 / 3) * (i == j) * np.eye(3) + 2 * np.tensordot(b.d_tensor[i, j], m, axes=1)
                assert np.allclose(anti, rhs, atol=1e-12)

    @pytest.mark.parametrize("d", [1, 0, -2, 2.5])
    def test_bad_dimension(self, d):
        with pytest.raises(InvalidDimensionError):
            basis_matrices(d)


class TestStates:
    def test_qubit_examples(self):
        assert np.allclose(state_from_bloch(2, [0, 0, 1]).matrix(), np.diag([1, 0]))
        assert np.allclose(state_from_bloch(2, [0, 0, 0]).matrix(), np.eye(2) / 2)

    def test_qutrit_projector(self):
        n = np.zeros(8)
        n[6], n[7] = math.sqrt(3) / 2, 0.5
        s = state_from_bloch(3, n)
        assert np.allclose(s.matrix(), np.diag([1, 0, 0]), atol=1e-12)
        assert s.pure

    def test_not_a_state(self):
        with pytest.raises(NotAStateError):
            state_from_bloch(2, [0, 0, 1.1])
        with pytest.raises(ValidationError):
            state_from_bloch(3, [0, 0, 1])

    def test_inverse_examples(self):
        assert np.allclose(bloch_from_state(np.diag([1, 0])).bloch, [0, 0, 1])
        assert np.allclose(bloch_from_state(np.eye(4) / 4).bloch, 0)

    def test_inverse_rejects(self):
        with pytest.raises(ValidationError):
            bloch_from_state(np.array([[0.5, 1], [0, 0.5]]))
        with pytest.raises(ValidationError):
            bloch_from_state(np.eye(2))

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_round_trip_random(self, rng, d):
        for _ in range(20):
            u = random_unitary(rng, d)
            p = rng.dirichlet(np.ones(d))
            rho = u @ np.diag(p) @ u.conj().T
            s = bloch_from_state(rho)
            assert np.allclose(s.matrix(), rho, atol=1e-12)
            assert np.allclose(bloch_from_state(s.matrix()).bloch, s.bloch, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3])
    def test_purity_criterion(self, rng, d):
        # matrix purity agrees with |n| = 1 (and n * n = n for d >= 3)
        for _ in range(100):
            s = random_state(rng, d)
            assert np.trace(s.matrix() @ s.matrix()).real == pytest.approx(1, abs=1e-8)
            assert s.pure
            mixed = state_from_bloch(d, 0.9 * s.bloch)
            assert not mixed.pure


class TestStarProduct:
    def test_pure_fixed_point(self, rng):
        b = basis_matrices(3)
        for _ in range(20):
            n = random_state(rng, 3).bloch
            assert np.allclose(star_product(n, n, b), n, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
    def test_symmetric(self, vals):
        b = basis_matrices(3)
        u, v = np.array(vals[:8]), np.array(vals[8:])
        assert np.allclose(star_product(u, v, b), star_product(v, u, b), atol=1e-12)

    def test_undefined_for_qubits(self):
        with pytest.raises(UndefinedOperationError):
            star_product([0, 0, 1], [0, 0, 1], basis_matrices(2))

    def test_mixed_vector_is_not_pure(self):
        n = np.zeros(8)
        n[0] = 1.0  # unit norm but not a pure-state vector
        assert not is_pure_bloch(3, n)


class TestOverlapAngle:
    @pytest.mark.parametrize("delta,theta", [(1, 0), (0, math.pi / 2), (0.5, math.pi / 3)])
    def test_examples(self, delta, theta):
        assert bloch_angle_from_overlap(delta) == pytest.approx(theta, abs=1e-15)

    @given(st.floats(0, 1))
    def test_overlap_identity(self, delta):
        t = bloch_angle_from_overlap(delta)
        a = state_from_bloch(2, [math.sin(t), 0, math.cos(t)])
        b = state_from_bloch(2, [-math.sin(t), 0, math.cos(t)])
        assert a.overlap(b) ** 2 == pytest.approx(delta**2, abs=1e-12)

    @pytest.mark.parametrize("delta", [-0.1, 1.01])
    def test_domain(self, delta):
        with pytest.raises(DomainError):
            bloch_angle_from_overlap(delta)
