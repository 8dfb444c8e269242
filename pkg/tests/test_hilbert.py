"""Core linear-algebra layer: inner products, traces, commutators, truncation."""

import numpy as np
import pytest

from finiteqm import (DimensionMismatchError, DomainError, OperatorMatrix, StateVector,
                      apply, basis_state, commutator, frobenius_norm, identity_operator,
                      inner_product, trace, truncation_split)
from finiteqm.box import BoxSystem, hamiltonian_matrix


def random_state(rng, n):
    return StateVector(rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_operator(rng, n):
    return OperatorMatrix(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


class TestInnerProduct:
    def test_orthonormal_basis(self):
        for n in range(4):
            for m in range(4):
                got = inner_product(basis_state(4, n), basis_state(4, m))
                assert got == (1.0 if n == m else 0.0)

    def test_hand_expanded_sum(self):
        # conj(u) . v = (1*1 + conj(i)*(-i)) / 2 = (1 - 1) / 2 = 0
        u = StateVector(np.array([1.0, 1.0j]) / np.sqrt(2))
        v = StateVector(np.array([1.0, -1.0j]) / np.sqrt(2))
        assert inner_product(u, v) == 0.0

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            u = random_state(rng, 6)
            v = random_state(rng, 6)
            assert inner_product(u, v) == pytest.approx(np.conj(inner_product(v, u)), abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            inner_product(basis_state(3, 0), basis_state(4, 0))


class TestApply:
    def test_identity(self):
        rng = np.random.default_rng(12)
        v = random_state(rng, 5)
        w = apply(identity_operator(5), v)
        assert np.array_equal(w.coeffs, v.coeffs)

    def test_diagonal_action(self):
        L = OperatorMatrix(np.diag([1.0, 2.0]))
        out = apply(L, StateVector([1.0, 1.0]))
        assert np.allclose(out.coeffs, [1.0, 2.0], atol=0)

    def test_matches_entrywise_oracle(self):
        rng = np.random.default_rng(13)
        L = random_operator(rng, 3)
        v = random_state(rng, 3)
        # independent oracle: explicit summation, no matmul
        expected = np.zeros(3, dtype=complex)
        for i in range(3):
            for j in range(3):
                expected[i] += L.entries[i, j] * v.coeffs[j]
        got = apply(L, v).coeffs
        assert np.max(np.abs(got - expected)) <= 1e-13

    def test_linearity(self):
        rng = np.random.default_rng(14)
        L = random_operator(rng, 8)
        u = random_state(rng, 8)
        v = random_state(rng, 8)
        alpha, beta = 0.7 - 0.2j, -1.1 + 0.4j
        lhs = apply(L, StateVector(alpha * u.coeffs + beta * v.coeffs)).coeffs
        rhs = alpha * apply(L, u).coeffs + beta * apply(L, v).coeffs
        scale = np.max(np.abs(rhs))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply(identity_operator(3), basis_state(4, 0))


class TestTrace:
    @pytest.mark.parametrize("n", [1, 7, 64])
    def test_identity_trace(self, n):
        assert trace(identity_operator(n)) == n + 0j

    def test_diagonal_sum(self):
        assert trace(OperatorMatrix(np.diag([1 + 1j, 2 - 1j]))) == 3 + 0j

    def test_commutator_trace_vanishes(self):
        rng = np.random.default_rng(15)
        A = random_operator(rng, 8)
        B = random_operator(rng, 8)
        bound = 1e-10 * frobenius_norm(A) * frobenius_norm(B)
        assert abs(trace(commutator(A, B))) <= bound

    @pytest.mark.parametrize("n", [2, 16, 256])
    def test_cyclicity(self, n):
        rng = np.random.default_rng(16 + n)
        A = random_operator(rng, n)
        B = random_operator(rng, n)
        tr_ab = trace(OperatorMatrix(A.entries @ B.entries))
        tr_ba = trace(OperatorMatrix(B.entries @ A.entries))
        assert abs(tr_ab - tr_ba) <= 1e-10 * frobenius_norm(A) * frobenius_norm(B)


class TestCommutator:
    def test_self_commutation(self):
        rng = np.random.default_rng(17)
        A = random_operator(rng, 5)
        assert np.all(commutator(A, A).entries == 0)

    def test_diagonal_matrices_commute(self):
        A = OperatorMatrix(np.diag([1.0, 2.0, 3.0]))
        B = OperatorMatrix(np.diag([5.0 + 1j, -1.0, 0.5]))
        assert np.all(commutator(A, B).entries == 0)

    def test_pauli_pair(self):
        # sigma_x sigma_y - sigma_y sigma_x = 2i sigma_z, by 2x2 hand multiplication
        sx = OperatorMatrix(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
        sy = OperatorMatrix(np.array([[0.0, -1.0j], [1.0j, 0.0]]))
        got = commutator(sx, sy).entries
        assert np.allclose(got, 2j * np.diag([1.0, -1.0]), atol=1e-15)

    def test_antisymmetry(self):
        rng = np.random.default_rng(18)
        A = random_operator(rng, 6)
        B = random_operator(rng, 6)
        assert np.allclose(commutator(A, B).entries, -commutator(B, A).entries, atol=0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            commutator(identity_operator(2), identity_operator(3))


class TestFrobeniusNorm:
    def test_zero(self):
        assert frobenius_norm(OperatorMatrix(np.zeros((3, 3)))) == 0.0

    def test_identity_dim4(self):
        assert frobenius_norm(identity_operator(4)) == 2.0

    def test_three_four_five(self):
        # elementwise: sqrt(9 + 16) = 5
        L = OperatorMatrix(np.array([[3.0, 4.0], [0.0, 0.0]]))
        assert frobenius_norm(L) == pytest.approx(5.0, abs=1e-15)


class TestTruncationSplit:
    def test_diagonal_has_no_coupling(self):
        L = OperatorMatrix(np.diag(np.arange(1.0, 9.0)))
        split = truncation_split(L, 3)
        assert split.coupling_norms == (0.0, 0.0)

    def test_identity_split(self):
        split = truncation_split(identity_operator(8), 4)
        assert np.array_equal(split.head.entries, np.eye(4))
        assert split.tail_norm == 2.0
        assert split.proxy_dim == 8

    def test_box_hamiltonian_split(self):
        # diagonal proxy: coupling blocks vanish, tail norm by direct summation
        system = BoxSystem(mass=1.0, width=np.pi, hbar=1.0, cutoff=128)
        H = hamiltonian_matrix(system)
        split = truncation_split(H, 32)
        assert split.coupling_norms == (0.0, 0.0)
        tail_oracle = 0.0
        for n in range(33, 129):
            tail_oracle += (0.5 * n * n) ** 2
        assert split.tail_norm == pytest.approx(np.sqrt(tail_oracle), rel=1e-13)
        assert split.tail_norm > 0

    def test_block_diagonal_has_no_coupling(self):
        rng = np.random.default_rng(19)
        m = np.zeros((10, 10), dtype=complex)
        m[:4, :4] = rng.standard_normal((4, 4))
        m[4:, 4:] = rng.standard_normal((6, 6))
        split = truncation_split(OperatorMatrix(m), 4)
        assert split.coupling_norms == (0.0, 0.0)

    def test_rejects_bad_cut(self):
        with pytest.raises(DomainError):
            truncation_split(identity_operator(4), 4)
        with pytest.raises(DomainError):
            truncation_split(identity_operator(4), 0)


class TestTypes:
    def test_closure_reconstruction(self):
        rng = np.random.default_rng(20)
        v = random_state(rng, 9)
        rebuilt = np.zeros(9, dtype=complex)
        for n in range(9):
            e = basis_state(9, n)
            rebuilt += inner_product(e, v) * e.coeffs
        assert np.array_equal(rebuilt, v.coeffs)

    def test_normalized_flag_enforced(self):
        with pytest.raises(DomainError):
            StateVector([1.0, 1.0], normalized=True)
        StateVector(np.array([1.0, 1.0]) / np.sqrt(2), normalized=True)

    def test_hermitian_hint_enforced(self):
        with pytest.raises(DomainError):
            OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian_hint=True)

    def test_square_and_finite_enforced(self):
        with pytest.raises(DomainError):
            OperatorMatrix(np.zeros((2, 3)))
        with pytest.raises(DomainError):
            OperatorMatrix(np.array([[np.nan, 0.0], [0.0, 0.0]]))
        with pytest.raises(DomainError):
            StateVector([np.inf, 0.0])
