import numpy as np
import pytest

from hamident import (
    BasisSet,
    expand_hamiltonian,
    gell_mann_basis,
    pauli_product_basis,
    structure_constants,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_hermitian(rng, N):
    M = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    H = M + M.conj().T
    return H - np.trace(H) / N * np.eye(N)


class TestGellMannBasis:
    def test_n2_is_pauli(self):
        b = gell_mann_basis(2)
        assert b.size == 3
        np.testing.assert_array_equal(b.elements[0], SX)
        np.testing.assert_array_equal(b.elements[1], SY)
        np.testing.assert_array_equal(b.elements[2], SZ)

    def test_pauli_orthonormality(self):
        b = gell_mann_basis(2)
        assert abs(np.trace(b.elements[0] @ b.elements[1])) == 0
        assert np.trace(b.elements[0] @ b.elements[0]) == 2

    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_invariants(self, N):
        b = gell_mann_basis(N)
        assert b.size == N**2 - 1
        gram = np.einsum("jab,kba->jk", b.elements, b.elements)
        np.testing.assert_allclose(gram, 2 * np.eye(b.size), atol=1e-12)
        for X in b.elements:
            assert np.abs(X - X.conj().T).max() < 1e-12
            assert abs(np.trace(X)) < 1e-12

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            gell_mann_basis(1)
        with pytest.raises(ValueError):
            gell_mann_basis(0)


class TestPauliProductBasis:
    def test_two_qubit_layout(self):
        b = pauli_product_basis(2)
        assert b.size == 15
        assert b.hs_norm == 4.0
        assert b.labels[:4] == ["IX", "IY", "IZ", "XI"]
        np.testing.assert_array_equal(
            b.elements[b.index_of("ZY")], np.kron(SZ, SY)
        )
        gram = np.einsum("jab,kba->jk", b.elements, b.elements)
        np.testing.assert_allclose(gram, 4 * np.eye(15), atol=1e-12)

    def test_unknown_label(self):
        b = pauli_product_basis(2)
        with pytest.raises(KeyError):
            b.index_of("QQ")


class TestStructureConstants:
    def test_pauli_identity(self):
        b = pauli_product_basis(1)
        x, y, z = 0, 1, 2
        assert b.structure[x, y, z] == pytest.approx(2j)

    def test_zero_on_repeated_index(self):
        b = gell_mann_basis(3)
        C = b.structure
        for j in range(b.size):
            assert np.abs(C[j, j, :]).max() < 1e-12

    @pytest.mark.parametrize("make", [lambda: gell_mann_basis(3), lambda: pauli_product_basis(2)])
    def test_full_antisymmetry(self, make):
        # brute force over all index triples and all transpositions
        C = make().structure
        np.testing.assert_allclose(C, -C.transpose(1, 0, 2), atol=1e-10)
        np.testing.assert_allclose(C, -C.transpose(0, 2, 1), atol=1e-10)
        np.testing.assert_allclose(C, -C.transpose(2, 1, 0), atol=1e-10)

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_commutator_reconstruction(self, N):
        b = gell_mann_basis(N)
        X, C = b.elements, b.structure
        for j in range(b.size):
            for k in range(b.size):
                direct = X[j] @ X[k] - X[k] @ X[j]
                rebuilt = np.tensordot(C[j, k], X, axes=1)
                assert np.abs(direct - rebuilt).max() < 1e-10

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_jacobi_identity(self, N):
        C = gell_mann_basis(N).structure
        J = (
            np.einsum("jkm,mln->jkln", C, C)
            + np.einsum("klm,mjn->jkln", C, C)
            + np.einsum("ljm,mkn->jkln", C, C)
        )
        assert np.abs(J).max() < 1e-9

    def test_non_orthogonal_basis_rejected(self):
        b = gell_mann_basis(2)
        skewed = BasisSet(
            dim=2,
            elements=np.array([SX, SX + 0.5 * SY, SZ]),
            labels=["a", "b", "c"],
            hs_norm=2.0,
        )
        with pytest.raises(ValueError, match="ill-conditioned"):
            structure_constants(skewed)
        assert b.structure is not None


class TestExpandHamiltonian:
    def test_single_term(self):
        b = pauli_product_basis(1)
        coeffs = expand_hamiltonian((1.3 / 2) * SZ, b)
        np.testing.assert_array_equal(coeffs.a, [0.0, 0.0, 0.65])

    def test_two_qubit_support(self, pauli2):
        b = pauli2
        w1, w2, d1 = 1.3, 2.4, 4.3
        sp = np.array([[0, 1], [0, 0]], dtype=complex)
        sm = sp.T
        H = (
            0.5 * w1 * np.kron(SZ, np.eye(2))
            + 0.5 * w2 * np.kron(np.eye(2), SZ)
            + d1 * (np.kron(sp, sm) + np.kron(sm, sp))
        )
        coeffs = expand_hamiltonian(H, b)
        support = {b.labels[i] for i in coeffs.support()}
        assert support == {"ZI", "IZ", "XX", "YY"}
        assert coeffs.a[b.index_of("XX")] == pytest.approx(d1 / 2)
        assert coeffs.a[b.index_of("YY")] == pytest.approx(d1 / 2)

    def test_zero_operator(self, pauli2):
        coeffs = expand_hamiltonian(np.zeros((4, 4)), pauli2)
        np.testing.assert_array_equal(coeffs.a, np.zeros(15))

    def test_non_hermitian_rejected(self, pauli2):
        H = np.zeros((4, 4), dtype=complex)
        H[0, 1] = 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            expand_hamiltonian(H, pauli2)

    def test_trace_discarded_with_warning(self, pauli1):
        with pytest.warns(UserWarning, match="trace"):
            coeffs = expand_hamiltonian(SZ + 2.0 * np.eye(2), pauli1)
        np.testing.assert_allclose(coeffs.a, [0.0, 0.0, 1.0], atol=1e-15)

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_round_trip_random(self, N):
        # >= 100 draws across the three dimensions
        rng = np.random.default_rng(100 + N)
        b = gell_mann_basis(N)
        for _ in range(34):
            H = random_hermitian(rng, N)
            coeffs = expand_hamiltonian(H, b)
            assert np.abs(coeffs.matrix() - H).max() < 1e-10
