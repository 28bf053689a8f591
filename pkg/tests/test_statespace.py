import numpy as np
import pytest

from hamident import (
    HamiltonianCoeffs,
    Trajectory,
    augment,
    build_generator,
    build_reduced_model,
    discretize,
    expand_hamiltonian,
    filtration,
    gell_mann_basis,
    noise_expectation,
    read_trajectory_csv,
    simulate,
    write_trajectory_csv,
)
from tests.conftest import TRUE_VALUES


def brute_force_filtration(observable_indices, coeffs):
    """Independent oracle: close the set with explicit commutator traces."""
    b = coeffs.basis
    X = b.elements
    cut = 1e-10
    hs = [i for i in range(b.size) if abs(coeffs.a[i]) > 1e-14]
    current = set(observable_indices)
    while True:
        new = set(current)
        for g in current:
            for h in hs:
                bracket = X[g] @ X[h] - X[h] @ X[g]
                for l in range(b.size):
                    if abs(np.trace(X[l].conj().T @ bracket)) > cut:
                        new.add(l)
        if new == current:
            return sorted(current)
        current = new


class TestBuildGenerator:
    def test_single_qubit_rotation_block(self, pauli1):
        omega = 1.3
        coeffs = expand_hamiltonian(0.5 * omega * pauli1.elements[2], pauli1)
        A = build_generator(coeffs, [0, 1])  # (x, y)
        np.testing.assert_array_equal(A, [[0.0, -omega], [omega, 0.0]])

    def test_two_qubit_generator_matrix(self, twoqubit):
        w1, w2, d1 = (TRUE_VALUES[k] for k in ("omega1", "omega2", "delta1"))
        expected = np.array(
            [
                [0.0, -w1, 0.0, d1],
                [w1, 0.0, -d1, 0.0],
                [0.0, d1, 0.0, -w2],
                [-d1, 0.0, w2, 0.0],
            ]
        )
        np.testing.assert_array_equal(twoqubit["quantum"].A, expected)

    def test_zero_coefficients(self, pauli2):
        coeffs = HamiltonianCoeffs(np.zeros(15), pauli2)
        A = build_generator(coeffs, list(range(15)))
        np.testing.assert_array_equal(A, np.zeros((15, 15)))

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_antisymmetric_for_random_hamiltonians(self, N):
        rng = np.random.default_rng(7 * N)
        b = gell_mann_basis(N)
        for _ in range(10):
            coeffs = HamiltonianCoeffs(rng.normal(size=b.size), b)
            A = build_generator(coeffs, list(range(b.size)))
            assert np.abs(A + A.T).max() < 1e-10


class TestFiltration:
    def test_two_qubit_accessible_set(self, twoqubit):
        b = twoqubit["basis"]
        acc = filtration([b.index_of("XI")], twoqubit["coeffs"])
        assert [b.labels[i] for i in acc] == ["XI", "YI", "ZX", "ZY"]
        assert acc == brute_force_filtration([b.index_of("XI")], twoqubit["coeffs"])

    def test_commuting_observable_is_singleton(self, pauli1):
        coeffs = expand_hamiltonian(0.65 * pauli1.elements[2], pauli1)
        assert filtration([2], coeffs) == [2]

    def test_dense_hamiltonian_saturates(self, pauli2):
        rng = np.random.default_rng(11)
        coeffs = HamiltonianCoeffs(rng.normal(size=15) + 0.5, pauli2)
        acc = filtration([pauli2.index_of("XI")], coeffs)
        assert acc == list(range(15))
        assert acc == brute_force_filtration([pauli2.index_of("XI")], coeffs)

    def test_matches_brute_force_on_random_sparse(self, pauli2):
        rng = np.random.default_rng(23)
        for _ in range(5):
            a = np.where(rng.random(15) < 0.3, rng.normal(size=15), 0.0)
            if not np.any(a):
                a[0] = 1.0
            coeffs = HamiltonianCoeffs(a, pauli2)
            seed = [int(rng.integers(15))]
            assert filtration(seed, coeffs) == brute_force_filtration(seed, coeffs)


class TestBuildReducedModel:
    def test_reduced_output_and_state(self, twoqubit):
        q = twoqubit["quantum"]
        np.testing.assert_array_equal(q.C, [[1.0, 0.0, 0.0, 0.0]])
        np.testing.assert_array_equal(q.x0, [0.0, 1.0, 0.0, 0.0])

    def test_observable_linearity(self, twoqubit):
        b = twoqubit["basis"]
        q = build_reduced_model(
            twoqubit["coeffs"],
            [2.0 * twoqubit["observable"].a],
            twoqubit["x0_full"],
        )
        np.testing.assert_array_equal(q.C, [[2.0, 0.0, 0.0, 0.0]])

    def test_two_observables(self, twoqubit):
        b = twoqubit["basis"]
        oy = expand_hamiltonian(b.elements[b.index_of("YI")], b)
        q = build_reduced_model(
            twoqubit["coeffs"], [twoqubit["observable"], oy], twoqubit["x0_full"]
        )
        np.testing.assert_array_equal(
            q.C, [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]
        )


class TestAugment:
    def test_block_structure(self, twoqubit):
        aug = twoqubit["augmented"]
        assert aug.model.dim == 6
        assert (aug.quantum_dim, aug.noise_dim) == (4, 2)
        A = aug.model.A
        np.testing.assert_array_equal(A[:4, 4:], np.zeros((4, 2)))
        np.testing.assert_array_equal(A[4:, :4], np.zeros((2, 4)))
        G = twoqubit["noise"].G
        np.testing.assert_array_equal(aug.model.C, [[1.0, 0.0, 0.0, 0.0, G[0], G[1]]])

    def test_zero_dimensional_noise(self, twoqubit):
        from hamident.noisemodel import empty_noise

        aug = augment(twoqubit["quantum"], empty_noise())
        assert aug.noise_dim == 0
        np.testing.assert_array_equal(aug.model.A, twoqubit["quantum"].A)
        np.testing.assert_array_equal(aug.model.C, twoqubit["quantum"].C)

    def test_shared_output_row_per_channel(self, twoqubit):
        b = twoqubit["basis"]
        oy = expand_hamiltonian(b.elements[b.index_of("YI")], b)
        q2 = build_reduced_model(
            twoqubit["coeffs"], [twoqubit["observable"], oy], twoqubit["x0_full"]
        )
        aug = augment(q2, twoqubit["noise"].as_state_space())
        np.testing.assert_array_equal(aug.model.C[0, 4:], aug.model.C[1, 4:])


class TestDiscretize:
    def test_rotation_closed_form(self):
        from hamident import StateSpaceModel

        omega, dt = 1.3, 0.25
        m = StateSpaceModel([[0, -omega], [omega, 0]], [[1, 0]], [0, 1])
        d = discretize(m, dt)
        th = omega * dt
        np.testing.assert_allclose(
            d.Ad, [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]], atol=1e-15
        )

    def test_zero_generator(self):
        from hamident import StateSpaceModel

        m = StateSpaceModel(np.zeros((3, 3)), np.eye(3), np.ones(3))
        np.testing.assert_array_equal(discretize(m, 0.5).Ad, np.eye(3))

    def test_quantum_propagator_is_orthogonal(self, twoqubit):
        Ad = discretize(twoqubit["quantum"], 0.1).Ad
        assert np.abs(Ad.T @ Ad - np.eye(4)).max() < 1e-10

    def test_invalid_dt(self, twoqubit):
        with pytest.raises(ValueError):
            discretize(twoqubit["quantum"], 0.0)


class TestSimulate:
    def test_single_qubit_closed_form(self, pauli1):
        omega, dt, T = 1.3, 0.1, 50
        coeffs = expand_hamiltonian(0.5 * omega * pauli1.elements[2], pauli1)
        obs = expand_hamiltonian(pauli1.elements[0], pauli1)
        x0 = np.zeros(3)
        x0[1] = 1.0
        q = build_reduced_model(coeffs, [obs], x0)
        traj = simulate(discretize(q, dt), T)
        k = np.arange(T)
        np.testing.assert_allclose(
            traj.samples[:, 0], -np.sin(omega * k * dt), atol=1e-12
        )

    def test_first_sample_exact(self, twoqubit):
        traj = simulate(discretize(twoqubit["augmented"], 0.1), 2)
        expected = twoqubit["augmented"].model.C @ twoqubit["augmented"].model.x0
        assert traj.samples[0, 0] == expected[0]

    def test_prefix_consistency(self, twoqubit):
        d = discretize(twoqubit["augmented"], 0.1)
        long = simulate(d, 120)
        short = simulate(d, 40)
        np.testing.assert_array_equal(long.samples[:40], short.samples)

    def test_block_superposition(self, twoqubit):
        # augmented response = quantum response + noise expectation
        aug_traj = twoqubit["trajectory"]
        clean = twoqubit["clean_trajectory"]
        vbar = noise_expectation(twoqubit["noise"], 0.1, 120)
        total = clean.samples[:, 0] + vbar.samples[:, 0]
        assert np.abs(aug_traj.samples[:, 0] - total).max() < 1e-12

    def test_coherence_norm_preserved(self, twoqubit):
        d = discretize(twoqubit["quantum"], 0.1)
        x = d.x0.copy()
        n0 = np.linalg.norm(x)
        for _ in range(120):
            x = d.Ad @ x
            assert abs(np.linalg.norm(x) - n0) < 1e-10

    def test_shot_noise_deterministic_per_seed(self, twoqubit):
        d = discretize(twoqubit["augmented"], 0.1)
        a = simulate(d, 30, shot_sigma=0.05, seed=9)
        b = simulate(d, 30, shot_sigma=0.05, seed=9)
        c = simulate(d, 30, shot_sigma=0.05, seed=10)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert not np.allclose(a.samples, c.samples)

    def test_too_few_steps(self, twoqubit):
        with pytest.raises(ValueError):
            simulate(discretize(twoqubit["quantum"], 0.1), 1)


class TestTrajectoryCsv:
    def test_round_trip_full_precision(self, tmp_path, twoqubit):
        path = tmp_path / "traj.csv"
        write_trajectory_csv(twoqubit["trajectory"], path)
        back = read_trajectory_csv(path)
        assert back.dt == twoqubit["trajectory"].dt
        np.testing.assert_array_equal(back.samples, twoqubit["trajectory"].samples)
        assert back.channel_names == twoqubit["trajectory"].channel_names

    def test_header_format(self, tmp_path):
        traj = Trajectory(0.5, np.arange(6.0).reshape(3, 2), ["y1", "y2"])
        path = tmp_path / "t.csv"
        write_trajectory_csv(traj, path)
        assert path.read_text().splitlines()[0] == "t,y1,y2"

    def test_nonuniform_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,y1\n0,1\n0.1,2\n0.3,3\n")
        with pytest.raises(ValueError, match="uniform"):
            read_trajectory_csv(path)
