import numpy as np
import pytest

from hamident import (
    HamiltonianTerm,
    NoiseTransfer,
    ParameterSpec,
    augment,
    build_reduced_model,
    canonical_realization,
    discretize,
    expand_hamiltonian,
    pauli_product_basis,
    simulate,
)

TRUE_VALUES = {"omega1": 1.3, "omega2": 2.4, "delta1": 4.3}
SEARCH_BOUNDS = {
    "omega1": (0.5, 2.0),
    "omega2": (1.0, 4.0),
    "delta1": (-6.0, 6.0),
    "alpha": [(0.0, 1.0), (5.0, 50.0)],
    "xi0": (-30.0, 30.0),
}


@pytest.fixture(scope="session")
def pauli1():
    return pauli_product_basis(1)


@pytest.fixture(scope="session")
def pauli2():
    return pauli_product_basis(2)


@pytest.fixture(scope="session")
def twoqubit(pauli2):
    """The two-qubit exchange experiment in microsecond units."""
    b = pauli2
    ZI = b.elements[b.index_of("ZI")]
    IZ = b.elements[b.index_of("IZ")]
    XX = b.elements[b.index_of("XX")]
    YY = b.elements[b.index_of("YY")]
    terms = [
        HamiltonianTerm("omega1", 0.5 * ZI),
        HamiltonianTerm("omega2", 0.5 * IZ),
        HamiltonianTerm("delta1", 0.5 * (XX + YY)),
    ]
    x0_full = np.zeros(b.size)
    x0_full[b.index_of("YI")] = 1.0
    spec = ParameterSpec(
        b, terms, [b.elements[b.index_of("XI")]], x0_full, SEARCH_BOUNDS
    )
    coeffs = spec.hamiltonian_coeffs(TRUE_VALUES)
    obs = expand_hamiltonian(b.elements[b.index_of("XI")], b)
    quantum = build_reduced_model(coeffs, [obs], x0_full)
    # shaping filter rescaled to microseconds: (s - 20)/(s^2 + 0.1 s + 20)
    noise_tf = NoiseTransfer(beta=[1.0, -20.0], alpha=[0.1, 20.0])
    noise = canonical_realization(noise_tf, xi0=[0.02, 0.1])
    aug = augment(quantum, noise.as_state_space())
    dt, steps = 0.1, 120
    traj = simulate(discretize(aug, dt), steps)
    clean = simulate(discretize(quantum, dt), steps)
    return {
        "basis": b,
        "terms": terms,
        "x0_full": x0_full,
        "spec": spec,
        "coeffs": coeffs,
        "observable": obs,
        "quantum": quantum,
        "noise_tf": noise_tf,
        "noise": noise,
        "augmented": aug,
        "dt": dt,
        "steps": steps,
        "trajectory": traj,
        "clean_trajectory": clean,
    }
