import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinrates.chain import (
    AmplitudeTable,
    ChainSpec,
    amplitude,
    build_single_excitation_hamiltonian,
    diagonalize,
)
from spinrates.errors import ConfigurationError
from spinrates.simulator import amplitude_full_space_oracle

SPECS = [
    ChainSpec.pair(),
    ChainSpec.pair(0.7, 0.3),
    ChainSpec.heisenberg(3),
    ChainSpec.heisenberg(6),
    ChainSpec.heisenberg(8, j_coupling=-0.4),
    ChainSpec.heisenberg(40),
]
T_GRID = np.linspace(0.0, 60.0, 241)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_spins=1),
        dict(n_spins=3, model="xyz-pair"),
        dict(n_spins=4, j_coupling=0.0),
        dict(n_spins=4, model="ring"),
        dict(n_spins=2.5),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        ChainSpec(**kwargs)


def test_pair_matrix_elements():
    h = build_single_excitation_hamiltonian(ChainSpec.pair(0.25, 0.0))
    assert h[0, 1] == h[1, 0] == 0.5
    assert np.all(np.diag(h) == 0)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_hamiltonian_is_symmetric_tridiagonal(spec):
    h = build_single_excitation_hamiltonian(spec)
    assert np.array_equal(h, h.T)
    assert not np.any(np.triu(h, 2))


def test_pair_eigenvalues():
    table = diagonalize(ChainSpec.pair(0.3))
    np.testing.assert_allclose(table.eigenvalues, [-0.6, 0.6], atol=1e-15)


def test_heisenberg_eigenvalues_match_dense_eigensolve():
    spec = ChainSpec.heisenberg(4)
    dense = np.linalg.eigvalsh(build_single_excitation_hamiltonian(spec))
    np.testing.assert_allclose(diagonalize(spec).eigenvalues, dense, atol=1e-10)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_table_invariants(spec):
    table = diagonalize(spec)
    v = table.eigenvectors
    assert np.max(np.abs(v.T @ v - np.eye(spec.n_spins))) < 1e-12
    rebuilt = v @ np.diag(table.eigenvalues) @ v.T
    assert np.max(np.abs(rebuilt - build_single_excitation_hamiltonian(spec))) < 1e-12
    assert np.all(np.diff(table.eigenvalues) >= 0)


def test_table_is_read_only():
    table = diagonalize(ChainSpec.heisenberg(4))
    with pytest.raises(ValueError):
        table.eigenvalues[0] = 1.0


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_identity_at_time_zero(spec):
    table = diagonalize(spec)
    np.testing.assert_allclose(table.propagator(0.0), np.eye(spec.n_spins), atol=1e-12)
    assert amplitude(table, 1, 1, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert abs(amplitude(table, 1, spec.n_spins, 0.0)) < 1e-14


def test_two_spin_law():
    table = diagonalize(ChainSpec.pair(0.25))
    tau = np.arange(0.0, 4 * np.pi, 1e-3)
    g12 = np.abs(amplitude(table, 1, 2, tau)) ** 2
    g11 = np.abs(amplitude(table, 1, 1, tau)) ** 2
    assert np.max(np.abs(g12 - np.sin(tau / 2) ** 2)) < 1e-12
    assert np.max(np.abs(g11 + g12 - 1)) < 1e-12
    assert abs(amplitude(table, 1, 2, np.pi)) ** 2 == pytest.approx(1.0, abs=1e-14)


def test_delta_does_not_change_transfer_law():
    table = diagonalize(ChainSpec.pair(0.25, 1.3))
    tau = np.linspace(0, 10, 101)
    np.testing.assert_allclose(np.abs(amplitude(table, 1, 2, tau)) ** 2, np.sin(tau / 2) ** 2, atol=1e-13)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_unitarity_and_symmetry(spec):
    u = diagonalize(spec).propagator(T_GRID)
    assert np.max(np.abs(np.sum(np.abs(u) ** 2, axis=1) - 1)) < 1e-12
    assert np.max(np.abs(u - np.swapaxes(u, 1, 2))) < 1e-12


@pytest.mark.parametrize("spec", SPECS[2:], ids=str)
def test_composition(spec):
    table = diagonalize(spec)
    n = spec.n_spins
    for t1, t2 in [(0.3, 1.7), (5.0, 11.25), (20.0, 0.01)]:
        lhs = amplitude(table, 1, n, t1 + t2)
        rhs = sum(amplitude(table, 1, k, t1) * amplitude(table, k, n, t2) for k in range(1, n + 1))
        assert abs(lhs - rhs) < 1e-10


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_diagonal_shift_is_a_gauge(spec):
    h = build_single_excitation_hamiltonian(spec)
    base = diagonalize(spec).propagator(T_GRID)
    shifted = AmplitudeTable.from_hamiltonian(spec, h + 3.7 * np.eye(spec.n_spins)).propagator(T_GRID)
    assert np.max(np.abs(np.abs(base) ** 2 - np.abs(shifted) ** 2)) < 1e-12


def test_site_index_checked():
    table = diagonalize(ChainSpec.heisenberg(4))
    for bad in [(0, 1), (1, 5), (1.5, 2)]:
        with pytest.raises(ValueError):
            amplitude(table, *bad, 1.0)
    with pytest.raises(ValueError):
        amplitude(table, 1, 2, np.inf)


def test_from_hamiltonian_rejects_non_tridiagonal():
    spec = ChainSpec.heisenberg(3)
    with pytest.raises(ConfigurationError):
        AmplitudeTable.from_hamiltonian(spec, np.ones((3, 3)))


def test_matches_full_space_oracle_n6():
    spec = ChainSpec.heisenberg(6)
    table = diagonalize(spec)
    rng = np.random.default_rng(11)
    for t in rng.uniform(0, 50, 20):
        assert np.max(np.abs(amplitude_full_space_oracle(spec, t) - table.propagator(t))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 12),
    j=st.floats(0.05, 2.0) | st.floats(-2.0, -0.05),
    t=st.floats(0.0, 200.0),
)
def test_row_normalization_property(n, j, t):
    table = diagonalize(ChainSpec.heisenberg(n, j))
    u = table.propagator(t)
    assert np.max(np.abs(np.sum(np.abs(u) ** 2, axis=1) - 1)) < 1e-12
