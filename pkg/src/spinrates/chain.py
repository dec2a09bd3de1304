"""Spin-chain Hamiltonians in the single-excitation sector and transfer amplitudes.

The chain conserves total magnetization, so a single excitation injected at
one end stays in the N-dimensional sector spanned by |n> (all spins down
except site n). Everything here works in that sector with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConfigurationError, EigensolverError

Model = Literal["xyz-pair", "heisenberg"]

MODELS = ("xyz-pair", "heisenberg")


@dataclass(frozen=True)
class ChainSpec:
    """Physical description of a chain.

    ``xyz-pair`` is the two-spin ``J (XX + YY) + delta ZZ`` coupling;
    ``heisenberg`` is the open isotropic chain ``-J sum_j sigma_j . sigma_{j+1}``.
    """

    n_spins: int
    model: Model = "heisenberg"
    j_coupling: float = 0.25
    delta: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigurationError(f"unknown chain model {self.model!r}; expected one of {MODELS}")
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ConfigurationError(f"n_spins must be an integer >= 2, got {self.n_spins}")
        if self.model == "xyz-pair" and self.n_spins != 2:
            raise ConfigurationError("the xyz-pair model is defined for exactly two spins")
        if not np.isfinite(self.j_coupling) or self.j_coupling == 0:
            raise ConfigurationError("j_coupling must be finite and nonzero")
        if not np.isfinite(self.delta):
            raise ConfigurationError("delta must be finite")

    @classmethod
    def pair(cls, j_coupling=0.25, delta=0.0):
        return cls(2, "xyz-pair", j_coupling, delta)

    @classmethod
    def heisenberg(cls, n_spins, j_coupling=0.25):
        return cls(n_spins, "heisenberg", j_coupling)


def _tridiagonal_elements(spec):
    """Diagonal and off-diagonal of the sector Hamiltonian."""
    n, j = spec.n_spins, spec.j_coupling
    if spec.model == "xyz-pair":
        # XX + YY flips |10> <-> |01> with amplitude 2; ZZ = -1 on both states
        return np.full(2, -spec.delta), np.array([2.0 * j])
    # sigma.sigma = 2 SWAP - 1 on each bond: off-diagonal -2J, and ZZ gives -1
    # on the (one or two) bonds touching the excited site, +1 elsewhere
    bonds = np.full(n, 2.0)
    bonds[0] = bonds[-1] = 1.0
    diag = -j * ((n - 1) - 2.0 * bonds)
    return diag, np.full(n - 1, -2.0 * j)


def build_single_excitation_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Matrix elements <m|H|n> over the one-excitation basis, as a dense N x N array."""
    diag, off = _tridiagonal_elements(spec)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def vacuum_energy(spec: ChainSpec) -> float:
    """Energy of the all-down state, needed to reference phases against it."""
    if spec.model == "xyz-pair":
        return float(spec.delta)
    return float(-spec.j_coupling * (spec.n_spins - 1))


@dataclass(frozen=True, eq=False)
class AmplitudeTable:
    """Spectral decomposition H = V diag(eigenvalues) V^T of the sector Hamiltonian.

    Columns of ``eigenvectors`` are the normal modes in the site basis.
    """

    spec: ChainSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    hamiltonian: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.eigenvalues, self.eigenvectors, self.hamiltonian):
            arr.setflags(write=False)

    @property
    def n_spins(self):
        return self.spec.n_spins

    @classmethod
    def from_hamiltonian(cls, spec, hamiltonian):
        """Diagonalize an explicit tridiagonal sector matrix (e.g. a shifted one)."""
        h = np.array(hamiltonian, dtype=float)
        if h.shape != (spec.n_spins, spec.n_spins):
            raise ConfigurationError(f"hamiltonian shape {h.shape} does not match n_spins={spec.n_spins}")
        if not np.allclose(h, h.T, rtol=0, atol=0) or np.any(np.triu(h, 2)):
            raise ConfigurationError("sector hamiltonian must be real symmetric tridiagonal")
        d, e = np.diag(h).copy(), np.diag(h, 1).copy()
        try:
            # LAPACK stemr: implicit tridiagonal eigensolver, ascending order
            w, v = eigh_tridiagonal(d, e, lapack_driver="stemr")
        except LinAlgError as exc:
            raise EigensolverError(
                f"tridiagonal eigensolver failed: {exc}",
                {"n": spec.n_spins, "diag_range": (d.min(), d.max()), "max_offdiag": np.abs(e).max()},
            ) from exc
        return cls(spec, w, v, h)

    def propagator(self, t) -> np.ndarray:
        """exp(-i H t) in the site basis; an (N, N) array, or (len(t), N, N) for array t."""
        t = np.asarray(t, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(t, self.eigenvalues))
        v = self.eigenvectors
        return np.einsum("nk,...k,mk->...nm", v, phases, v)


def diagonalize(spec: ChainSpec) -> AmplitudeTable:
    return AmplitudeTable.from_hamiltonian(spec, build_single_excitation_hamiltonian(spec))


def _site(table, index, name):
    if int(index) != index or not 1 <= index <= table.n_spins:
        raise ValueError(f"site index {name}={index} outside 1..{table.n_spins}")
    return int(index) - 1


def amplitude(table: AmplitudeTable, m: int, n: int, t):
    """gamma_mn(t) = <n| exp(-i H t) |m>, with 1-based sites; ``t`` may be an array."""
    i, k = _site(table, m, "m"), _site(table, n, "n")
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValueError("time must be finite")
    v = table.eigenvectors
    weights = v[k] * v[i]
    out = np.exp(-1j * np.multiply.outer(t_arr, table.eigenvalues)) @ weights
    return complex(out) if out.ndim == 0 else out


def end_to_end_probability(table: AmplitudeTable, t):
    """|gamma_1N(t)|^2, the arrival probability at the far end."""
    return np.abs(amplitude(table, 1, table.n_spins, t)) ** 2
