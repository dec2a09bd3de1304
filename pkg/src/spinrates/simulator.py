"""Monte Carlo protocol traces and brute-force oracles.

The Monte Carlo routines sample outcome counts from the known success
distributions; they do not evolve quantum states. The oracles do evolve
states, either on the full 2^N Hilbert space or on the one-excitation sector
with explicit projections, and exist to check the production formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .chain import AmplitudeTable, ChainSpec, vacuum_energy
from .errors import ConfigurationError, ResourceError
from .protocols import (
    MIN_MASS,
    ProtocolConfig,
    UnconvergedSeriesError,
    dual_rail_series,
    multi_excitation_block_time,
    transfer_probability,
)
from .streams import stream_rng

MAX_FULL_SPACE_SPINS = 10
MAX_PLAIN_ROUNDS = 5
MAX_REGISTER_QUBITS = 20


@dataclass(frozen=True)
class McTrace:
    """Completion times of transmitted blocks and the cumulative qubit count M."""

    event_times: np.ndarray
    qubits_delivered: np.ndarray
    seed: int
    config: ProtocolConfig
    duration: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.event_times) != len(self.qubits_delivered):
            raise ValueError("event_times and qubits_delivered must have equal length")
        if np.any(np.diff(self.event_times) <= 0):
            raise ValueError("event times must be strictly increasing")

    def delivered(self, t):
        """M(t): qubits delivered up to and including time t."""
        idx = np.searchsorted(self.event_times, t, side="right")
        padded = np.concatenate(([0.0], self.qubits_delivered))
        return padded[idx]

    def rate(self, t):
        """Instantaneous rate M(t) / t."""
        t = np.asarray(t, dtype=float)
        return self.delivered(t) / t

    @property
    def final_rate(self) -> float:
        return float(self.rate(self.duration))


@dataclass(frozen=True)
class MessageQubit:
    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @property
    def vector(self):
        return np.array([self.alpha, self.beta], dtype=complex)

    @classmethod
    def random(cls, rng):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        return cls(complex(z[0]), complex(z[1]))


# -- Monte Carlo traces ----------------------------------------------------------


def simulate_multi_excitation(
    table: AmplitudeTable, tau: float, excitations: int, code_spins: int, duration: float, seed: int
) -> McTrace:
    """Round-by-round binomial simulation of E excitations in code_spins memories.

    Each round lasts code_spins * tau; every excitation still on Alice's side
    bounces back with probability 1 - |gamma_12(tau)|^2. A block is credited
    with log2 C(code_spins, E) qubits when its last excitation crosses.
    """
    config = ProtocolConfig("multi_excitation", tau, excitations=excitations, code_spins=code_spins)
    if not duration > 0:
        raise ValueError("duration must be positive")
    p = transfer_probability(table, tau)
    q = 1.0 - p
    round_time = code_spins * tau
    n_rounds = int(math.floor(duration / round_time))
    rng = stream_rng(seed, 0)
    qubits = math.log2(math.comb(code_spins, excitations))
    ends = []
    remaining = excitations
    for r in range(1, n_rounds + 1):
        remaining = int(rng.binomial(remaining, q)) if q > 0 else 0
        if remaining == 0:
            ends.append(r)
            remaining = excitations
    event_times = np.array(ends, dtype=float) * round_time
    delivered = qubits * np.arange(1, len(ends) + 1, dtype=float)
    meta = {"analytic_block_time": multi_excitation_block_time(p, tau, excitations, code_spins)}
    return McTrace(event_times, delivered, seed, config, float(duration), meta)


def _sample_steps(cdf, size, rng):
    k = np.searchsorted(cdf, rng.random(size), side="right") + 1
    return np.minimum(k, len(cdf))


def simulate_dual_rail(
    table: AmplitudeTable,
    tau: float,
    k_max: int,
    feedback: str,
    duration: float,
    seed: int,
    min_mass: float = MIN_MASS,
) -> McTrace:
    """Sample the number of measurements per qubit from the truncated P(k).

    With quantum feedback each qubit additionally waits for an independent
    backward leg drawn from the same distribution before the next one starts.
    """
    config = ProtocolConfig("dual_rail", tau, k_max=k_max, feedback=feedback)
    if not duration > 0:
        raise ValueError("duration must be positive")
    series = dual_rail_series(table, tau * np.arange(1, k_max + 1, dtype=float))
    if not series.converged(min_mass):
        raise UnconvergedSeriesError(series.mass, k_max, min_mass)
    cdf = np.cumsum(series.probabilities) / series.mass
    cdf[-1] = 1.0
    mean_steps = series.mean_time / tau
    legs = 2 if feedback == "quantum" else 1
    batch = int(duration / (tau * mean_steps * legs) * 1.05) + 64

    rng = stream_rng(seed, 0)
    events = []
    start = 0.0
    while start < duration:
        forward = _sample_steps(cdf, batch, rng) * tau
        backward = _sample_steps(cdf, batch, rng) * tau if legs == 2 else np.zeros(batch)
        ends = start + np.cumsum(forward + backward)
        arrive = ends - backward
        events.append(arrive[arrive <= duration])
        start = float(ends[-1])
    event_times = np.concatenate(events) if events else np.zeros(0)
    delivered = np.arange(1, len(event_times) + 1, dtype=float)
    meta = {"tail_probability": series.tail, "mean_transfer_time": series.mean_time}
    return McTrace(event_times, delivered, seed, config, float(duration), meta)


# -- full Hilbert space ---------------------------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _bond(op, i, n):
    """op (x) op on sites i, i+1 of an n-spin register (site 0 is the leading factor)."""
    return np.kron(np.kron(np.eye(2**i), np.kron(op, op)), np.eye(2 ** (n - i - 2)))


def full_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense 2^N Hamiltonian assembled from Pauli operators; |1> = spin up."""
    n = spec.n_spins
    if n > MAX_FULL_SPACE_SPINS:
        raise ResourceError(f"full-space construction is capped at N={MAX_FULL_SPACE_SPINS}, got {n}")
    # Pauli Z is +1 on |0>; with |1> = up we need the flipped sign convention
    sz = -_SZ
    j = spec.j_coupling
    h = np.zeros((2**n, 2**n), dtype=complex)
    if spec.model == "xyz-pair":
        h += j * (_bond(_SX, 0, 2) + _bond(_SY, 0, 2)) + spec.delta * _bond(sz, 0, 2)
    else:
        for i in range(n - 1):
            h += -j * (_bond(_SX, i, n) + _bond(_SY, i, n) + _bond(sz, i, n))
    return h


@lru_cache(maxsize=32)
def _full_spectrum(spec):
    w, v = np.linalg.eigh(full_hamiltonian(spec))
    return w, v


def full_propagator(spec: ChainSpec, t: float) -> np.ndarray:
    w, v = _full_spectrum(spec)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _excitation_index(site, n):
    return 1 << (n - site)


def amplitude_full_space_oracle(spec: ChainSpec, t: float) -> np.ndarray:
    """gamma_mn(t) for all sites, read off the full 2^N propagator (0-based array)."""
    u = full_propagator(spec, t)
    n = spec.n_spins
    idx = [_excitation_index(s, n) for s in range(1, n + 1)]
    # gamma_mn = <n|U|m>: row index n, column index m, so transpose
    return u[np.ix_(idx, idx)].T


def _apply_two_qubit(state, gate, a, b):
    """Apply a 4x4 gate to axes (a, b) of a (2,)*n state tensor."""
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, state, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b])


def _swap(state, a, b):
    return np.swapaxes(state, a, b)


def _decoder(amplitudes):
    """Unitary on n+1 memories sending sum_i a_i|e_i>/|a| to |e_0>, identity on |0...0>."""
    a = np.asarray(amplitudes, dtype=complex)
    size = len(a)
    dim = 2**size
    gate = np.eye(dim, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0:
        return gate
    basis = np.column_stack([a / norm, np.eye(size, dtype=complex)[:, 1:]])
    q, _ = np.linalg.qr(basis)
    q[:, 0] = a / norm
    w = q.conj().T
    idx = [1 << (size - 1 - i) for i in range(size)]  # |e_i>: memory i excited
    gate[np.ix_(idx, idx)] = w
    return gate


def _chain_purity(state, chain_axes):
    n = state.ndim
    rest = [ax for ax in range(n) if ax not in chain_axes]
    m = np.transpose(state, list(chain_axes) + rest).reshape(4, -1)
    rho = m @ m.conj().T
    return float(np.real(np.trace(rho @ rho)))


def full_hilbert_plain_oracle(
    chain: ChainSpec,
    psi_list,
    tau: float,
    n_extra: int = 0,
    return_purities: bool = False,
):
    """Bob's m-qubit state after the plain swap protocol, simulated on A (x) C (x) B.

    Per message k: Alice swaps A_k into the first chain spin, then n_extra + 1
    times the chain evolves for tau and Bob swaps a fresh memory with the last
    spin; Alice's next load coincides with Bob's last swap. Bob finally applies
    the phase/concentration unitary that gathers each message onto one memory,
    and everything except those m memories is traced out.
    """
    if chain.n_spins != 2:
        raise ConfigurationError("the plain-scheme oracle needs a two-spin chain")
    psi = [q if isinstance(q, MessageQubit) else MessageQubit(*q) for q in psi_list]
    m = len(psi)
    if m < 1:
        raise ValueError("need at least one message qubit")
    slots = n_extra + 1
    n_qubits = m + 2 + m * slots
    if m > MAX_PLAIN_ROUNDS or n_qubits > MAX_REGISTER_QUBITS:
        raise ResourceError(f"register of {n_qubits} qubits (m={m}) exceeds the oracle's limits")

    c1, c2 = m, m + 1

    def bob(k, i):
        return m + 2 + k * slots + i

    state = np.zeros((2,) * n_qubits, dtype=complex)
    # product input: A_k = psi_k, everything else |0>
    vec = np.array([1.0 + 0j])
    for qb in psi:
        vec = np.kron(vec, qb.vector)
    state[(Ellipsis,) + (0,) * (n_qubits - m)] = vec.reshape((2,) * m)

    u = full_propagator(chain, tau)
    purities = []
    state = _swap(state, 0, c1)
    for k in range(m):
        for i in range(slots):
            state = _apply_two_qubit(state, u, c1, c2)
            state = _swap(state, c2, bob(k, i))
        if k + 1 < m:
            state = _swap(state, k + 1, c1)
            # right after a double swap the chain must factor out of A (x) B
            purities.append(_chain_purity(state, (c1, c2)))

    # Bob's decoding: amplitudes of each landing slot relative to the vacuum branch
    e0 = vacuum_energy(chain)
    g11, g12 = u[2, 2] * np.exp(1j * e0 * tau), u[1, 2] * np.exp(1j * e0 * tau)
    decoder = _decoder([g11**i * g12 for i in range(slots)])
    axes_order = [ax for ax in range(n_qubits)]
    for k in range(m):
        axes = [bob(k, i) for i in range(slots)]
        g = decoder.reshape((2,) * (2 * slots))
        state = np.tensordot(g, state, axes=(list(range(slots, 2 * slots)), axes))
        state = np.moveaxis(state, list(range(slots)), axes)

    keep = [bob(k, 0) for k in range(m)]
    rest = [ax for ax in axes_order if ax not in keep]
    mat = np.transpose(state, keep + rest).reshape(2**m, -1)
    rho = mat @ mat.conj().T
    return (rho, purities) if return_purities else rho


def damping_map(rho, eta):
    """Single-qubit amplitude damping channel with efficiency eta."""
    rho = np.asarray(rho, dtype=complex)
    s = math.sqrt(eta)
    return np.array(
        [[rho[0, 0] + (1 - eta) * rho[1, 1], s * rho[0, 1]], [s * rho[1, 0], eta * rho[1, 1]]]
    )


def damped_product_state(psi_list, eta):
    """(x)_k D_eta(|psi_k><psi_k|)."""
    out = np.array([[1.0 + 0j]])
    for qb in psi_list:
        v = qb.vector if isinstance(qb, MessageQubit) else np.asarray(qb, dtype=complex)
        out = np.kron(out, damping_map(np.outer(v, v.conj()), eta))
    return out


# -- single-excitation state vector with projections ------------------------------


def dual_rail_statevector_oracle(table: AmplitudeTable, measurement_times) -> np.ndarray:
    """P(k) by evolving the one-excitation amplitudes and projecting out site N.

    The branch vector is never renormalized, so |psi_N|^2 at each measurement
    is directly the joint probability of k-1 failures and a success.
    """
    times = np.asarray(measurement_times, dtype=float)
    if np.any(np.diff(times) <= 0) or (len(times) and times[0] < 0):
        raise ValueError("measurement times must be nonnegative and strictly increasing")
    h = table.hamiltonian
    psi = np.zeros(table.n_spins, dtype=complex)
    psi[0] = 1.0
    probs = np.zeros(len(times))
    cache = {}
    prev = 0.0
    for k, t in enumerate(times):
        dt = t - prev
        if dt not in cache:
            cache[dt] = expm(-1j * h * dt)
        psi = cache[dt] @ psi
        probs[k] = abs(psi[-1]) ** 2
        psi[-1] = 0.0
        prev = t
    return probs
