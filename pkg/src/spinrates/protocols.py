"""Asymptotic transmission rates for the communication protocols.

Rates are qubits per unit time (hbar = 1, time in units of 1/J-scaled
frequencies). All functions take an :class:`~spinrates.chain.AmplitudeTable`
so the spectral data is computed once per chain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .capacity import damping_capacity, entanglement_assisted_capacity, eta_after_n_extra_swaps
from .chain import AmplitudeTable, ChainSpec, amplitude
from .errors import (
    ConfigurationError,
    NonTransferringChannelWarning,
    NumericalInstabilityError,
    UnconvergedSeriesError,
)
from .streams import stream_rng

MIN_MASS = 0.999
MASS_OVERFLOW = 1e-6
# survival probability below which the remaining series terms are dropped
SURVIVAL_FLOOR = 1e-32

Protocol = Literal["plain", "multi_excitation", "dual_rail"]
Feedback = Literal["classical", "quantum"]


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: Protocol
    tau: float
    n_extra_swaps: int = 0
    excitations: int = 1
    code_spins: int = 2
    k_max: int = 100_000
    feedback: Feedback = "classical"
    epsilon: float = 0.0
    realizations: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.protocol not in ("plain", "multi_excitation", "dual_rail"):
            raise ConfigurationError(f"unknown protocol {self.protocol!r}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.n_extra_swaps < 0:
            raise ConfigurationError("n_extra_swaps must be >= 0")
        if self.excitations < 1 or self.code_spins < 2:
            raise ConfigurationError("need excitations >= 1 and code_spins >= 2")
        if self.excitations > self.code_spins - 1:
            raise ConfigurationError(
                f"E={self.excitations} excitations need at least E+1 code spins, got {self.code_spins}"
            )
        if self.k_max < 1 or self.realizations < 1:
            raise ConfigurationError("k_max and realizations must be positive")
        if self.feedback not in ("classical", "quantum"):
            raise ConfigurationError(f"unknown feedback mode {self.feedback!r}")
        if not 0 <= self.epsilon < self.tau:
            raise ConfigurationError(f"need 0 <= epsilon < tau, got epsilon={self.epsilon}, tau={self.tau}")


@dataclass
class RateCurve:
    tau_grid: np.ndarray
    rates: np.ndarray
    config: ProtocolConfig
    chain: ChainSpec
    stderr: np.ndarray | None = None
    unconverged: int = 0

    def __post_init__(self):
        self.tau_grid = np.asarray(self.tau_grid, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        if self.tau_grid.shape != self.rates.shape:
            raise ValueError("tau_grid and rates must have equal length")
        if np.any(self.rates[~np.isnan(self.rates)] < 0):
            raise ValueError("rates must be nonnegative")


def _check_tau(tau):
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError(f"tau must be a positive finite time, got {tau!r}")


def _require_pair(table):
    if table.n_spins != 2:
        raise ConfigurationError(f"this protocol runs over a two-spin chain, got N={table.n_spins}")


def transfer_probability(table: AmplitudeTable, tau: float) -> float:
    """eta = |gamma_12(tau)|^2 for a two-spin chain, clipped into [0, 1]."""
    _require_pair(table)
    return min(max(abs(amplitude(table, 1, 2, tau)) ** 2, 0.0), 1.0)


# -- two-spin channel -------------------------------------------------------


def plain_rate(table: AmplitudeTable, tau: float, n: int = 0, rounds_per_use: int | None = None) -> float:
    """Q(eta_n) / ((n + 1) tau) for the swap-every-tau scheme with n extra receiver swaps.

    ``rounds_per_use`` overrides the number of tau intervals charged per channel
    use (default n + 1).
    """
    _check_tau(tau)
    rounds = n + 1 if rounds_per_use is None else rounds_per_use
    if rounds < 1:
        raise ValueError("rounds_per_use must be >= 1")
    eta_n = eta_after_n_extra_swaps(transfer_probability(table, tau), n)
    return damping_capacity(eta_n) / (rounds * tau)


def entanglement_assisted_rate(table: AmplitudeTable, tau: float) -> float:
    _check_tau(tau)
    return entanglement_assisted_capacity(transfer_probability(table, tau)) / tau


def multi_excitation_block_time(p: float, tau: float, excitations: int, code_spins: int) -> float:
    """Expected time to move all E excitations of one block; ``inf`` if p == 0.

    Every round lasts code_spins * tau. After a round each remaining excitation
    has bounced back independently with probability q = 1 - p, so
    T(a) = N tau + sum_b C(a, b) q^b p^(a-b) T(b), solved upward from T(0) = 0.
    """
    if not 1 <= excitations <= code_spins - 1:
        raise ConfigurationError(f"need 1 <= E <= code_spins - 1, got E={excitations}, code_spins={code_spins}")
    if p <= 0.0:
        return math.inf
    q = 1.0 - p
    round_time = code_spins * tau
    times = [0.0]
    log_q = math.log1p(-p) if p < 1.0 else -math.inf
    for a in range(1, excitations + 1):
        rest = sum(math.comb(a, b) * q**b * p ** (a - b) * times[b] for b in range(a))
        # 1 - q^a, kept accurate when p is tiny and q rounds to 1
        times.append((round_time + rest) / -math.expm1(a * log_q))
    return times[excitations]


def multi_excitation_rate(table: AmplitudeTable, tau: float, excitations: int, code_spins: int) -> float:
    """log2 C(code_spins, E) qubits per block divided by the expected block time."""
    _check_tau(tau)
    p = transfer_probability(table, tau)
    block_time = multi_excitation_block_time(p, tau, excitations, code_spins)
    if math.isinf(block_time):
        warnings.warn(
            f"non-transferring channel at tau={tau}: |gamma_12|^2 = 0, rate set to 0",
            NonTransferringChannelWarning,
            stacklevel=2,
        )
        return 0.0
    return math.log2(math.comb(code_spins, excitations)) / block_time


# -- dual-rail conclusive transfer ---------------------------------------------


@dataclass(frozen=True)
class TransferSeries:
    """Success probabilities P(k) of the k-th measurement at ``times[k-1]``."""

    times: np.ndarray
    probabilities: np.ndarray
    coefficients: np.ndarray = field(repr=False)

    @property
    def mass(self) -> float:
        return float(np.sum(self.probabilities))

    @property
    def tail(self) -> float:
        return max(1.0 - self.mass, 0.0)

    def converged(self, min_mass=MIN_MASS) -> bool:
        return self.mass >= min_mass

    @property
    def mean_time(self) -> float:
        """Expected arrival time, renormalized by the captured mass."""
        return float(np.dot(self.times, self.probabilities) / self.mass)


def _uniform_times(tau, k_max):
    return tau * np.arange(1, k_max + 1, dtype=float)


def _coefficients_spectral(table, times):
    """c_k with the convolution sum carried as one running sum per normal mode.

    Writing gamma(t) = sum_m V_am V_bm exp(-i w_m t), the correction
    sum_j gamma_NN(t_k - t_j) c_j becomes sum_m V_Nm^2 exp(-i w_m t_k) S_m with
    S_m = sum_j exp(i w_m t_j) c_j, which costs O(N) per measurement.
    """
    v = table.eigenvectors
    w = table.eigenvalues
    v_end = v[-1]
    a = v[0].astype(complex)  # V_1m - V_Nm S_m
    c = np.zeros(len(times), dtype=complex)
    chunk = 4096
    for start in range(0, len(times), chunk):
        ph = np.exp(-1j * np.multiply.outer(times[start : start + chunk], w))
        fwd = ph * v_end
        back = np.conj(fwd)
        for i in range(len(ph)):
            ck = fwd[i] @ a
            c[start + i] = ck
            a -= back[i] * ck
        if np.vdot(a, a).real < SURVIVAL_FLOOR:
            break
    return c


def _coefficients_direct(table, times):
    """Literal O(k^2) evaluation of c_k = gamma_1N(t_k) - sum_{j<k} gamma_NN(t_k - t_j) c_j."""
    n = table.n_spins
    first = amplitude(table, 1, n, times)
    c = np.zeros(len(times), dtype=complex)
    for k in range(len(times)):
        if k:
            c[k] = first[k] - amplitude(table, n, n, times[k] - times[:k]) @ c[:k]
        else:
            c[k] = first[k]
    return c


def dual_rail_coefficients(table: AmplitudeTable, times, method: str = "spectral") -> np.ndarray:
    """Branch amplitudes c_k for measurements at the strictly increasing ``times``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise ValueError("measurement times must be positive and strictly increasing")
    if method == "spectral":
        return _coefficients_spectral(table, times)
    if method == "direct":
        return _coefficients_direct(table, times)
    raise ValueError(f"unknown method {method!r}")


def dual_rail_series(table: AmplitudeTable, times, method: str = "spectral") -> TransferSeries:
    times = np.asarray(times, dtype=float)
    c = dual_rail_coefficients(table, times, method)
    probs = c.real**2 + c.imag**2
    total = float(np.sum(probs))
    if total > 1.0 + MASS_OVERFLOW:
        raise NumericalInstabilityError(f"success probabilities sum to {total!r} > 1")
    return TransferSeries(times, probs, c)


def dual_rail_success_distribution(table: AmplitudeTable, tau: float, k_max: int, method: str = "spectral"):
    """P(k), k = 1..k_max, for measurements every tau."""
    _check_tau(tau)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return dual_rail_series(table, _uniform_times(tau, k_max), method).probabilities


def conditional_success_probabilities(coefficients) -> np.ndarray:
    """pi_k = |c_k|^2 / prod_{j<k} (1 - pi_j); NaN once an earlier pi_j reached 1."""
    c2 = np.abs(np.asarray(coefficients)) ** 2
    pi = np.full(len(c2), np.nan)
    norm = 1.0
    for k, val in enumerate(c2):
        if norm <= 0.0:
            break
        pi[k] = val / norm
        norm *= 1.0 - pi[k]
    return pi


def success_from_conditionals(pi) -> np.ndarray:
    """P(k) = pi_k (1 - pi_{k-1}) ... (1 - pi_1)."""
    pi = np.asarray(pi, dtype=float)
    out = np.zeros(len(pi))
    survive = 1.0
    for k, val in enumerate(pi):
        if np.isnan(val):
            break
        out[k] = val * survive
        survive *= 1.0 - val
    return out


def _rate_from_series(series, k_max, feedback, min_mass):
    if not series.converged(min_mass):
        raise UnconvergedSeriesError(series.mass, k_max, min_mass)
    rate = 1.0 / series.mean_time
    return rate / 2.0 if feedback == "quantum" else rate


def dual_rail_rate(
    table: AmplitudeTable,
    tau: float,
    k_max: int,
    feedback: Feedback = "classical",
    min_mass: float = MIN_MASS,
) -> float:
    """1/T (classical side line) or 1/(2T) (third spin chain as feedback)."""
    _check_tau(tau)
    if feedback not in ("classical", "quantum"):
        raise ValueError(f"unknown feedback mode {feedback!r}")
    series = dual_rail_series(table, _uniform_times(tau, k_max))
    return _rate_from_series(series, k_max, feedback, min_mass)


@dataclass(frozen=True)
class TiltedRate:
    mean: float
    stderr: float
    rates: np.ndarray = field(repr=False)
    unconverged: tuple[int, ...] = ()

    def __iter__(self):
        yield self.mean
        yield self.stderr


def tilted_times(tau, epsilon, k_max, rng):
    """Measurement times sum_{i<=k} (tau + dt_i) with dt_i uniform on (-epsilon, epsilon)."""
    if epsilon == 0:
        return _uniform_times(tau, k_max)
    return np.cumsum(tau + rng.uniform(-epsilon, epsilon, k_max))


def dual_rail_tilted_rate(
    table: AmplitudeTable,
    tau: float,
    epsilon: float,
    k_max: int,
    realizations: int = 1,
    seed: int = 0,
    min_mass: float = MIN_MASS,
) -> TiltedRate:
    """Mean classical-feedback rate over randomly jittered measurement schedules.

    Realization i draws its jitter from the stream keyed by (seed, bits of tau, i),
    so a point's value does not depend on which grid it belongs to. Realizations whose
    series does not converge are listed in ``unconverged`` and left out of the
    mean; if none converge an :class:`UnconvergedSeriesError` is raised.
    """
    _check_tau(tau)
    if not 0 <= epsilon < tau:
        raise ValueError(f"need 0 <= epsilon < tau, got epsilon={epsilon}")
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    if epsilon == 0:
        rate = dual_rail_rate(table, tau, k_max, "classical", min_mass)
        return TiltedRate(rate, 0.0, np.array([rate]))
    rates, failed, worst = [], [], None
    tau_key = int(np.float64(tau).view(np.uint64))
    for i in range(realizations):
        rng = stream_rng(seed, tau_key, i)
        series = dual_rail_series(table, tilted_times(tau, epsilon, k_max, rng))
        try:
            rates.append(_rate_from_series(series, k_max, "classical", min_mass))
        except UnconvergedSeriesError as exc:
            failed.append(i)
            worst = exc
    if not rates:
        raise worst
    arr = np.array(rates)
    stderr = float(np.std(arr, ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.nan
    return TiltedRate(float(arr.mean()), stderr, arr, tuple(failed))


# -- sweeps -------------------------------------------------------------------


def rate(table: AmplitudeTable, config: ProtocolConfig) -> float:
    """Rate of ``config`` at its own tau; raises on unconverged dual-rail series."""
    if config.protocol == "plain":
        return plain_rate(table, config.tau, config.n_extra_swaps)
    if config.protocol == "multi_excitation":
        return multi_excitation_rate(table, config.tau, config.excitations, config.code_spins)
    if config.epsilon > 0:
        if config.feedback != "classical":
            raise ConfigurationError("tilted schedules are defined for classical feedback only")
        return dual_rail_tilted_rate(
            table, config.tau, config.epsilon, config.k_max, config.realizations, config.seed
        ).mean
    return dual_rail_rate(table, config.tau, config.k_max, config.feedback)


def rate_curve(table: AmplitudeTable, config: ProtocolConfig, tau_grid) -> RateCurve:
    """Evaluate ``config`` over a tau grid; unconverged points become NaN."""
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0:
        raise ValueError("empty tau grid")
    rates = np.full(taus.shape, np.nan)
    stderr = np.full(taus.shape, np.nan) if config.epsilon > 0 else None
    missed = 0
    for i, tau in enumerate(taus):
        point = replace(config, tau=float(tau))
        try:
            if stderr is not None:
                res = dual_rail_tilted_rate(
                    table, point.tau, point.epsilon, point.k_max, point.realizations, point.seed
                )
                rates[i], stderr[i] = res.mean, res.stderr
            else:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", NonTransferringChannelWarning)
                    rates[i] = rate(table, point)
        except UnconvergedSeriesError:
            missed += 1
    return RateCurve(taus, rates, config, table.spec, stderr, missed)
