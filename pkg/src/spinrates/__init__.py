"""Transfer amplitudes, channel capacities and transmission rates of spin-chain quantum channels."""

__version__ = "0.1.0"

from .capacity import (
    binary_entropy,
    damping_capacity,
    entanglement_assisted_capacity,
    eta_after_n_extra_swaps,
)
from .chain import AmplitudeTable, ChainSpec, amplitude, build_single_excitation_hamiltonian, diagonalize
from .protocols import (
    ProtocolConfig,
    RateCurve,
    dual_rail_rate,
    dual_rail_success_distribution,
    dual_rail_tilted_rate,
    entanglement_assisted_rate,
    multi_excitation_rate,
    plain_rate,
    rate_curve,
)
from .simulator import McTrace, MessageQubit, simulate_dual_rail, simulate_multi_excitation

__all__ = [
    "AmplitudeTable",
    "ChainSpec",
    "McTrace",
    "MessageQubit",
    "ProtocolConfig",
    "RateCurve",
    "amplitude",
    "binary_entropy",
    "build_single_excitation_hamiltonian",
    "damping_capacity",
    "diagonalize",
    "dual_rail_rate",
    "dual_rail_success_distribution",
    "dual_rail_tilted_rate",
    "entanglement_assisted_capacity",
    "entanglement_assisted_rate",
    "eta_after_n_extra_swaps",
    "multi_excitation_rate",
    "plain_rate",
    "rate_curve",
    "simulate_dual_rail",
    "simulate_multi_excitation",
]
