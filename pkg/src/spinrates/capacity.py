"""Binary entropy and amplitude-damping channel capacities."""

from __future__ import annotations

import math

import numpy as np

# eta within this distance of 1/2 is treated as on the zero-capacity side;
# Q grows roughly as 1.6 (eta - 1/2), so the snap moves Q by < 2e-12
THRESHOLD_ATOL = 1e-12

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 1024


def _check_unit(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def _h2(x):
    """Binary entropy without validation; x is a float ndarray in [0, 1]."""
    out = np.zeros_like(x)
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = -xi * np.log2(xi) - (1.0 - xi) * np.log2(1.0 - xi)
    return out


def _h2_scalar(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def binary_entropy(x):
    """H2(x) in bits, with 0 log 0 = 0. Accepts scalars or arrays."""
    arr = np.atleast_1d(_check_unit(x, "x")).astype(float)
    out = _h2(arr)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def golden_section_max(f, lo, hi, xtol=1e-13, max_iter=200):
    """Maximize a unimodal scalar function on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
    best = max(((f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)))
    return best[1], best[0]


def _maximize_over_p(objective, scalar_objective):
    """Coarse scan on [0, 1] followed by golden-section refinement around the best cell."""
    grid = np.linspace(0.0, 1.0, _SCAN_POINTS + 1)
    values = objective(grid)
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, _SCAN_POINTS)]
    _, best = golden_section_max(scalar_objective, lo, hi)
    return max(best, float(values[i]))


def _coherent_information(eta, h=_h2):
    return lambda p: h(eta * p) - h((1.0 - eta) * p)


def damping_capacity(eta: float) -> float:
    """Quantum capacity Q(eta) of the amplitude damping channel, qubits per use."""
    eta = float(_check_unit(eta, "eta"))
    if eta <= 0.5 + THRESHOLD_ATOL:
        return 0.0
    return max(_maximize_over_p(_coherent_information(eta), _coherent_information(eta, _h2_scalar)), 0.0)


def entanglement_assisted_capacity(eta: float) -> float:
    """Q_E(eta) = (1/2) max_p [H2(p) + H2(eta p) - H2((1 - eta) p)]."""
    eta = float(_check_unit(eta, "eta"))
    info, info_scalar = _coherent_information(eta), _coherent_information(eta, _h2_scalar)
    best = _maximize_over_p(lambda p: _h2(p) + info(p), lambda p: _h2_scalar(p) + info_scalar(p))
    return max(0.5 * best, 0.0)


def eta_after_n_extra_swaps(eta: float, n: int) -> float:
    """Efficiency when the receiver gets n additional extraction attempts."""
    eta = float(_check_unit(eta, "eta"))
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    if n == 0:
        return eta
    # 1 - (1 - eta)^(n+1), without cancellation for small eta
    return -math.expm1((int(n) + 1) * math.log1p(-eta)) if eta < 1.0 else 1.0
