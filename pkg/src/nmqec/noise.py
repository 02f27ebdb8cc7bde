"""Amplitude damping from a qubit coupled resonantly to a Lorentzian reservoir.

The excited-state amplitude decays as

    G(t) = exp(-b t / 2) * ((b / d) sinh(d t / 2) + cosh(d t / 2)),
    d = sqrt(b^2 - 2 gamma0 b),

and the damping parameter is ``gamma(t) = 1 - |G(t)|^2``. When
``b < 2 gamma0`` the root ``d`` is imaginary, G oscillates through zero and
gamma(t) is non-monotonic (information backflow).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from nmqec.channel import SignedKrausMap, tensor_power
from nmqec.errors import OutOfRange, PoleAtGZero

# below this |d t / 2| the sinh(x)/x factor is replaced by its series
_SMALL_ARG = 1e-4
_IMAG_TOL = 1e-12
MAX_QUBITS = 6


@dataclass(frozen=True)
class NoiseParams:
    """Coupling strength ``gamma0`` and spectral bandwidth ``b`` (inverse time)."""

    gamma0: float
    b: float

    def __post_init__(self):
        for name in ("gamma0", "b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")

    @property
    def d(self) -> complex:
        return cmath.sqrt(self.b * self.b - 2.0 * self.gamma0 * self.b)

    @property
    def is_markovian(self) -> bool:
        return self.b >= 2.0 * self.gamma0


PRESETS = {
    "nm": NoiseParams(gamma0=5.0, b=0.01),
    "markov": NoiseParams(gamma0=0.005, b=0.1),
}


def preset(name: str) -> NoiseParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown noise preset {name!r}; choose from {sorted(PRESETS)}") from None


def _sinhc_half(d: complex, t: float) -> complex:
    """sinh(d t / 2) / d, finite as d -> 0."""
    x = 0.5 * d * t
    if abs(x) < _SMALL_ARG:
        return 0.5 * t * (1.0 + x * x / 6.0)
    return cmath.sinh(x) / d


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > _IMAG_TOL * max(1.0, abs(z.real)):
        raise ArithmeticError(f"{what} has imaginary residue {z.imag:.3e}")
    return z.real


def g_of_t(t: float, p: NoiseParams) -> float:
    if t < 0:
        raise OutOfRange(f"t must be >= 0, got {t}")
    d = p.d
    val = math.exp(-0.5 * p.b * t) * (p.b * _sinhc_half(d, t) + cmath.cosh(0.5 * d * t))
    return _real(val, "G(t)")


def dg_dt(t: float, p: NoiseParams) -> float:
    """Closed-form derivative ``G'(t) = -gamma0 b exp(-b t/2) sinh(d t/2) / d``."""
    if t < 0:
        raise OutOfRange(f"t must be >= 0, got {t}")
    val = -p.gamma0 * p.b * math.exp(-0.5 * p.b * t) * _sinhc_half(p.d, t)
    return _real(val, "G'(t)")


def gamma_of_t(t: float, p: NoiseParams) -> float:
    raw = 1.0 - g_of_t(t, p) ** 2
    if raw < -1e-12 or raw > 1.0 + 1e-12:
        raise OutOfRange(f"gamma(t={t}) = {raw!r} outside [0, 1]")
    return min(1.0, max(0.0, raw))


def dgamma_dt(t: float, p: NoiseParams) -> float:
    return -2.0 * g_of_t(t, p) * dg_dt(t, p)


def decay_rate(t: float, p: NoiseParams) -> float:
    """Canonical decay rate ``-2 G'(t) / G(t)``; negative values signal backflow."""
    g = g_of_t(t, p)
    if abs(g) <= 1e-12:
        raise PoleAtGZero(f"G({t}) = {g:.3e}; decay rate diverges")
    return -2.0 * dg_dt(t, p) / g


def g_zeros(p: NoiseParams, t_max: float, samples: int = 20000) -> list[float]:
    """Zeros of G on ``[0, t_max]`` located by sign changes then refined with Brent's method."""
    ts = np.linspace(0.0, t_max, samples)
    gs = np.array([g_of_t(t, p) for t in ts])
    roots = []
    for i in np.nonzero(np.sign(gs[:-1]) * np.sign(gs[1:]) < 0)[0]:
        roots.append(brentq(g_of_t, ts[i], ts[i + 1], args=(p,), xtol=1e-14, rtol=1e-15))
    return roots


def first_full_damping_time(p: NoiseParams, t_max: float = 100.0) -> float:
    """Earliest t with gamma(t) = 1 (first zero of G)."""
    zeros = g_zeros(p, t_max)
    if not zeros:
        raise ValueError(f"G has no zero on [0, {t_max}] for {p}")
    return zeros[0]


def ad_kraus(gamma: float) -> SignedKrausMap:
    """Single-qubit amplitude damping: ``diag(1, sqrt(1-gamma))`` and ``sqrt(gamma)|0><1|``."""
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma must lie in [0, 1], got {gamma}")
    e1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    e2 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return SignedKrausMap(np.stack([e1, e2]))


def ad_noise(gamma: float, n_qubits: int) -> SignedKrausMap:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise OutOfRange(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n_qubits}")
    return tensor_power(ad_kraus(gamma), n_qubits)


def noise_at(t: float, p: NoiseParams, n_qubits: int) -> SignedKrausMap:
    """Full map E(t, 0) on ``n_qubits`` independently damped qubits."""
    return ad_noise(gamma_of_t(t, p), n_qubits)


__all__ = [
    "NoiseParams",
    "PRESETS",
    "preset",
    "g_of_t",
    "dg_dt",
    "gamma_of_t",
    "dgamma_dt",
    "decay_rate",
    "g_zeros",
    "first_full_damping_time",
    "ad_kraus",
    "ad_noise",
    "noise_at",
]
