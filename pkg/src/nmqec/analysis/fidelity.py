"""State and worst-case fidelity on a one-qubit codespace."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from nmqec.channel import TransferMatrix, apply
from nmqec.codes import Code
from nmqec.errors import DimensionMismatch, NotHermitian, NotNormalized
from nmqec.linalg import hermiticity_residual

DEFAULT_GRID_N = 60
DEFAULT_REFINE_ITERS = 200


def state_fidelity(rho, psi) -> float:
    """``<psi| rho |psi>`` clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise DimensionMismatch(f"rho {rho.shape} does not match state of length {psi.size}")
    if hermiticity_residual(rho) > 1e-8:
        raise NotHermitian("rho is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError(f"rho has trace {np.trace(rho).real:.12g}, expected 1")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NotNormalized("psi is not normalized")
    return float(min(1.0, max(0.0, np.real(np.vdot(psi, rho @ psi)))))


def logical_action(channel, code: Code) -> np.ndarray:
    """Compressed action ``L[i, j] = C^dagger channel(|c_i><c_j|) C`` (shape ``(k, k, k, k)``).

    With it the fidelity of ``a_0|c_0> + a_1|c_1>`` is
    ``sum_ijkl a_i conj(a_j) conj(a_k) a_l L[i, j, k, l]``.
    """
    c = code.basis
    k = code.k_dim
    if isinstance(channel, TransferMatrix):
        out = np.empty((k, k, k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                out[i, j] = c.conj().T @ channel.apply(np.outer(c[:, i], c[:, j].conj())) @ c
        return out
    if channel.dim_in != code.dim:
        raise DimensionMismatch(f"channel acts on dimension {channel.dim_in}, code on {code.dim}")
    # A_n = C^dagger K_n C, exact because only the codespace component is read out
    a = c.conj().T @ channel.ops @ c
    # L[i, j, k, l] = sum_n s_n a[n, k, i] conj(a[n, l, j])
    ai = a.transpose(0, 2, 1).reshape(len(a), -1)
    lmat = (ai.T * channel.signs.astype(float)) @ ai.conj()
    return lmat.reshape(k, k, k, k).transpose(0, 2, 1, 3)


def _amplitudes(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def fidelity_from_action(lact: np.ndarray, theta, phi) -> np.ndarray:
    a = _amplitudes(theta, phi)
    k = a.shape[-1]
    u = (a[..., :, None] * a.conj()[..., None, :]).reshape(*a.shape[:-1], k * k)
    return np.real(np.sum((u @ lact.reshape(k * k, k * k)) * u.conj(), axis=-1))


def bloch_grid(grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    """``grid_n`` polar angles on [0, pi] and ``2 grid_n`` azimuths on [0, 2 pi)."""
    theta = np.linspace(0.0, np.pi, grid_n)
    phi = np.linspace(0.0, 2 * np.pi, 2 * grid_n, endpoint=False)
    return theta, phi


def grid_minimum(lact: np.ndarray, grid_n: int) -> tuple[float, tuple[float, float]]:
    theta, phi = bloch_grid(grid_n)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    f = fidelity_from_action(lact, tt, pp)
    i, j = np.unravel_index(np.argmin(f), f.shape)
    return float(f[i, j]), (float(theta[i]), float(phi[j]))


def worst_case_fidelity(
    channel,
    code: Code,
    grid_n: int = DEFAULT_GRID_N,
    refine_iters: int = DEFAULT_REFINE_ITERS,
) -> tuple[float, tuple[float, float]]:
    """Minimum of ``<psi| channel(|psi><psi|) |psi>`` over codespace states.

    A ``grid_n x 2 grid_n`` grid in ``(theta, phi)`` seeds a Nelder-Mead
    refinement; the smaller of the two values is returned together with its
    angles, so the result never exceeds the grid minimum.

    Raises
    ------
    UnsupportedCodeDimension
        If the codespace is not two-dimensional.
    """
    code.require_qubit()
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    lact = logical_action(channel, code)
    best, angles = grid_minimum(lact, grid_n)
    if refine_iters > 0:
        res = minimize(
            lambda x: fidelity_from_action(lact, x[0], x[1]),
            np.array(angles),
            method="Nelder-Mead",
            options={"maxiter": refine_iters, "xatol": 1e-10, "fatol": 1e-12},
        )
        if res.fun < best:
            best = float(res.fun)
            angles = (float(np.mod(res.x[0], 2 * np.pi)), float(np.mod(res.x[1], 2 * np.pi)))
    return best, angles


def channel_fidelity(channel, psi) -> float:
    """Fidelity of ``channel(|psi><psi|)`` with ``psi``, without clamping (signed maps allowed)."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(np.vdot(psi, apply(channel, np.outer(psi, psi.conj())) @ psi)))


@dataclass
class FidelityCurve:
    """Worst-case fidelity along a sweep."""

    times: np.ndarray
    gamma: np.ndarray
    f2_min: np.ndarray
    minimizer_angles: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.f2_min = np.asarray(self.f2_min, dtype=float)
        self.minimizer_angles = np.asarray(self.minimizer_angles, dtype=float).reshape(-1, 2)
        n = len(self.times)
        if not (len(self.gamma) == len(self.f2_min) == len(self.minimizer_angles) == n):
            raise ValueError("FidelityCurve vectors must have equal length")
