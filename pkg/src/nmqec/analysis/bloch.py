"""Bloch-basis matrix of a channel restricted to a one-qubit codespace.

With ``O = (P, X_L, Y_L, Z_L)`` and ``M_ij = tr(O_i channel(O_j)) / 2`` the
fidelity of the codespace state ``rho = (P + r.sigma_L) / 2`` (``|r| = 1``) is
exactly

    F^2 = (1/2) r~^T M r~,    r~ = (1, r),

which for a trace-preserving channel that stays in the codespace reduces to
``(1 + tau.r + r^T T r) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from nmqec.analysis.fidelity import logical_action
from nmqec.channel import apply
from nmqec.codes import PAULIS, Code

_SIGMAS = (np.eye(2, dtype=complex), PAULIS["X"], PAULIS["Y"], PAULIS["Z"])


@dataclass(frozen=True, eq=False)
class MMatrix:
    """Real 4x4 Bloch matrix with its diagnostics.

    ``leakage`` is ``||(I-P) channel(P) (I-P)||`` (NaN when not computed) and
    ``imag_residual`` the largest imaginary part discarded from ``M``.
    """

    full: np.ndarray
    imag_residual: float = 0.0
    leakage: float = float("nan")

    @property
    def tau(self) -> np.ndarray:
        return self.full[1:, 0]

    @property
    def t_block(self) -> np.ndarray:
        return self.full[1:, 1:]

    @property
    def scalar_row_residual(self) -> float:
        return float(np.max(np.abs(self.full[0] - np.array([1.0, 0.0, 0.0, 0.0]))))


def m_from_action(lact: np.ndarray) -> tuple[np.ndarray, float]:
    """Bloch matrix from the compressed logical action (see :func:`logical_action`)."""
    # channel(C s_j C^dagger) compressed = sum_ab (s_j)_ab L[a, b]
    images = np.einsum("jab,abkl->jkl", np.array(_SIGMAS), lact)
    m = 0.5 * np.einsum("ilk,jkl->ij", np.array(_SIGMAS), images)
    return m.real.copy(), float(np.max(np.abs(m.imag)))


def m_matrix(channel, code: Code, with_leakage: bool = True) -> MMatrix:
    code.require_qubit()
    m, imag = m_from_action(logical_action(channel, code))
    leak = float("nan")
    if with_leakage:
        leak = leakage(channel, code)
    return MMatrix(m, imag, leak)


def leakage(channel, code: Code) -> float:
    q = np.eye(code.dim) - code.projector
    return float(np.linalg.norm(q @ apply(channel, code.projector) @ q, 2))


def unitality_defect(channel, code: Code) -> float:
    """``max |channel(P) - P|`` over matrix entries."""
    return float(np.max(np.abs(apply(channel, code.projector) - code.projector)))


def bloch_fidelity(m, r) -> float:
    """``r~^T M r~ / 2`` for a unit Bloch vector ``r``."""
    full = m.full if isinstance(m, MMatrix) else np.asarray(m, dtype=float)
    rt = np.concatenate([[1.0], np.asarray(r, dtype=float)])
    return float(0.5 * rt @ full @ rt)


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _sphere_min(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit vector minimizing ``r^T a r + b.r`` (``a`` symmetric).

    Solves the secular equation ``|(a - mu)^{-1} b / 2| = 1`` for the
    multiplier ``mu`` below the smallest eigenvalue, handling the hard case
    where ``b`` has no component along the bottom eigenspace.
    """
    lam, q = np.linalg.eigh(a)
    bh = q.T @ b
    scale = max(1.0, float(np.max(np.abs(lam))))
    low = lam - lam[0] <= 1e-12 * scale
    b_low = float(np.linalg.norm(bh[low]))
    if b_low <= 1e-12 * max(1.0, float(np.linalg.norm(b))):
        y = np.zeros(3)
        y[~low] = -bh[~low] / (2.0 * (lam[~low] - lam[0]))
        rest = float(y @ y)
        if rest <= 1.0:
            y[np.argmax(low)] = np.sqrt(1.0 - rest)
            return q @ y

    # components without a linear term drop out; keeping them gives 0/0 at mu = lam[0]
    act = np.abs(bh) > 1e-14 * max(1.0, float(np.linalg.norm(b)))

    def h(mu):
        return float(np.sum(bh[act] ** 2 / (4.0 * (lam[act] - mu) ** 2))) - 1.0

    lo = lam[0] - 0.5 * float(np.linalg.norm(b))
    hi = lam[0] - 0.5 * b_low
    if h(lo) >= 0.0:
        mu = lo
    elif h(hi) <= 0.0:
        mu = hi
    else:
        mu = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    y = np.zeros(3)
    y[act] = -bh[act] / (2.0 * (lam[act] - mu))
    return q @ (y / np.linalg.norm(y))


def wcf_from_bloch(m) -> tuple[float, np.ndarray]:
    """Worst-case fidelity from the Bloch matrix: minimum of the quadratic form on the unit sphere."""
    full = m.full if isinstance(m, MMatrix) else np.asarray(m, dtype=float)
    a = 0.25 * (full[1:, 1:] + full[1:, 1:].T)
    b = 0.5 * (full[0, 1:] + full[1:, 0])
    r = _sphere_min(a, b)
    return bloch_fidelity(full, r), r
