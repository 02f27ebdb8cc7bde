"""P-divisibility diagnostics from the time dependence of Bloch-matrix eigenvalues.

A dynamical map is flagged as violating P-divisibility wherever a tracked
eigenvalue of ``M(t)`` grows, ``d lambda_k / dt > tol_slope``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from nmqec.analysis.bloch import MMatrix
from nmqec.errors import GridTooCoarse

ZERO_TOL = 1e-9
CONST_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EigenTrack:
    """One continuously tracked eigenvalue.

    ``values`` are the complex eigenvalues along the track; the derivative
    and violation mask refer to ``tracked`` (the real part, or the modulus
    when the track ever leaves the real axis, see ``complex_pair``).
    """

    k: int
    values: np.ndarray
    tracked: np.ndarray
    derivative: np.ndarray
    violation: np.ndarray
    complex_pair: bool
    intervals: list[tuple[float, float]] = field(default_factory=list)

    @property
    def is_constant(self) -> bool:
        return float(np.ptp(self.tracked)) <= CONST_TOL

    @property
    def is_zero(self) -> bool:
        return float(np.max(np.abs(self.values))) <= ZERO_TOL


@dataclass(frozen=True, eq=False)
class DivisibilityReport:
    times: np.ndarray
    tracks: list[EigenTrack]
    tol_slope: float

    @property
    def violation_mask(self) -> np.ndarray:
        """True at time points where any track violates."""
        return np.any([t.violation for t in self.tracks], axis=0)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return mask_intervals(self.times, self.violation_mask)

    def nonzero_tracks(self) -> list[EigenTrack]:
        return [t for t in self.tracks if not t.is_zero]

    def nonconstant_tracks(self) -> list[EigenTrack]:
        return [t for t in self.tracks if not t.is_constant]


def mask_intervals(times: np.ndarray, mask: np.ndarray) -> list[tuple[float, float]]:
    """Maximal runs of ``True`` as ``(t_start, t_end)`` pairs."""
    out = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            out.append((float(times[start]), float(times[i - 1])))
            start = None
    if start is not None:
        out.append((float(times[start]), float(times[-1])))
    return out


def track_eigenvalues(series: np.ndarray) -> np.ndarray:
    """Eigenvalues of each matrix in ``series`` ordered for continuity.

    Consecutive spectra are paired by minimizing the total distance in the
    complex plane (Hungarian assignment), starting from the eigenvalues at the
    first time sorted by descending real part.
    """
    n_t, d, _ = series.shape
    out = np.empty((n_t, d), dtype=complex)
    first = np.linalg.eigvals(series[0])
    out[0] = first[np.lexsort((-first.imag, -first.real))]
    for i in range(1, n_t):
        ev = np.linalg.eigvals(series[i])
        cost = np.abs(out[i - 1][:, None] - ev[None, :])
        _, cols = linear_sum_assignment(cost)
        out[i] = ev[cols]
    return out


def p_divisibility_scan(m_of_t, times=None, dt: float | None = None, tol_slope: float = 1e-8) -> DivisibilityReport:
    """Track eigenvalues of ``M(t)`` and flag where any of them increases.

    Parameters
    ----------
    m_of_t : sequence of MMatrix or array, shape (n_t, 4, 4)
    times : array, optional
        Uniform time grid. Built from ``dt`` when omitted.
    dt : float, optional
        Grid step, used when ``times`` is not given.
    tol_slope : float
        Smallest derivative counted as a violation.

    Raises
    ------
    GridTooCoarse
        With fewer than three time points.
    """
    series = np.array([m.full if isinstance(m, MMatrix) else np.asarray(m, dtype=float) for m in m_of_t])
    n_t = series.shape[0]
    if n_t < 3:
        raise GridTooCoarse(f"need at least 3 time points, got {n_t}")
    if times is None:
        if dt is None:
            raise ValueError("give either times or dt")
        times = dt * np.arange(n_t)
    times = np.asarray(times, dtype=float)
    if times.shape != (n_t,):
        raise ValueError("times must have one entry per matrix")
    steps = np.diff(times)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, float(np.max(np.abs(times)))):
        raise ValueError("time grid must be uniform and increasing")

    eigs = track_eigenvalues(series)
    tracks = []
    for k in range(eigs.shape[1]):
        vals = eigs[:, k]
        cplx = bool(np.any(np.abs(vals.imag) > 1e-10))
        tracked = np.abs(vals) if cplx else vals.real
        deriv = np.gradient(tracked, times)
        viol = deriv > tol_slope
        tracks.append(EigenTrack(k, vals, tracked, deriv, viol, cplx, mask_intervals(times, viol)))
    return DivisibilityReport(times, tracks, tol_slope)
