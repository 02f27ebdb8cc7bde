"""Least-squares polynomial fits of fidelity curves."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

from nmqec.errors import IllConditioned

MAX_DEGREE = 8
MAX_CONDITION = 1e12


def poly_fit(x, y, degree: int, constrain_f0: bool = False, max_cond: float = MAX_CONDITION) -> np.ndarray:
    """Coefficients ``c[0] + c[1] x + ... + c[degree] x^degree`` minimizing the squared residual.

    With ``constrain_f0`` the constant term is pinned to 1 and only the
    remaining coefficients are fitted.

    Raises
    ------
    IllConditioned
        If the design matrix condition number exceeds ``max_cond``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_DEGREE}], got {degree}")
    if x.size <= degree:
        raise ValueError(f"need more than {degree} points for a degree-{degree} fit, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    design = npoly.polyvander(x, degree)
    target = y
    if constrain_f0:
        if degree == 0:
            return np.array([1.0])
        design = design[:, 1:]
        target = y - 1.0
    cond = float(np.linalg.cond(design))
    if not np.isfinite(cond) or cond > max_cond:
        raise IllConditioned(f"design matrix condition number {cond:.3e} exceeds {max_cond:.1e}", cond)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    if constrain_f0:
        coef = np.concatenate([[1.0], coef])
    return coef


def poly_eval(coef, x) -> np.ndarray:
    return npoly.polyval(np.asarray(x, dtype=float), np.asarray(coef, dtype=float))
