"""Dense complex-matrix primitives shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. All
functions here are pure; none of them mutate their inputs.
"""

from __future__ import annotations

import functools

import numpy as np

from nmqec.errors import NegativeEigenvalue, NotHermitian

DEFAULT_REL_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats) -> np.ndarray:
    return functools.reduce(kron, mats)


def hermiticity_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def hermitian_eig(h, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues sorted in descending order and the matching
    eigenvectors as columns. Ties keep the order produced by the solver.

    Raises
    ------
    NotHermitian
        If ``max|h - h^dagger| > tol``.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NotHermitian(f"matrix is not square: {h.shape}")
    res = hermiticity_residual(h)
    if res > tol:
        raise NotHermitian(f"hermiticity residual {res:.3e} exceeds {tol:.1e}")
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _psd_spectrum(h, rel_tol: float):
    h = as_matrix(h)
    w, v = hermitian_eig(h, tol=1e-10 * max(1.0, float(np.max(np.abs(h), initial=0.0))))
    scale = max(float(np.max(np.abs(w))), 0.0) if w.size else 0.0
    if scale == 0.0:
        return w, v, np.zeros_like(w, dtype=bool)
    if w[-1] < -rel_tol * scale:
        raise NegativeEigenvalue(
            f"eigenvalue {w[-1]:.3e} below -{rel_tol:.1e} x {scale:.3e}"
        )
    return w, v, w > rel_tol * scale


def inv_sqrt_on_support(h, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Pseudo-inverse square root of a PSD matrix.

    Eigenvalues at or below ``rel_tol * lambda_max`` are treated as zero, so the
    result vanishes off the support of ``h``.
    """
    w, v, keep = _psd_spectrum(h, rel_tol)
    vk = v[:, keep]
    return (vk / np.sqrt(w[keep])) @ dagger(vk)


def support_projector(h, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    w, v, keep = _psd_spectrum(h, rel_tol)
    vk = v[:, keep]
    return vk @ dagger(vk)


def psd_sqrt(h, clip: bool = True) -> np.ndarray:
    """Square root of a Hermitian matrix with negative eigenvalues clipped to 0."""
    h = as_matrix(h)
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    if clip:
        w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def polar_unitary(a, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Unitary factor ``U`` of the polar decomposition ``a = U sqrt(a^dagger a)``.

    Computed from the SVD ``a = W S V^dagger`` as ``U = W V^dagger``. For a
    rank-deficient ``a`` the null-space columns of ``W`` and ``V`` are paired in
    the order the SVD returns them, which keeps ``U`` unitary and deterministic.
    ``rel_tol`` is accepted for signature symmetry with the other support-based
    helpers; the pairing itself needs no cutoff.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"polar_unitary needs a square matrix, got {a.shape}")
    w, _, vh = np.linalg.svd(a)
    return w @ vh


def partial_isometry(a, rel_tol: float = 1e-10) -> np.ndarray:
    """Polar factor restricted to the support of ``a``: ``a (a^dagger a)^{-1/2}``.

    Unlike :func:`polar_unitary` this is zero on the kernel of ``a`` instead
    of being completed to a unitary.
    """
    a = as_matrix(a)
    w, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], a.shape[1]), dtype=complex)
    keep = s > rel_tol * s[0]
    return w[:, keep] @ vh[keep, :]


def projector_onto(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal column vectors."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    return v @ dagger(v)
