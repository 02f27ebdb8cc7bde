"""Closed-form fidelity losses and fidelity bounds.

Each expression is written in codespace coordinates: with ``C`` the
codeword matrix, an operator ``P X P`` is represented by the ``k x k`` block
``C^dagger X C`` and a codespace state by ``a = C^dagger psi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nmqec.channel import SignedKrausMap
from nmqec.codes import Code, kl_overlaps
from nmqec.errors import NegativeEigenvalue, NegativeEP, NotCorrectable
from nmqec.linalg import DEFAULT_REL_TOL, dagger, inv_sqrt_on_support, psd_sqrt
from nmqec.recovery import leung_components, noise_image

VARIANTS = ("nonmarkovian", "markovian")


def _as_map(ops) -> SignedKrausMap | None:
    if ops is None:
        return None
    if isinstance(ops, SignedKrausMap):
        return ops
    pairs = list(ops)
    if not pairs:
        return None
    return SignedKrausMap.from_pairs(pairs, check_tp=False)


def _logical(code: Code, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    a = code.basis.conj().T @ psi
    if abs(np.linalg.norm(a) - 1.0) > 1e-8:
        raise ValueError("psi must be a normalized codespace state")
    return a


def _variance(x: np.ndarray, a: np.ndarray) -> float:
    """``<a|x^dagger x|a> - |<a|x|a>|^2`` for a block ``x``; ``x`` may be stacked."""
    xa = x @ a
    return np.real(np.einsum("...k,...k->...", xa.conj(), xa)) - np.abs(xa @ a.conj()) ** 2


def exact_qec_infidelity(code: Code, correctable, uncorrectable, psi, kl_tol: float = 1e-8) -> float:
    """Fidelity loss of the Knill-Laflamme recovery when uncorrectable terms are present.

    ``eta = sum_{k,l} s_l / alpha_kk (<M_kl^dagger M_kl> - |<M_kl>|^2)`` with
    ``M_kl = P E_k^dagger F_l P``, ``E_k`` the correctable and ``F_l`` the
    uncorrectable operators.

    Raises
    ------
    NotCorrectable
        If the correctable set violates the Knill-Laflamme conditions by more than ``kl_tol``.
    """
    corr = _as_map(correctable)
    if corr is None:
        raise ValueError("the correctable set must not be empty")
    alpha, resid = kl_overlaps(code, corr)
    if np.max(resid) > kl_tol:
        raise NotCorrectable(f"Knill-Laflamme residual {np.max(resid):.3e} exceeds {kl_tol:.1e}")
    unc = _as_map(uncorrectable)
    if unc is None:
        return 0.0
    a = _logical(code, psi)
    c = code.basis
    ek = np.einsum("iab,bk->iak", corr.ops, c)
    fl = np.einsum("iab,bk->iak", unc.ops, c)
    m = np.einsum("kai,laj->klij", ek.conj(), fl)
    diag = np.real(np.diag(alpha))
    keep = diag > 1e-14
    var = _variance(m[keep], a)
    return float(np.sum(unc.signs[None, :] * var / diag[keep, None]))


@dataclass(frozen=True, eq=False)
class PetzLoss:
    """``eta`` with the decomposition ``A_ij = beta_ij I + Delta_ij`` in codespace coordinates."""

    eta: float
    beta: np.ndarray
    delta_norms: np.ndarray


def petz_infidelity(
    code: Code,
    noise: SignedKrausMap,
    psi,
    variant: str = "nonmarkovian",
    rel_tol: float = DEFAULT_REL_TOL,
) -> PetzLoss:
    """Petz fidelity loss from ``A_ij = P E_i^dagger E[P]^{-1/2} E_j P``.

    ``variant='nonmarkovian'`` weights each ``(i, j)`` term by ``s_i s_j``,
    ``'markovian'`` by ``s_i`` alone.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    try:
        s = inv_sqrt_on_support(noise_image(code, noise), rel_tol)
    except NegativeEigenvalue as exc:
        raise NegativeEP(str(exc)) from exc
    a = _logical(code, psi)
    ec = np.einsum("iab,bk->iak", noise.ops, code.basis)
    amat = np.einsum("iak,ab,jbl->ijkl", ec.conj(), s, ec)
    k = code.k_dim
    beta = np.trace(amat, axis1=2, axis2=3) / k
    delta = amat - beta[:, :, None, None] * np.eye(k)
    var = _variance(delta, a)
    sg = noise.signs.astype(float)
    weight = np.outer(sg, sg) if variant == "nonmarkovian" else np.repeat(sg[:, None], len(sg), axis=1)
    eta = float(np.sum(weight * var))
    return PetzLoss(eta, beta, np.linalg.norm(delta, ord=2, axis=(2, 3)))


def _gram_data(block: np.ndarray):
    """Extreme eigenvalues ``(p, p*lambda)`` of ``g = block^dagger block`` and the residue ``sqrt(g) - sqrt(p lambda)``."""
    g = dagger(block) @ block
    w = np.clip(np.linalg.eigvalsh(0.5 * (g + dagger(g))), 0.0, None)
    low = float(w[0])
    pi = psd_sqrt(g) - np.sqrt(low) * np.eye(g.shape[0])
    return float(w[-1]), low, pi


def _partial_isometry_block(block: np.ndarray) -> np.ndarray:
    w, s, vh = np.linalg.svd(block, full_matrices=False)
    keep = s > 1e-10 * max(s[0], 1e-300)
    return w[:, keep] @ vh[keep, :]


def leung_bounds(
    code: Code,
    noise: SignedKrausMap,
    variant: str = "nonmarkovian",
    psi=None,
    reference: SignedKrausMap | None = None,
) -> tuple[float, float]:
    """Lower and upper bounds on the worst-case fidelity of a Leung recovery.

    Let ``p_l`` and ``p_l lambda_l`` be the largest and smallest eigenvalues of
    ``P E_l^dagger E_l P`` and ``pi_l = sqrt(P E_l^dagger E_l P) - sqrt(p_l lambda_l) P``.
    The correctable set is the one selected by :func:`leung_components`; the
    remaining operators ``N_l`` are uncorrectable.

    ``nonmarkovian`` (recovery built from ``noise`` itself):
        lower = sum_l p_l lambda_l over correctable l;
        upper = 1 - sum_l s_l Var(pi_l) - sum_kl Var(M_kl pi_l) - sum_kl p_l lambda_l Var(M_kl),
        with ``M_kl = P U_k^dagger N_l P``.
    ``markovian`` (recovery built from ``reference``):
        ``beta_l = tr(P U_l^m dagger U_l P) / tr P`` and ``Delta_ll`` its traceless remainder;
        lower = sum_l s_l p_l lambda_l |beta_l|^2;
        upper = 1 - sum_l s_l |beta_l|^2 Var(pi_l) - sum_l s_l Var(Delta_ll)
                - sum_l s_l p_l lambda_l (<pi Delta^dagger Delta pi> - |<pi Delta>|^2)
                - sum_kl s_l p_l lambda_l Var(M^m_kl).

    The upper bound is evaluated at ``psi`` (default ``|0_L>``).
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    a = _logical(code, code.basis[:, 0] if psi is None else psi)
    sg = noise.signs.astype(float)
    blocks = np.einsum("iab,bk->iak", noise.ops, code.basis)
    data = [_gram_data(b) for b in blocks]
    low = np.array([d[1] for d in data])
    pis = [d[2] for d in data]

    if variant == "nonmarkovian":
        comp = leung_components(code, noise)
        sel = list(comp.selected)
        unc = [i for i in range(len(noise)) if i not in set(sel)]
        lower = float(np.sum(low[sel]))
        upper = 1.0 - sum(sg[l] * _variance(pis[l], a) for l in sel)
        for k_idx, k in enumerate(sel):
            vk = comp.isometries[k_idx]
            for l in unc:
                m = dagger(vk) @ blocks[l]
                upper -= _variance(m @ pis[l], a) + low[l] * _variance(m, a)
        return lower, float(upper)

    if reference is None:
        raise ValueError("the markovian variant needs the reference noise the recovery was built from")
    if len(reference) != len(noise) or reference.dim_in != noise.dim_in:
        raise ValueError("reference noise must have the same operator layout as the noise")
    comp = leung_components(code, reference)
    sel = list(comp.selected)
    unc = [i for i in range(len(noise)) if i not in set(sel)]
    lower = 0.0
    upper = 1.0
    kd = code.k_dim
    for j, l in enumerate(sel):
        vm = comp.isometries[j]
        overlap = dagger(vm) @ _partial_isometry_block(blocks[l])
        beta = np.trace(overlap) / kd
        delta = overlap - beta * np.eye(kd)
        b2 = abs(beta) ** 2
        lower += sg[l] * low[l] * b2
        dpa = delta @ pis[l] @ a
        cross = np.real(np.vdot(dpa, dpa)) - abs(np.vdot(a, pis[l] @ delta @ a)) ** 2
        upper -= sg[l] * (b2 * _variance(pis[l], a) + _variance(delta, a) + low[l] * cross)
    for j, _ in enumerate(sel):
        vm = comp.isometries[j]
        for l in unc:
            upper -= sg[l] * low[l] * _variance(dagger(vm) @ blocks[l], a)
    return float(lower), float(upper)
