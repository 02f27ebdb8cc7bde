"""Recovery channels: Petz, Leung (polar-decomposition) and stabilizer syndrome lookup."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from nmqec.channel import SignedKrausMap
from nmqec.codes import Code, kl_overlaps, pauli_string, paulis_commute, stabilizer_projector
from nmqec.errors import AmbiguousSyndrome, NegativeEigenvalue, NegativeEP, NotCorrectable
from nmqec.linalg import DEFAULT_REL_TOL, dagger, inv_sqrt_on_support, psd_sqrt

KINDS = ("petz", "leung", "syndrome")
ADAPTATIONS = ("exact", "fixed")


@dataclass(frozen=True)
class RecoverySpec:
    """How a recovery is built at each point of a sweep.

    ``adaptation='exact'`` rebuilds the recovery from the noise being corrected.
    ``adaptation='fixed'`` builds it from a reference noise instead: either
    amplitude damping of strength ``fixed_gamma`` or the named noise
    ``reference`` preset evaluated at the same time. Syndrome recovery ignores
    the noise altogether and must use ``exact``.
    """

    kind: str
    adaptation: str = "exact"
    fixed_gamma: float | None = None
    reference: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"recovery kind must be one of {KINDS}, got {self.kind!r}")
        if self.adaptation not in ADAPTATIONS:
            raise ValueError(f"adaptation must be one of {ADAPTATIONS}, got {self.adaptation!r}")
        fixed = self.adaptation == "fixed"
        given = (self.fixed_gamma is not None) + (self.reference is not None)
        if fixed and given != 1:
            raise ValueError("fixed adaptation needs exactly one of fixed_gamma or reference")
        if not fixed and given:
            raise ValueError("fixed_gamma/reference are only allowed with adaptation='fixed'")
        if self.kind == "syndrome" and fixed:
            raise ValueError("syndrome recovery does not adapt to the noise")
        if self.fixed_gamma is not None and not 0.0 <= self.fixed_gamma <= 1.0:
            raise ValueError(f"fixed_gamma must lie in [0, 1], got {self.fixed_gamma}")


def _complete(ops: list[np.ndarray], signs: list[int], dim: int) -> SignedKrausMap:
    """Append ``sqrt(I - sum s R^dagger R)`` (clipped at zero) so the map is trace preserving."""
    ops_arr = np.array(ops, dtype=complex).reshape(-1, dim, dim)
    s = np.array(signs, dtype=float)
    residue = np.eye(dim) - np.einsum("i,iab,iac->bc", s, ops_arr.conj(), ops_arr)
    kc = psd_sqrt(residue)
    if np.max(np.abs(kc)) > 1e-14:
        ops = list(ops) + [kc]
        signs = list(signs) + [1]
    # a negative part of the residue (signed input) cannot be absorbed by one +1 operator
    return SignedKrausMap(np.array(ops), signs, check_tp=False)


def noise_image(code: Code, noise: SignedKrausMap) -> np.ndarray:
    """``E[P] = sum_i s_i K_i P K_i^dagger``."""
    a = np.einsum("iab,bk->iak", noise.ops, code.basis)
    return np.einsum("i,iak,ibk->ab", noise.signs.astype(float), a, a.conj())


def petz(code: Code, noise: SignedKrausMap, rel_tol: float = DEFAULT_REL_TOL) -> SignedKrausMap:
    """Petz map ``P E^dagger[E[P]^{-1/2} . E[P]^{-1/2}] P`` with a trace-preserving completion.

    Kraus operators are ``R_i = P K_i^dagger E[P]^{-1/2}`` carrying the sign of
    ``K_i``. The inverse square root is taken on the support of ``E[P]``.

    Raises
    ------
    NegativeEP
        If ``E[P]`` has an eigenvalue below ``-rel_tol * lambda_max``.
    """
    ep = noise_image(code, noise)
    try:
        s = inv_sqrt_on_support(ep, rel_tol)
    except NegativeEigenvalue as exc:
        raise NegativeEP(str(exc)) from exc
    p = code.projector
    ops = [p @ dagger(k) @ s for k in noise.ops]
    return _complete(ops, noise.signs.tolist(), code.dim)


@dataclass(frozen=True, eq=False)
class LeungComponents:
    """Polar data behind a Leung recovery.

    ``selected`` indexes the noise operators treated as correctable,
    ``isometries[j]`` is ``U_k P`` restricted to the codespace (shape
    ``(dim, k_dim)``, i.e. ``E_k C (C^dagger E_k^dagger E_k C)^{-1/2}``) for
    ``k = selected[j]``, and ``orthogonality_residual`` is the largest
    ``||P U_l^dagger U_k P||`` over distinct selected pairs.
    """

    selected: tuple[int, ...]
    isometries: np.ndarray
    orthogonality_residual: float


def _codespace_isometry(a: np.ndarray) -> np.ndarray | None:
    """Polar factor of ``a`` (dim x k) if it has full column rank, else None."""
    w, s, vh = np.linalg.svd(a, full_matrices=False)
    if s[0] <= 1e-12 or s[-1] / s[0] <= 1e-8:
        return None
    return w @ vh


def leung_components(code: Code, noise: SignedKrausMap, ortho_tol: float = 1e-8) -> LeungComponents:
    """Select a mutually orthogonal set of full-rank error images ``E_k C``.

    Operators are visited in the noise's own order; one is accepted when its
    polar factor is orthogonal (within ``ortho_tol``) to every factor accepted
    so far.
    """
    restricted = np.einsum("iab,bk->iak", noise.ops, code.basis)
    selected, isos = [], []
    for i, a in enumerate(restricted):
        v = _codespace_isometry(a)
        if v is None:
            continue
        if all(np.linalg.norm(dagger(u) @ v, 2) <= ortho_tol for u in isos):
            selected.append(i)
            isos.append(v)
    residual = 0.0
    for u, v in itertools.combinations(isos, 2):
        residual = max(residual, float(np.linalg.norm(dagger(u) @ v, 2)))
    iso_arr = np.array(isos, dtype=complex).reshape(-1, code.dim, code.k_dim)
    return LeungComponents(tuple(selected), iso_arr, residual)


def leung(code: Code, noise: SignedKrausMap, rel_tol: float = DEFAULT_REL_TOL) -> SignedKrausMap:
    """Recovery with Kraus operators ``R_k = P U_k^dagger`` plus a completion onto the rest."""
    comp = leung_components(code, noise)
    ops = [code.basis @ dagger(v) for v in comp.isometries]
    signs = [int(noise.signs[k]) for k in comp.selected]
    return _complete(ops, signs, code.dim)


def pauli_syndrome(pauli: str, generators) -> tuple[int, ...]:
    return tuple(0 if paulis_commute(pauli, g) else 1 for g in generators)


def weight_one_paulis(n: int, kinds: str = "XYZ") -> list[str]:
    return ["I" * q + c + "I" * (n - q - 1) for q in range(n) for c in kinds]


def syndrome_table(code: Code) -> dict[tuple[int, ...], str]:
    """Map each syndrome to a weight-<=1 Pauli correction, identity at the trivial syndrome.

    Raises
    ------
    AmbiguousSyndrome
        If two table entries share a syndrome but act differently on the codespace.
    """
    gens = code.stabilizers
    if not gens:
        raise ValueError(f"code {code.name!r} has no stabilizer generators")
    n = code.n_phys
    c = code.basis
    table = {(0,) * len(gens): "I" * n}
    for e in weight_one_paulis(n, code.correctable_paulis):
        s = pauli_syndrome(e, gens)
        if s not in table:
            table[s] = e
            continue
        # same syndrome is fine only if both errors act identically on the codespace
        prod = c.conj().T @ pauli_string(table[s]) @ pauli_string(e) @ c
        phase = prod[0, 0]
        if abs(abs(phase) - 1) > 1e-10 or np.max(np.abs(prod - phase * np.eye(code.k_dim))) > 1e-10:
            raise AmbiguousSyndrome(f"{table[s]} and {e} share syndrome {s}")
    return table


def syndrome_recovery(code: Code) -> SignedKrausMap:
    """Kraus operators ``C_s Pi_s`` over all ``2^m`` syndromes ``s``."""
    table = syndrome_table(code)
    n = code.n_phys
    ops = []
    for s in itertools.product((0, 1), repeat=len(code.stabilizers)):
        corr = pauli_string(table.get(s, "I" * n))
        ops.append(corr @ stabilizer_projector(code.stabilizers, s))
    return SignedKrausMap(np.array(ops))


def kl_recovery(code: Code, correctable: SignedKrausMap, kl_tol: float = 1e-8) -> SignedKrausMap:
    """Recovery ``R_k = P E_k^dagger / sqrt(alpha_kk)`` for a set satisfying the Knill-Laflamme conditions.

    Operators with ``alpha_kk = 0`` never reach the codespace and are skipped.
    A completion operator makes the result trace preserving.

    Raises
    ------
    NotCorrectable
        If the Knill-Laflamme residual or an off-diagonal ``alpha`` exceeds ``kl_tol``.
    """
    alpha, resid = kl_overlaps(code, correctable)
    off = alpha - np.diag(np.diag(alpha))
    if np.max(resid) > kl_tol or np.max(np.abs(off), initial=0.0) > kl_tol:
        raise NotCorrectable(
            f"correctable set violates KL: residual {np.max(resid):.3e}, off-diagonal {np.max(np.abs(off), initial=0):.3e}"
        )
    p = code.projector
    ops, signs = [], []
    for k, op in enumerate(correctable.ops):
        a = alpha[k, k].real
        if a <= 1e-14:
            continue
        ops.append(p @ dagger(op) / np.sqrt(a))
        signs.append(1)
    return _complete(ops, signs, code.dim)


__all__ = [
    "RecoverySpec",
    "noise_image",
    "petz",
    "LeungComponents",
    "leung_components",
    "leung",
    "pauli_syndrome",
    "weight_one_paulis",
    "syndrome_table",
    "syndrome_recovery",
    "kl_recovery",
]
