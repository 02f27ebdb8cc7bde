"""Linear maps on density matrices.

Two representations are used throughout:

* :class:`SignedKrausMap`, the operator sum-difference form
  ``rho -> sum_i s_i K_i rho K_i^dagger`` with ``s_i`` in {+1, -1}. With all
  signs positive this is an ordinary Kraus representation; mixed signs cover
  Hermiticity-preserving maps that are not completely positive.
* :class:`TransferMatrix`, the superoperator acting on column-stacked
  density matrices, ``vec(rho)[a + d*b] = rho[a, b]``.

Choi matrices use the unnormalized maximally entangled vector
``sum_k |k>|k>`` with the output factor first:
``chi = sum_{kl} map(|k><l|) (x) |k><l|``, so ``tr chi = dim_in`` for
trace-preserving maps.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nmqec.errors import DimensionMismatch, NotHermitian, SingularMap, SizeCapExceeded
from nmqec.linalg import dagger, hermitian_eig, hermiticity_residual

TP_TOL = 1e-8
DEFAULT_POWER_CAP = 4096


class SignedKrausMap:
    """Operator sum-difference representation of a linear map.

    Parameters
    ----------
    ops : array_like
        Kraus operators, shape ``(m, dim_out, dim_in)`` or a sequence of
        matrices.
    signs : array_like, optional
        ``+1``/``-1`` per operator; defaults to all ``+1``.
    check_tp : bool
        Verify ``sum_i s_i K_i^dagger K_i = I`` within ``tp_tol`` on
        construction. Partial operator sets (a correctable subset, say) pass
        ``check_tp=False``.
    """

    __slots__ = ("ops", "signs")

    def __init__(self, ops, signs=None, *, check_tp: bool = True, tp_tol: float = TP_TOL):
        ops = np.array(ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise ValueError(f"expected a non-empty stack of matrices, got shape {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators have non-finite entries")
        if signs is None:
            signs = np.ones(ops.shape[0], dtype=np.int8)
        signs = np.array(signs, dtype=np.int8)
        if signs.shape != (ops.shape[0],) or not np.all(np.isin(signs, (-1, 1))):
            raise ValueError("signs must be a +1/-1 vector with one entry per operator")
        ops.setflags(write=False)
        signs.setflags(write=False)
        self.ops = ops
        self.signs = signs
        if check_tp:
            res = self.tp_residual()
            if res > tp_tol:
                raise ValueError(f"map is not trace preserving: residual {res:.3e} > {tp_tol:.1e}")

    @classmethod
    def from_pairs(cls, pairs, **kwargs) -> "SignedKrausMap":
        pairs = list(pairs)
        return cls([k for _, k in pairs], [s for s, _ in pairs], **kwargs)

    @property
    def dim_in(self) -> int:
        return self.ops.shape[2]

    @property
    def dim_out(self) -> int:
        return self.ops.shape[1]

    def __len__(self) -> int:
        return self.ops.shape[0]

    def pairs(self):
        return list(zip(self.signs.tolist(), self.ops))

    def completeness(self) -> np.ndarray:
        """``sum_i s_i K_i^dagger K_i``."""
        return np.einsum("i,iab,iac->bc", self.signs.astype(float), self.ops.conj(), self.ops)

    def tp_residual(self) -> float:
        return float(np.max(np.abs(self.completeness() - np.eye(self.dim_in))))

    @property
    def is_signed(self) -> bool:
        return bool(np.any(self.signs < 0))

    def __repr__(self) -> str:
        neg = int(np.sum(self.signs < 0))
        return f"SignedKrausMap(n_ops={len(self)}, dim_in={self.dim_in}, dim_out={self.dim_out}, negative={neg})"


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Superoperator in the column-stacking convention."""

    dim: int
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        if m.shape != (self.dim**2, self.dim**2):
            raise DimensionMismatch(f"transfer matrix shape {m.shape} does not match dim {self.dim}")
        object.__setattr__(self, "m", m)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        _check_square(rho, self.dim)
        return (self.m @ rho.reshape(-1, order="F")).reshape(self.dim, self.dim, order="F")

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot compose dims {self.dim} and {other.dim}")
        return TransferMatrix(self.dim, self.m @ other.m)

    def to_choi(self) -> np.ndarray:
        d = self.dim
        # T[a + d b, k + d l] = map(|k><l|)[a, b];  chi[(a,k),(b,l)] = same
        return self.m.reshape(d, d, d, d).transpose(1, 3, 0, 2).reshape(d * d, d * d)

    def to_signed_kraus(self, tol: float = 1e-12, check_tp: bool = False) -> SignedKrausMap:
        return choi_to_signed_kraus(self.to_choi(), tol=tol, dim_in=self.dim, check_tp=check_tp)

    def tp_residual(self) -> float:
        vec_id = np.eye(self.dim).reshape(-1, order="F")
        return float(np.max(np.abs(vec_id @ self.m - vec_id)))

    def hp_residual(self) -> float:
        return hermiticity_residual(self.to_choi())


def _check_square(rho: np.ndarray, dim: int) -> None:
    if rho.ndim != 2 or rho.shape != (dim, dim):
        raise DimensionMismatch(f"operator of shape {rho.shape} does not match dimension {dim}")


def identity_map(dim: int) -> SignedKrausMap:
    return SignedKrausMap(np.eye(dim)[None])


def apply(channel, rho) -> np.ndarray:
    """Apply a :class:`SignedKrausMap` or :class:`TransferMatrix` to ``rho``."""
    if isinstance(channel, TransferMatrix):
        return channel.apply(rho)
    rho = np.asarray(rho, dtype=complex)
    _check_square(rho, channel.dim_in)
    k = channel.ops
    out = (k @ rho) @ dagger(k)
    return np.tensordot(channel.signs.astype(float), out, axes=1)


def transfer_matrix(channel) -> TransferMatrix:
    if isinstance(channel, TransferMatrix):
        return channel
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatch("transfer matrices are only built for square maps")
    k = channel.ops
    d = channel.dim_in
    # vec(K rho K^dagger) = (conj(K) kron K) vec(rho)
    m = np.einsum("i,iab,icd->acbd", channel.signs.astype(float), k.conj(), k).reshape(d * d, d * d)
    return TransferMatrix(d, m)


def to_choi(channel) -> np.ndarray:
    """Choi matrix ``sum_{kl} map(|k><l|) (x) |k><l|``."""
    if isinstance(channel, TransferMatrix):
        return channel.to_choi()
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatch("Choi matrices are built for maps with dim_in == dim_out")
    # column vector of K (x) I applied to sum_k |k>|k> is K reshaped row-major
    w = channel.ops.reshape(len(channel), -1)
    return np.einsum("i,ia,ib->ab", channel.signs.astype(float), w, w.conj())


def choi_to_signed_kraus(
    choi, tol: float = 1e-12, dim_in: int | None = None, check_tp: bool = True
) -> SignedKrausMap:
    """Signed Kraus operators from the eigendecomposition of a Hermitian Choi matrix.

    Eigenvalues with ``|lambda| <= tol * max|lambda|`` are dropped. Each kept
    eigenpair contributes ``sign(lambda)`` and ``sqrt(|lambda|) * v`` reshaped
    to ``(dim_out, dim_in)``.
    """
    choi = np.asarray(choi, dtype=complex)
    n = choi.shape[0]
    if dim_in is None:
        dim_in = int(round(np.sqrt(n)))
    if n % dim_in:
        raise DimensionMismatch(f"Choi dimension {n} not divisible by dim_in={dim_in}")
    dim_out = n // dim_in
    scale = max(1.0, float(np.max(np.abs(choi)))) if choi.size else 1.0
    w, v = hermitian_eig(choi, tol=1e-10 * scale)
    big = np.abs(w) > tol * np.max(np.abs(w))
    if not np.any(big):
        raise NotHermitian("Choi matrix is numerically zero")
    ops = (v[:, big] * np.sqrt(np.abs(w[big]))).T.reshape(-1, dim_out, dim_in)
    signs = np.where(w[big] > 0, 1, -1)
    return SignedKrausMap(ops, signs, check_tp=check_tp)


def compose(outer: SignedKrausMap, inner: SignedKrausMap, check_tp: bool = True) -> SignedKrausMap:
    """The map ``outer o inner`` (``inner`` acts first)."""
    if inner.dim_out != outer.dim_in:
        raise DimensionMismatch(f"inner output dim {inner.dim_out} != outer input dim {outer.dim_in}")
    ops = np.einsum("iab,jbc->ijac", outer.ops, inner.ops).reshape(-1, outer.dim_out, inner.dim_in)
    signs = np.outer(outer.signs, inner.signs).reshape(-1)
    return SignedKrausMap(ops, signs, check_tp=check_tp)


def tensor_power(channel: SignedKrausMap, n: int, cap: int = DEFAULT_POWER_CAP) -> SignedKrausMap:
    """``channel`` applied independently to each of ``n`` subsystems.

    Operator ``(i_1, ..., i_n)`` sits at index ``sum_j i_j m^(n-j)``, i.e. the
    first subsystem is the most significant digit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(channel) ** n > cap:
        raise SizeCapExceeded(f"{len(channel)}**{n} Kraus operators exceeds cap {cap}")
    ops, signs = channel.ops, channel.signs.astype(np.int64)
    for _ in range(n - 1):
        ops = np.einsum("iab,jcd->ijacbd", ops, channel.ops).reshape(
            ops.shape[0] * len(channel), ops.shape[1] * channel.dim_out, ops.shape[2] * channel.dim_in
        )
        signs = np.outer(signs, channel.signs).reshape(-1)
    return SignedKrausMap(ops, signs)


def intermediate_map(full_t2, full_t1, tol: float = 1e-12) -> TransferMatrix:
    """``E(t2, t1) = E(t2, t0) E(t1, t0)^{-1}`` as a transfer matrix."""
    t2 = transfer_matrix(full_t2)
    t1 = transfer_matrix(full_t1)
    if t1.dim != t2.dim:
        raise DimensionMismatch(f"maps act on different dimensions {t1.dim} and {t2.dim}")
    smin = np.linalg.svd(t1.m, compute_uv=False)[-1]
    if smin <= tol:
        raise SingularMap(f"earlier map is not invertible (smallest singular value {smin:.3e})")
    return TransferMatrix(t1.dim, np.linalg.solve(t1.m.T, t2.m.T).T)


def is_cp(channel_or_choi, tol: float = 1e-10) -> tuple[bool, float]:
    """Complete-positivity test via the minimum Choi eigenvalue."""
    if isinstance(channel_or_choi, (SignedKrausMap, TransferMatrix)):
        choi = to_choi(channel_or_choi)
    else:
        choi = np.asarray(channel_or_choi, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(choi))))
    w, _ = hermitian_eig(choi, tol=1e-8 * scale)
    lam = float(w[-1])
    return lam >= -tol, lam


def write_choi_csv(path, choi) -> None:
    """Row-major interleaved ``re,im`` entries after a ``# choi dim=<d>`` header."""
    choi = np.asarray(choi, dtype=complex)
    d = int(round(np.sqrt(choi.shape[0])))
    with open(path, "w", newline="") as fh:
        fh.write(f"# choi dim={d}\n")
        writer = csv.writer(fh)
        for row in choi:
            writer.writerow(
                [format(x, ".17g") for x in itertools.chain.from_iterable((z.real, z.imag) for z in row)]
            )


def read_choi_csv(path) -> np.ndarray:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# choi dim="):
        raise ValueError(f"{path}: missing '# choi dim=<d>' header")
    d = int(text[0].split("=", 1)[1])
    rows = [list(map(float, r)) for r in csv.reader(text[1:]) if r]
    arr = np.array(rows)
    if arr.shape != (d * d, 2 * d * d):
        raise ValueError(f"{path}: expected {d*d} rows of {2*d*d} values, got {arr.shape}")
    return arr[:, 0::2] + 1j * arr[:, 1::2]
