"""Single-logical-qubit codes and code-level diagnostics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from nmqec.errors import (
    DependentGenerators,
    DimensionMismatch,
    NonCommutingGenerators,
    NotNormalized,
    UnsupportedCodeDimension,
)
from nmqec.linalg import dagger, kron_all

PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string(s: str) -> np.ndarray:
    """Matrix of a Pauli string; character ``j`` acts on qubit ``j`` (most significant first)."""
    s = s.strip().upper()
    if not s or any(c not in PAULIS for c in s):
        raise ValueError(f"invalid Pauli string {s!r}")
    return kron_all([PAULIS[c] for c in s])


def paulis_commute(a: str, b: str) -> bool:
    if len(a) != len(b):
        raise ValueError(f"Pauli strings of different length: {a!r}, {b!r}")
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 0


def basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real and positive."""
    idx = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[idx]) / v[idx])


@dataclass(frozen=True, eq=False)
class Code:
    """An [[n, 1]] code given by orthonormal codewords.

    ``basis`` holds the codewords as columns, ``projector`` is
    ``basis @ basis^dagger`` and the logical Paulis are built from the codewords
    so that ``logical['Z'] |i_L> = (-1)^i |i_L>``.
    """

    name: str
    basis: np.ndarray
    stabilizers: tuple[str, ...] = ()
    correctable_paulis: str = "XYZ"
    projector: np.ndarray = field(init=False, repr=False)
    logical: dict = field(init=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[1] < 1:
            raise ValueError(f"codewords must be columns of a 2-D array, got {b.shape}")
        n = int(round(np.log2(b.shape[0])))
        if 2**n != b.shape[0]:
            raise DimensionMismatch(f"codeword length {b.shape[0]} is not a power of two")
        gram = dagger(b) @ b
        if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-12:
            raise NotNormalized("codewords are not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        p = b @ dagger(b)
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)
        logical = {}
        if b.shape[1] == 2:
            for key in ("X", "Y", "Z"):
                op = b @ PAULIS[key] @ dagger(b)
                op.setflags(write=False)
                logical[key] = op
        object.__setattr__(self, "logical", logical)

    @property
    def n_phys(self) -> int:
        return int(round(np.log2(self.basis.shape[0])))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def k_dim(self) -> int:
        """Dimension of the codespace (2 for one logical qubit)."""
        return self.basis.shape[1]

    @property
    def codewords(self) -> list[np.ndarray]:
        return [self.basis[:, i] for i in range(self.k_dim)]

    def require_qubit(self) -> None:
        if self.k_dim != 2:
            raise UnsupportedCodeDimension(f"code {self.name!r} has codespace dimension {self.k_dim}, need 2")

    def encode(self, logical) -> np.ndarray:
        a = np.asarray(logical, dtype=complex)
        if a.shape != (self.k_dim,):
            raise DimensionMismatch(f"logical vector must have length {self.k_dim}")
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise NotNormalized(f"logical vector has norm {np.linalg.norm(a):.12g}")
        return self.basis @ a

    def bloch_state(self, theta: float, phi: float) -> np.ndarray:
        """``cos(theta/2)|0_L> + exp(i phi) sin(theta/2)|1_L>``."""
        self.require_qubit()
        return self.encode([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bare_qubit() -> Code:
    return Code("bare", np.eye(2, dtype=complex))


def four_qubit_code() -> Code:
    """Amplitude-damping code with codewords (|0000>+|1111>)/sqrt2 and (|0011>+|1100>)/sqrt2."""
    c0 = (basis_state("0000") + basis_state("1111")) / np.sqrt(2)
    c1 = (basis_state("0011") + basis_state("1100")) / np.sqrt(2)
    return Code("four_qubit", np.stack([c0, c1], axis=1))


def stabilizer_projector(generators, syndrome=None) -> np.ndarray:
    """Projector onto the joint eigenspace with eigenvalue ``(-1)^syndrome[g]`` of each generator."""
    n = len(generators[0])
    syndrome = syndrome or (0,) * len(generators)
    p = np.eye(2**n, dtype=complex)
    for g, bit in zip(generators, syndrome):
        p = p @ (np.eye(2**n) + (-1) ** bit * pauli_string(g)) / 2
    return p


def stabilizer_code(generators, logical_z: str | None = None, name: str = "stabilizer",
                    correctable_paulis: str = "XYZ") -> Code:
    """Code fixed by commuting, independent Pauli generators on n qubits (n-1 of them).

    The codewords are the +1 and -1 eigenvectors of ``logical_z`` (default
    ``Z...Z``) inside the stabilizer subspace, each with its first nonzero
    amplitude made real and positive.
    """
    gens = tuple(g.strip().upper() for g in generators)
    if not gens:
        raise ValueError("at least one generator is required")
    n = len(gens[0])
    if any(len(g) != n for g in gens):
        raise ValueError("generators must all act on the same number of qubits")
    for a, b in itertools.combinations(gens, 2):
        if not paulis_commute(a, b):
            raise NonCommutingGenerators(f"{a} and {b} anticommute")
    if len(gens) != n - 1:
        raise UnsupportedCodeDimension(f"{len(gens)} generators on {n} qubits do not encode exactly one qubit")
    p = stabilizer_projector(gens)
    rank = int(round(np.trace(p).real))
    if rank != 2 ** (n - len(gens)):
        raise DependentGenerators(f"projector rank {rank}, expected {2 ** (n - len(gens))}")
    lz = (logical_z or "Z" * n).upper()
    if not all(paulis_commute(lz, g) for g in gens):
        raise ValueError(f"logical Z {lz} does not commute with the stabilizer")
    w, v = np.linalg.eigh(p @ pauli_string(lz) @ p)
    if not (abs(w[-1] - 1) < 1e-10 and abs(w[0] + 1) < 1e-10):
        raise ValueError(f"{lz} acts trivially on the codespace; choose another logical Z")
    c0 = _fix_phase(v[:, -1])
    c1 = _fix_phase(v[:, 0])
    return Code(name, np.stack([c0, c1], axis=1), stabilizers=gens, correctable_paulis=correctable_paulis)


FIVE_QUBIT_GENERATORS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def five_qubit_code() -> Code:
    return stabilizer_code(FIVE_QUBIT_GENERATORS, logical_z="ZZZZZ", name="five_qubit")


def repetition_code() -> Code:
    """Three-qubit bit-flip code; only X errors are in its lookup table."""
    return stabilizer_code(("ZZI", "IZZ"), logical_z="ZZZ", name="rep3", correctable_paulis="X")


CODES = {
    "bare": bare_qubit,
    "four_qubit": four_qubit_code,
    "five_qubit": five_qubit_code,
    "rep3": repetition_code,
}


def code_by_name(name: str) -> Code:
    try:
        return CODES[name]()
    except KeyError:
        raise KeyError(f"unknown code {name!r}; choose from {sorted(CODES)}") from None


def _restricted_ops(code: Code, noise) -> np.ndarray:
    ops = noise.ops if hasattr(noise, "ops") else np.asarray([k for _, k in noise])
    if ops.shape[-1] != code.dim:
        raise DimensionMismatch(f"noise acts on dimension {ops.shape[-1]}, code on {code.dim}")
    return np.einsum("iab,bk->iak", ops, code.basis)


def kl_overlaps(code: Code, noise) -> tuple[np.ndarray, np.ndarray]:
    """Knill-Laflamme coefficients and their violations.

    ``alpha[i, j] = tr(P E_i^dagger E_j P) / tr P`` and ``residual[i, j]`` is the
    operator norm of ``P E_i^dagger E_j P - alpha[i, j] P``.
    """
    a = _restricted_ops(code, noise)
    g = np.einsum("iak,jal->ijkl", a.conj(), a)
    alpha = np.trace(g, axis1=2, axis2=3) / code.k_dim
    diff = g - alpha[:, :, None, None] * np.eye(code.k_dim)
    residual = np.linalg.norm(diff, ord=2, axis=(2, 3))
    return alpha, residual


def codeword_overlaps(code: Code, op) -> np.ndarray:
    """``<i_L| op^dagger op |i_L>`` for each codeword."""
    op = np.asarray(op, dtype=complex)
    v = op @ code.basis
    return np.real(np.einsum("ak,ak->k", v.conj(), v))
