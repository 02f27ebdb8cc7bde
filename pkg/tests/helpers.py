"""Shared random constructions for the test suite."""

import numpy as np

from nmqec.channel import SignedKrausMap


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_psd(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return a @ a.conj().T


def random_cptp(rng, dim, n_ops=3):
    """Kraus operators from the blocks of a random isometry."""
    a = rng.normal(size=(n_ops * dim, dim)) + 1j * rng.normal(size=(n_ops * dim, dim))
    q, _ = np.linalg.qr(a)
    return SignedKrausMap(q.reshape(n_ops, dim, dim))


def logical_amplitudes(rng):
    return random_state(rng, 2)


def signed_bitflip_instance(rng, negative=False):
    """Signed noise on the 3-qubit repetition code with an exactly correctable part.

    Correctable: ``sqrt(a) I`` and ``sqrt(b_q) X_q``. Uncorrectable: random
    combinations of ``X1X2, X1X3, X2X3, X1X2X3``; their products never
    compress to a nonzero codespace operator except on the diagonal, so
    ``P F^dagger F P`` is proportional to ``P`` and the map is trace
    preserving on the codespace. With ``negative`` one uncorrectable term
    carries a minus sign.
    """
    from nmqec.codes import pauli_string

    b = rng.uniform(0.01, 0.08, size=3)
    paulis = [pauli_string(s) for s in ("XXI", "XIX", "IXX", "XXX")]
    unc, unc_signs, weight = [], [], 0.0
    for j in range(2):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        c *= rng.uniform(0.05, 0.25) / np.linalg.norm(c)
        unc.append(sum(ci * p for ci, p in zip(c, paulis)))
        s = -1 if (negative and j == 0) else 1
        unc_signs.append(s)
        weight += s * float(np.sum(np.abs(c) ** 2))
    a = 1.0 - float(np.sum(b)) - weight
    corr = [np.sqrt(a) * np.eye(8)] + [np.sqrt(bq) * pauli_string(s) for bq, s in zip(b, ("XII", "IXI", "IIX"))]
    correctable = SignedKrausMap(np.array(corr), check_tp=False)
    uncorrectable = SignedKrausMap(np.array(unc), unc_signs, check_tp=False)
    full = SignedKrausMap(np.array(corr + unc), [1] * 4 + unc_signs, check_tp=False)
    return correctable, uncorrectable, full
