import numpy as np
import pytest

from nmqec.codes import (
    basis_state,
    bare_qubit,
    code_by_name,
    codeword_overlaps,
    five_qubit_code,
    four_qubit_code,
    kl_overlaps,
    pauli_string,
    paulis_commute,
    repetition_code,
    stabilizer_code,
)
from nmqec.errors import DependentGenerators, NonCommutingGenerators, NotNormalized, UnsupportedCodeDimension
from nmqec.noise import ad_kraus, ad_noise


def zero_error_poly(g):
    return 1 - 5 * g / 2 + 5 * g**2 / 2 - 5 * g**3 / 4 + 5 * g**4 / 16


def test_pauli_string_ordering():
    # leftmost letter acts on the most significant qubit
    np.testing.assert_allclose(pauli_string("XI") @ basis_state("00"), basis_state("10"))
    np.testing.assert_allclose(pauli_string("IX") @ basis_state("00"), basis_state("01"))
    assert paulis_commute("XX", "ZZ") and not paulis_commute("XI", "ZI")


@pytest.mark.parametrize("factory", [bare_qubit, four_qubit_code, five_qubit_code, repetition_code])
def test_codewords_orthonormal(factory):
    c = factory()
    np.testing.assert_allclose(c.basis.conj().T @ c.basis, np.eye(2), atol=1e-12)
    p = c.projector
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.trace(p).real == pytest.approx(2.0)


def test_four_qubit_codewords():
    c = four_qubit_code()
    assert c.n_phys == 4 and c.dim == 16
    np.testing.assert_allclose(c.codewords[0], (basis_state("0000") + basis_state("1111")) / np.sqrt(2))
    np.testing.assert_allclose(c.codewords[1], (basis_state("0011") + basis_state("1100")) / np.sqrt(2))


def test_five_qubit_stabilized_and_logicals():
    c = five_qubit_code()
    for g in c.stabilizers:
        np.testing.assert_allclose(pauli_string(g) @ c.basis, c.basis, atol=1e-12)
    z = pauli_string("ZZZZZ")
    np.testing.assert_allclose(z @ c.codewords[0], c.codewords[0], atol=1e-12)
    np.testing.assert_allclose(z @ c.codewords[1], -c.codewords[1], atol=1e-12)
    np.testing.assert_allclose(c.logical["X"] @ c.codewords[0], c.codewords[1], atol=1e-12)


def test_code_errors():
    with pytest.raises(NonCommutingGenerators):
        stabilizer_code(["XI", "ZI"][:1] + ["ZI"], logical_z="ZZ")
    with pytest.raises(DependentGenerators):
        stabilizer_code(["ZZI", "ZZI"])
    with pytest.raises(UnsupportedCodeDimension):
        stabilizer_code(["ZZI"])
    with pytest.raises(NotNormalized):
        five_qubit_code().encode([1.0, 1.0])
    with pytest.raises(KeyError):
        code_by_name("steane")


def test_five_qubit_kl_overlaps_polynomials():
    c = five_qubit_code()
    for g in np.linspace(0, 1, 11):
        e0 = ad_noise(g, 5).ops[0]
        o = codeword_overlaps(c, e0)
        assert o[0] == pytest.approx(zero_error_poly(g), abs=1e-10)
        assert o[1] == pytest.approx(zero_error_poly(g) - g**5 / 16, abs=1e-10)


def test_four_qubit_kl_fails_for_ad():
    alpha, resid = kl_overlaps(four_qubit_code(), ad_noise(0.3, 4))
    assert np.max(resid) > 1e-3
    np.testing.assert_allclose(np.trace(alpha).real, 1.0, atol=1e-12)


def test_bare_kl_for_identity():
    alpha, resid = kl_overlaps(bare_qubit(), ad_kraus(0.0))
    assert np.max(resid) < 1e-14 and alpha[0, 0] == pytest.approx(1.0)
