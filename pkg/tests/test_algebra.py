import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliproc.algebra import (
    HADAMARD,
    anticommutator,
    bell_ket,
    commutator,
    dagger,
    hwp_unitary,
    is_hermitian,
    is_normalized,
    is_psd,
    is_unitary,
    ket,
    pauli,
    projector,
    tensor,
)

I2 = pauli("I")
X = pauli("X")
Y = pauli("Y")
Z = pauli("Z")


def test_pauli_matrices_exact():
    assert np.array_equal(X, [[0, 1], [1, 0]])
    assert np.array_equal(Y, [[0, -1j], [1j, 0]])
    assert np.array_equal(Z, [[1, 0], [0, -1]])
    assert np.array_equal(I2, np.eye(2))


@pytest.mark.parametrize("label", "IXYZ")
def test_paulis_hermitian_unitary(label):
    m = pauli(label)
    assert is_hermitian(m, 1e-15)
    assert is_unitary(m, 1e-15)
    assert np.abs(m @ m - I2).max() < 1e-15  # involution


def test_pauli_rejects_unknown_label():
    with pytest.raises(ValueError, match="unknown Pauli"):
        pauli("Q")


def test_commutation_relations():
    # the three su(2) relations, entrywise exact
    assert np.abs(commutator(X, Y) - 2j * Z).max() < 1e-15
    assert np.abs(commutator(Y, Z) - 2j * X).max() < 1e-15
    assert np.abs(commutator(Z, X) - 2j * Y).max() < 1e-15


def test_anticommutation_relations():
    assert np.abs(anticommutator(X, Y)).max() < 1e-15
    assert np.abs(anticommutator(Y, Z)).max() < 1e-15
    assert np.abs(anticommutator(Z, X)).max() < 1e-15


def test_self_commutator_and_square():
    assert np.abs(commutator(Z, Z)).max() == 0
    assert np.abs(anticommutator(Z, Z) - 2 * I2).max() < 1e-15


def test_order_of_products_differs_by_sign_only():
    zx = Z @ X
    xz = X @ Z
    assert np.abs(zx - 1j * Y).max() < 1e-15
    assert np.abs(xz + 1j * Y).max() < 1e-15
    assert np.abs(zx + xz).max() < 1e-15


def test_commutator_with_xy_combination():
    # [Z, (X+Y)/sqrt2] = sqrt2 * i * (Y - X); norm gives K = 2
    u = (X + Y) / np.sqrt(2)
    c = commutator(Z, u)
    assert np.abs(c - np.sqrt(2) * 1j * (Y - X)).max() < 1e-14
    assert np.trace(dagger(c) @ c).real == pytest.approx(8.0, abs=1e-13)


def test_anticommutator_with_hadamard():
    h = (X + Z) / np.sqrt(2)
    assert np.abs(anticommutator(Z, h) - np.sqrt(2) * I2).max() < 1e-15


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        commutator(X, np.eye(4))
    with pytest.raises(ValueError):
        anticommutator(np.eye(4), X)


def test_bell_kets():
    assert np.allclose(bell_ket("psi-"), np.array([0, 1, -1, 0]) / np.sqrt(2), atol=1e-15)
    assert np.allclose(bell_ket("phi-"), np.array([1, 0, 0, -1]) / np.sqrt(2), atol=1e-15)
    assert abs(np.vdot(bell_ket("psi-"), bell_ket("phi-"))) == 0
    for label in ("phi+", "phi-", "psi+", "psi-"):
        assert is_normalized(bell_ket(label), 1e-15)
    with pytest.raises(ValueError):
        bell_ket("chi+")


def test_phi_minus_diagonal_basis_identity():
    # (|DA> + |AD>)/sqrt2 equals the H/V form (|HH> - |VV>)/sqrt2
    da_form = (tensor(ket("D"), ket("A")) + tensor(ket("A"), ket("D"))) / np.sqrt(2)
    assert np.abs(da_form - bell_ket("phi-")).max() < 1e-15


def test_psi_minus_diagonal_basis_identity():
    da_form = (tensor(ket("A"), ket("D")) - tensor(ket("D"), ket("A"))) / np.sqrt(2)
    assert np.abs(da_form - bell_ket("psi-")).max() < 1e-15


def test_tensor_identity():
    assert np.array_equal(tensor(I2, I2), np.eye(4))


def test_tensor_on_bell_states():
    phi_plus = bell_ket("phi+")
    assert np.abs(tensor(Z, I2) @ phi_plus - bell_ket("phi-")).max() < 1e-15
    # (Y x I)|phi+> = i(|VH> - |HV>)/sqrt2 = -i |psi->
    got = tensor(Y, I2) @ phi_plus
    expected = np.array([0, -1j, 1j, 0]) / np.sqrt(2)
    assert np.abs(got - expected).max() < 1e-15
    overlap = abs(np.vdot(bell_ket("psi-"), got))
    assert overlap == pytest.approx(1.0, abs=1e-15)


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(ValueError):
        tensor(ket("H"), I2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    assert np.abs(left - right).max() < 1e-14


def test_hwp_special_angles():
    assert np.abs(hwp_unitary(0.0) - Z).max() < 1e-15
    assert np.abs(hwp_unitary(45.0) - X).max() < 1e-15
    assert np.abs(hwp_unitary(22.5) - (X + Z) / np.sqrt(2)).max() < 1e-15
    assert np.abs(hwp_unitary(22.5) - HADAMARD).max() < 1e-15


def test_hwp_involution_and_structure():
    rng = np.random.default_rng(11)
    for alpha in rng.uniform(-360, 360, size=100):
        u = hwp_unitary(alpha)
        assert np.abs(u @ u - I2).max() < 1e-14
        assert is_hermitian(u, 1e-14)
        assert is_unitary(u, 1e-14)


def test_mutually_unbiased_probe_bases():
    bases = (("H", "V"), ("D", "A"), ("R", "L"))
    for bi, basis_a in enumerate(bases):
        for bj, basis_b in enumerate(bases):
            for la in basis_a:
                for lb in basis_b:
                    overlap = abs(np.vdot(ket(la), ket(lb))) ** 2
                    if bi == bj:
                        assert overlap == pytest.approx(1.0 if la == lb else 0.0, abs=1e-14)
                    else:
                        assert overlap == pytest.approx(0.5, abs=1e-14)


def test_projectors_per_basis_sum_to_identity():
    for pair in (("H", "V"), ("D", "A"), ("R", "L")):
        total = sum(projector(ket(lbl)) for lbl in pair)
        assert np.abs(total - I2).max() < 1e-14


def test_predicates_on_constructions():
    assert is_psd(projector(ket("R")), 1e-12)
    assert not is_psd(-projector(ket("R")), 1e-12)
    assert not is_unitary(projector(ket("H")))
    assert not is_hermitian(1j * X)
