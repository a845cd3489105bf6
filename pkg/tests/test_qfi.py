import numpy as np
import pytest

from covqec import qfi
from covqec.channels import (Channel, Hamiltonian, depolarizing, erasure,
                             identity_channel)

SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def dephasing(p):
    return Channel((np.sqrt(1 - p) * np.eye(2, dtype=complex), np.sqrt(p) * SZ), 2, 2)


def test_sld_qfi_pure_state():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    rho = np.outer(plus, plus).astype(complex)
    drho = -1j * (SZ @ rho - rho @ SZ)
    # pure-state QFI is four times the Hamiltonian variance
    assert qfi.sld_qfi_state(rho, drho) == pytest.approx(4.0)


def test_rld_qfi_state_support():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    rho = np.outer(plus, plus).astype(complex)
    assert not qfi.rld_qfi_state(rho, Hamiltonian(SZ)).is_finite
    mixed = 0.9 * rho + 0.1 * np.eye(2) / 2
    value = qfi.rld_qfi_state(mixed, Hamiltonian(SZ))
    assert value.is_finite and value.value > 0


def test_hks_named_cases():
    assert qfi.hks_check(erasure(2, 0.3), Hamiltonian(SZ))[0]
    assert qfi.hks_check(depolarizing(2, 0.3), Hamiltonian(SX))[0]
    assert not qfi.hks_check(dephasing(0.3), Hamiltonian(SX))[0]
    assert not qfi.hks_check(identity_channel(2), Hamiltonian(SZ))[0]


def test_sld_closed_forms():
    p = 0.3
    h = Hamiltonian(SZ)
    assert qfi.sld_qfi_channel_regularized(erasure(2, p), h).value == pytest.approx(
        4 * (1 - p) / p, rel=1e-6)
    assert qfi.sld_qfi_channel_regularized(depolarizing(2, p), h).value == pytest.approx(
        8 * (1 - p) ** 2 / (p * (3 - 2 * p)), rel=1e-6)


def test_sld_infinite_has_certificate():
    value = qfi.sld_qfi_channel_regularized(dephasing(0.3), Hamiltonian(SX))
    assert not value.is_finite
    assert np.linalg.norm(value.certificate) > 1e-8
    assert value.to_json()["kind"] == "infinite"


def test_rld_depolarizing_closed_form():
    value = qfi.rld_qfi_channel(depolarizing(2, 0.5), Hamiltonian(SZ))
    assert value.value == pytest.approx(2.4, rel=1e-9)


def test_rld_at_least_sld():
    for p in (0.2, 0.6):
        ch = depolarizing(2, p)
        h = Hamiltonian(SZ)
        rld = qfi.rld_qfi_channel(ch, h).value
        sld = qfi.sld_qfi_channel_regularized(ch, h).value
        assert rld >= sld - 1e-8


def test_rld_infinite_on_identity():
    assert not qfi.rld_qfi_channel(identity_channel(2), Hamiltonian(SZ)).is_finite


def test_depolarizing_envelope():
    h = Hamiltonian(SZ)
    for p in (0.25, 0.75):
        value = qfi.sld_qfi_channel_regularized(depolarizing(2, p), h).value
        assert value <= qfi.sld_upper_bound_depolarizing(2, p, h.delta) + 1e-6


def test_min_weighted_kraus_norm_dephasing_family():
    # Kraus {I, Z}/sqrt(2) with target Z: the constraint pins Re h_01 = 1 and
    # h_00 = -h_11; the minimum-norm choice h = X gives objective 1
    kraus = [np.eye(2, dtype=complex) / np.sqrt(2), SZ / np.sqrt(2)]
    sol = qfi.min_weighted_kraus_norm(kraus, SZ, 1.0)
    assert sol.objective == pytest.approx(1.0, rel=1e-6)
    assert sol.primal_residual < 1e-9


def test_generic_family_matches_channel_path():
    from covqec.channels import hamiltonian_channel_family
    ch = erasure(2, 0.4)
    h = Hamiltonian(SZ)
    fam = hamiltonian_channel_family(ch, h)
    a = qfi.sld_qfi_generic_family(fam).value
    b = qfi.sld_qfi_channel_regularized(ch, h).value
    assert a == pytest.approx(b, rel=1e-8)
