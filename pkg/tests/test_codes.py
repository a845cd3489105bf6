import itertools

import numpy as np
import pytest

from covqec import codes, dicke, linalg
from covqec.channels import (Channel, Hamiltonian, choi_distance, compose,
                             identity_channel, unitary_channel)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def dense_expectation(n, wa, wb, ops):
    """Reference value <D_wa| prod_k ops[k] |D_wb> from dense Dicke vectors."""
    va = dicke.dense_dicke(n, wa)
    vb = dicke.dense_dicke(n, wb)
    mat = vb
    for site, op in ops.items():
        full = np.kron(np.kron(np.eye(2 ** site), op), np.eye(2 ** (n - site - 1)))
        mat = full @ mat if mat.ndim == 1 else full @ mat
    return np.vdot(va, mat)


SITE_OPS = {
    "z": codes.SIGMA_Z,
    "p": codes.SIGMA_PLUS,
    "m": codes.SIGMA_MINUS,
    "n": np.diag([1.0, 0.0]).astype(complex),
}


def test_compressed_overlaps_match_dense():
    tc = codes.thermo_code(6, 4)
    weights = (tc.weight(0), tc.weight(1))
    for a, b in itertools.product((0, 1), repeat=2):
        got = tc.overlap(a, b)
        ref = dense_expectation(6, weights[a], weights[b], {})
        assert got == pytest.approx(ref, abs=1e-12)
        for name, op in SITE_OPS.items():
            got = tc.overlap(a, b, {0: op})
            ref = dense_expectation(6, weights[a], weights[b], {0: op})
            assert got == pytest.approx(ref, abs=1e-12), (a, b, name)
        for n1, op1 in SITE_OPS.items():
            for n2, op2 in SITE_OPS.items():
                got = tc.overlap(a, b, {1: op1, 3: op2})
                ref = dense_expectation(6, weights[a], weights[b], {1: op1, 3: op2})
                assert got == pytest.approx(ref, abs=1e-12), (a, b, n1, n2)


def test_thermo_parameter_validation():
    with pytest.raises(ValueError):
        codes.thermo_code(10, 3)  # parity
    with pytest.raises(ValueError):
        codes.thermo_code(6, 2)  # magnetization too small
    with pytest.raises(ValueError):
        codes.thermo_code(5, 5)  # m must be below n


def test_dense_thermo_code_is_covariant():
    code = codes.thermo_code(9, 3, dense=True)
    assert code.d_l == 2 and code.d_s == 512
    # constructor validated V^dag V = I and the intertwining relation
    assert code.h_l.delta == pytest.approx(6.0)


def test_effective_erasure_channel_is_dephasing():
    tc = codes.thermo_code(5, 3)
    assert tc.effective_erasure_rate() == pytest.approx(0.1)
    ch = tc.effective_erasure_channel()
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = ch.apply(rho)
    assert out[0, 0] == pytest.approx(0.5)
    assert out[0, 1] == pytest.approx(0.5 * tc.offdiagonal_damping())


def test_dense_erasure_pipeline_matches_compressed():
    n, m = 5, 3
    tc = codes.thermo_code(n, m)
    code = codes.thermo_code_embedded(n, m)
    noise = codes.uniform_site_erasure(n)
    rec = codes.thermo_erasure_recovery(n, m)
    eff = codes.effective_logical_channel(code, noise, rec)
    assert choi_distance(eff, tc.effective_erasure_channel()) < 1e-10


def test_compressed_noise_recovery_chain():
    tc = codes.thermo_code(9, 3)
    noise = codes.thermo_erasure_noise(tc)
    rec = codes.thermo_erasure_syndrome_recovery(tc)
    eff = compose(rec, noise)
    assert choi_distance(eff, tc.effective_erasure_channel()) < 1e-12


def test_compressed_noise_is_covariant():
    tc = codes.thermo_code(9, 3)
    noise = codes.thermo_erasure_noise(tc)
    h_l, h_s = tc.h_l, tc.syndrome_hamiltonian()
    theta = 0.37
    a = compose(noise, unitary_channel(h_l.unitary(theta)))
    b = compose(unitary_channel(h_s.unitary(theta)), noise)
    assert np.max(np.abs(a.choi() - b.choi())) < 1e-12


def test_depolarizing_noise_is_tp_and_covariant():
    tc = codes.thermo_code(5, 3)
    noise, h_phys = codes.thermo_depolarizing_noise(tc)
    theta = 0.81
    a = compose(noise, unitary_channel(tc.h_l.unitary(theta)))
    b = compose(unitary_channel(h_phys.unitary(theta)), noise)
    assert np.max(np.abs(a.choi() - b.choi())) < 1e-10


def test_twirl_makes_recovery_covariant():
    tc = codes.thermo_code(5, 3)
    h_l, h_s = tc.h_l, tc.syndrome_hamiltonian()
    d = 4 * tc.n
    # a deliberately non-covariant recovery: dump everything onto |0>
    kraus = tuple(np.outer(np.array([1.0, 0.0]), np.eye(d)[i]) for i in range(d))
    rec = Channel(kraus, d, 2)
    tw = codes.twirl_recovery(rec, h_l, h_s)
    theta = 1.23
    a = compose(tw, unitary_channel(h_s.unitary(theta)))
    b = compose(unitary_channel(h_l.unitary(theta)), tw)
    assert np.max(np.abs(a.choi() - b.choi())) < 1e-10
    # idempotence
    tw2 = codes.twirl_recovery(tw, h_l, h_s)
    assert choi_distance(tw, tw2) < 1e-10


def test_twirl_rejects_incommensurate_spectrum():
    h_l = Hamiltonian(np.diag([1.0, -1.0]))
    h_s = Hamiltonian(np.diag([np.sqrt(2.0), -np.sqrt(2.0)]))
    with pytest.raises(ValueError, match="no common period"):
        codes.twirl_recovery(identity_channel(2), h_l, h_s)


def test_repetition_extension_and_recovery():
    h_l = Hamiltonian(np.diag([2.0, 1.0, -1.0]))
    base = codes.CovariantCode(np.eye(3, dtype=complex), h_l, h_l)
    ext = codes.repetition_extension(base)
    assert ext.d_l == 2 and ext.d_s == 6
    assert ext.h_l.delta == pytest.approx(h_l.delta)
    # the extremal eigenvectors of diag(2, 1, -1) are e0 and e2, so the
    # decoder's logical basis must list them first
    basis = np.eye(3, dtype=complex)[:, [0, 2, 1]]
    rec = codes.repetition_recovery(3, basis=basis)
    eff = codes.effective_logical_channel(ext, identity_channel(6), rec)
    assert choi_distance(eff, identity_channel(2)) < 1e-10


def test_covariant_code_rejects_bad_isometry():
    h = Hamiltonian(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        codes.CovariantCode(np.eye(2, dtype=complex) * 0.5, h, h)
    hx = Hamiltonian(SX)
    with pytest.raises(ValueError):
        codes.CovariantCode(np.eye(2, dtype=complex), h, hx)


def test_code_json_round_trip():
    tc = codes.thermo_code(9, 3)
    back = codes.code_from_json(tc.to_json())
    assert back == tc
    dense = codes.thermo_code(5, 3, dense=True)
    back_d = codes.code_from_json(dense.to_json())
    assert np.allclose(back_d.isometry, dense.isometry)
