import numpy as np
import pytest

from covqec import linalg
from covqec.channels import (Channel, Hamiltonian, apply_choi, choi_distance,
                             compose, depolarizing, erasure, identity_channel,
                             kraus_from_choi, reduce_kraus, rotated_dephasing,
                             tensor, unitary_channel)


def random_channel(rng, d_in, d_out, rank):
    g = rng.normal(size=(rank * d_out, d_in)) + 1j * rng.normal(size=(rank * d_out, d_in))
    iso, _ = np.linalg.qr(g)
    return Channel(tuple(iso[i * d_out:(i + 1) * d_out, :] for i in range(rank)),
                   d_in, d_out)


def random_state(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def test_non_tp_kraus_rejected():
    with pytest.raises(ValueError):
        Channel((0.5 * np.eye(2, dtype=complex),), 2, 2)


def test_choi_matches_apply():
    rng = np.random.default_rng(3)
    ch = random_channel(rng, 3, 4, 2)
    rho = random_state(rng, 3)
    direct = ch.apply(rho)
    via_choi = apply_choi(ch.choi(), rho, 3, 4)
    assert np.allclose(direct, via_choi)
    assert np.trace(ch.choi()) == pytest.approx(3.0)


def test_depolarizing_action():
    rng = np.random.default_rng(4)
    for d in (2, 3):
        rho = random_state(rng, d)
        out = depolarizing(d, 0.3).apply(rho)
        assert np.allclose(out, 0.7 * rho + 0.3 * np.eye(d) / d)


def test_erasure_action():
    rng = np.random.default_rng(5)
    rho = random_state(rng, 2)
    out = erasure(2, 0.25).apply(rho)
    assert np.allclose(out[:2, :2], 0.75 * rho)
    assert out[2, 2] == pytest.approx(0.25)


def test_rotated_dephasing_action():
    ch = rotated_dephasing(0.2, 0.0)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = ch.apply(rho)
    assert out[0, 1] == pytest.approx(0.5 * (1 - 2 * 0.2))


def test_compose_and_tensor_choi():
    rng = np.random.default_rng(6)
    a = random_channel(rng, 2, 2, 2)
    b = random_channel(rng, 2, 2, 2)
    rho = random_state(rng, 2)
    assert np.allclose(compose(a, b).apply(rho), a.apply(b.apply(rho)))
    rho2 = random_state(rng, 4)
    got = tensor(a, b).apply(rho2)
    # tensor channel applied to a product state factorizes
    prod = np.kron(random_state(rng, 2), random_state(rng, 2))
    assert np.allclose(tensor(a, b).apply(prod),
                       np.kron(a.apply(prod.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)),
                               b.apply(prod.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2))))
    assert got.shape == (4, 4)


def test_kraus_from_choi_round_trip():
    rng = np.random.default_rng(7)
    ch = random_channel(rng, 2, 3, 3)
    back = kraus_from_choi(ch.choi(), 2, 3)
    assert choi_distance(ch, back) < 1e-10


def test_reduce_kraus():
    ch = rotated_dephasing(0.3, 0.4)
    many = Channel(tuple(k / np.sqrt(5) for k in ch.kraus * 5), 2, 2)
    red = reduce_kraus(many)
    assert len(red.kraus) <= 4
    assert choi_distance(many, red) < 1e-10


def test_unitary_and_identity():
    rng = np.random.default_rng(8)
    h = Hamiltonian(np.diag([1.0, -1.0]))
    u = h.unitary(0.7)
    rho = random_state(rng, 2)
    out = compose(unitary_channel(u), identity_channel(2)).apply(rho)
    assert np.allclose(out, u @ rho @ linalg.dagger(u))


def test_hamiltonian_normalization():
    h = Hamiltonian(np.diag([3.0, 1.0]))
    assert np.trace(h.matrix) == pytest.approx(0.0)
    assert h.delta == pytest.approx(2.0)
    assert h.trace_sq == pytest.approx(2.0)
    assert h.opnorm == pytest.approx(1.0)


def test_json_round_trips():
    ch = erasure(2, 0.3)
    back = Channel.from_json(ch.to_json())
    assert choi_distance(ch, back) < 1e-12
    h = Hamiltonian(np.array([[1.0, 1.0j], [-1.0j, -1.0]]))
    back_h = Hamiltonian.from_json(h.to_json())
    assert np.allclose(h.matrix, back_h.matrix)
