import numpy as np
import pytest

from covqec import codes, recovery
from covqec.channels import (Channel, compose, depolarizing, erasure,
                             identity_channel, rotated_dephasing)


def test_optimal_recovery_identity_and_depolarized():
    _, eps_id = recovery.optimal_choi_recovery(identity_channel(2))
    assert eps_id < 1e-9
    _, eps_dep = recovery.optimal_choi_recovery(depolarizing(2, 1.0))
    assert eps_dep == pytest.approx(0.75, abs=1e-6)


def test_optimal_recovery_undoes_unitary():
    from covqec.channels import Hamiltonian, unitary_channel
    u = Hamiltonian(np.diag([1.0, -1.0])).unitary(0.9)
    rec, eps = recovery.optimal_choi_recovery(unitary_channel(u))
    assert eps < 1e-8
    eff = compose(rec, unitary_channel(u))
    assert recovery.choi_infidelity_to_identity(eff) < 1e-8


def test_choi_infidelity_of_dephasing():
    for p in (0.1, 0.4):
        ch = rotated_dephasing(p, 0.0)
        assert recovery.choi_infidelity_to_identity(ch) == pytest.approx(p, abs=1e-12)


def test_rotated_dephasing_detection():
    ch = rotated_dephasing(0.2, 0.5)
    params = recovery.rotated_dephasing_parameters(ch)
    assert params is not None
    p, phi = params
    assert p == pytest.approx(0.2, abs=1e-9)
    assert phi == pytest.approx(0.5, abs=1e-9)
    assert recovery.rotated_dephasing_parameters(depolarizing(2, 0.5)) is None


def test_worst_case_rotated_dephasing_closed_form():
    for p, phi in ((0.1, 0.0), (0.2, 0.7), (0.05, 2.0)):
        got = recovery.worst_case_infidelity(rotated_dephasing(p, phi))
        ref = (1.0 - (1.0 - 2.0 * p) * np.cos(phi)) / 2.0
        assert got == pytest.approx(ref, abs=1e-9)


def ball_oracle_worst_case(ch):
    """Exact worst-case entanglement infidelity of a qubit channel.

    The entanglement fidelity of the Schmidt input with reduced state rho is
    sum_k |tr(K_k rho)|^2, so the worst case is the minimum of a convex
    quadratic in the Bloch vector over the unit ball — solvable exactly.
    """
    paulis = [np.eye(2, dtype=complex),
              np.array([[0, 1], [1, 0]], dtype=complex),
              np.array([[0, -1j], [1j, 0]], dtype=complex),
              np.diag([1.0, -1.0]).astype(complex)]
    u = np.array([np.trace(k) / 2 for k in ch.kraus])
    v = np.array([[np.trace(k @ s) / 2 for s in paulis[1:]] for k in ch.kraus])
    a = np.real(v.conj().T @ v)
    b = np.real(v.conj().T @ u)
    const = float(np.sum(np.abs(u) ** 2))

    def fid(r):
        return const + 2 * b @ r + r @ a @ r

    r_free = -np.linalg.lstsq(a, b, rcond=None)[0]
    if np.linalg.norm(r_free) <= 1.0:
        return 1.0 - fid(r_free)
    # boundary solution: (a + lam I) r = -b with ||r|| = 1, lam >= 0
    lo, hi = 0.0, 1.0
    while np.linalg.norm(np.linalg.solve(a + hi * np.eye(3), -b)) > 1.0:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.linalg.norm(np.linalg.solve(a + mid * np.eye(3), -b)) > 1.0:
            lo = mid
        else:
            hi = mid
    r = np.linalg.solve(a + hi * np.eye(3), -b)
    return 1.0 - fid(r / max(np.linalg.norm(r), 1.0))


def test_worst_case_against_exact_oracle():
    rng = np.random.default_rng(11)
    for _ in range(5):
        g = rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2))
        iso, _ = np.linalg.qr(g)
        ch = Channel((iso[:2], iso[2:4], iso[4:]), 2, 2)
        descent = recovery.worst_case_infidelity(ch)
        exact = ball_oracle_worst_case(ch)
        assert descent == pytest.approx(exact, abs=1e-6)


def test_beny_oreshkov_matches_closed_form():
    tc = codes.thermo_code(9, 3)
    numeric = recovery.beny_oreshkov_infidelity(tc, recovery.depolarizing_site_kraus())
    closed = recovery.thermo_depolarizing_infidelity(9, 3)
    assert numeric == pytest.approx(closed, abs=1e-7)
    # the infidelity approaches 3 m^2 / (4 n^2) from below as n grows
    for n in (27, 81):
        val = recovery.thermo_depolarizing_infidelity(n, 3)
        assert val <= 27.0 / (4 * n * n) * 1.01


def test_estimate_validation():
    rec = identity_channel(2)
    with pytest.raises(ValueError):
        recovery.InfidelityEstimate(0.5, 0.1, 0.5, rec)  # lower above upper
    with pytest.raises(ValueError):
        recovery.InfidelityEstimate(-0.2, 0.1, 0.0, rec)
    est = recovery.InfidelityEstimate(0.1, 0.2, 0.1, rec)
    data = est.to_json()
    assert data["choi_infidelity"] == 0.1 and "recovery" in data


def test_measure_code_compressed_erasure():
    """Compressed pipeline: (5, 3) code under uniform single-site erasure."""
    tc = codes.thermo_code(5, 3)
    est = recovery.measure_code(tc, "erasure")
    p = tc.effective_erasure_rate()
    # dephasing rate is achievable, and the Choi optimum cannot beat it by
    # more than solver tolerance
    assert est.worst_upper <= p + 1e-6
    assert est.choi_infidelity <= est.worst_upper
    assert est.worst_lower == est.choi_infidelity


def test_measure_code_compressed_depolarizing():
    """Compressed pipeline: (5, 3) code under uniform single-site depolarizing.

    The Choi-optimal recovery must do at least as well as the near-optimal
    transpose-style recovery whose infidelity the correctability blocks give.
    """
    tc = codes.thermo_code(5, 3)
    est = recovery.measure_code(tc, "depolarizing")
    bo = recovery.thermo_depolarizing_infidelity(5, 3)
    assert est.choi_infidelity <= bo + 1e-8
    assert est.worst_lower <= est.worst_upper
    from covqec import bounds
    lower = bounds.ell1(3.0 * tc.m ** 2 / (8.0 * tc.n ** 2))
    assert lower <= est.worst_upper


def test_single_error_bound_below_measured_erasure():
    """Theorem chain on a measured instance: bound <= achieved infidelity."""
    from covqec import bounds
    from covqec.channels import Hamiltonian
    tc = codes.thermo_code(9, 3)
    lower = bounds.ell1(tc.m ** 2 / (4.0 * tc.n ** 2))
    assert lower <= tc.effective_erasure_rate()
