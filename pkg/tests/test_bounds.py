import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covqec import bounds, codes
from covqec.channels import Hamiltonian, depolarizing, erasure

SZ = np.diag([1.0, -1.0]).astype(complex)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-6, max_value=0.49))
def test_ell1_round_trip(eps):
    assert bounds.ell1(bounds.forward_ell1(eps)) == pytest.approx(eps, abs=1e-12)


def test_ell1_monotone_and_small_x():
    assert bounds.ell1(0.0) == 0.0
    xs = np.linspace(0, 5, 100)
    vals = [bounds.ell1(x) for x in xs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert bounds.ell1(1e-8) == pytest.approx(1e-8, rel=1e-3)


def test_ell2_ell3_round_trip_and_order():
    h3 = Hamiltonian(np.diag([1.0, 0.0, -1.0]))
    coeff = 3.0 * 3 * h3.delta ** 2 / (2.0 * h3.trace_sq)
    for eps in (1e-5, 1e-3, 1e-2 / 8):
        x = bounds.forward_sqrt_map(eps, 6.0)
        assert bounds.ell2(x) == pytest.approx(eps, abs=1e-11)
        x3 = bounds.forward_sqrt_map(eps, coeff)
        assert bounds.ell3(x3, 3, h3.delta, h3.trace_sq) == pytest.approx(eps, abs=1e-11)
    for x in (1e-5, 1e-3, 5e-3):
        l3 = bounds.ell3(x, 3, h3.delta, h3.trace_sq)
        assert l3 <= bounds.ell2(x) + 1e-12 <= bounds.ell1(x) + 1e-12


def test_theorem1_erasure_example():
    report = bounds.theorem1_bound(erasure(2, 0.5), Hamiltonian(SZ), 2.0)
    assert report.argument_x == pytest.approx(0.25, rel=1e-8)
    assert report.epsilon_lower == pytest.approx(0.146447, abs=1e-6)
    data = report.to_json()
    assert data["theorem"] == "T1" and data["qfi_kind"] == "finite"


def test_theorem1_infinite_qfi_gives_no_bound():
    from covqec.channels import Channel
    deph = Channel((np.sqrt(0.7) * np.eye(2, dtype=complex), np.sqrt(0.3) * SZ), 2, 2)
    report = bounds.theorem1_bound(
        deph, Hamiltonian(np.array([[0, 1], [1, 0]], dtype=complex)), 2.0)
    assert report.epsilon_lower == 0.0
    assert "no-bound-condition-violated" in report.flags


def test_theorem2_bounds_qubit_depolarizing():
    h_l = Hamiltonian(SZ)
    worst, choi = bounds.theorem2_bounds(depolarizing(2, 0.4), Hamiltonian(SZ), h_l)
    assert 0 < worst.epsilon_lower < 0.5
    assert 0 < choi.epsilon_lower < 0.5
    # the worst-case infidelity dominates the Choi infidelity, so its lower
    # bound may be larger; both must stay below the trivial 1/2
    assert "assumed-noise-commutes-with-symmetry" in worst.flags


def test_single_error_closed_forms():
    site = Hamiltonian(SZ)
    errors = [(1.0 / 9, erasure(2, 1.0))] * 9
    report = bounds.single_error_bound(errors, [site] * 9, 6.0, flavor="erasure")
    assert report.argument_x == pytest.approx(9 / 324)
    report_d = bounds.single_error_bound(
        [(1.0 / 9, depolarizing(2, 1.0))] * 9, [site] * 9, 6.0,
        flavor="depolarizing-qubit")
    assert report_d.argument_x == pytest.approx(3 * 9 / (2 * 324))


def test_single_error_generic_matches_erasure():
    site = Hamiltonian(SZ)
    errors = [(1.0 / 3, erasure(2, 1.0))] * 3
    closed = bounds.single_error_bound(errors, [site] * 3, 2.0, flavor="erasure")
    generic = bounds.single_error_bound(errors, [site] * 3, 2.0, flavor="generic")
    assert generic.argument_x == pytest.approx(closed.argument_x, rel=1e-2)


def test_single_error_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        bounds.single_error_bound([(0.4, erasure(2, 1.0))], [Hamiltonian(SZ)], 2.0,
                                  flavor="erasure")


def test_multi_erasure_closed_form():
    parts = bounds.t_erasure_partition(4, 1, codes.SIGMA_Z)
    assert bounds.multi_error_qfi_upper(parts) == pytest.approx(64.0, rel=1e-6)


def test_eastin_knill_bound():
    report = bounds.eastin_knill_bound(4, [2, 2, 2, 2], 2)
    assert 0 < report.epsilon_lower < 0.5
    assert report.inputs["approx_epsilon"] > 0
    with pytest.raises(ValueError):
        bounds.eastin_knill_bound(2, [2, 1], 2)
