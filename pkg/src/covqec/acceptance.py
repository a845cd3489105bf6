"""End-to-end verification suite.

Each criterion is a pure function returning a :class:`CriterionResult`; the
CLI ``verify`` command and the test suite both run this registry.  Expensive
shared computations (the big recovery SDPs) are cached per process.
"""

from __future__ import annotations

import gc
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import bounds, codes, linalg, qfi, recovery
from .channels import (Channel, Hamiltonian, compose, depolarizing, erasure,
                       identity_channel, kraus_from_choi, rotated_dephasing,
                       tensor, unitary_channel)

DEFAULT_SEED = 0xC0DEC0DE


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    tags: tuple[str, ...]
    passed: bool
    measured: str
    expected: str
    tolerance: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{self.number:2d}] {status} {self.name}: measured {self.measured}, "
                f"expected {self.expected} (tol {self.tolerance})")


def _sz_like(d: int) -> Hamiltonian:
    m = np.zeros((d, d), dtype=complex)
    m[0, 0], m[1, 1] = 1.0, -1.0
    return Hamiltonian(m)


# ---------------------------------------------------------------- shared caches

@lru_cache(maxsize=None)
def _erasure_estimate():
    return recovery.measure_code(codes.thermo_code(9, 3), "erasure")


@lru_cache(maxsize=None)
def _erasure_optimal_recovery():
    tc = codes.thermo_code(9, 3)
    m_tilde = codes.thermo_erasure_noise(tc)
    rec, eps = recovery.optimal_choi_recovery(m_tilde)
    return m_tilde, rec, eps


# ---------------------------------------------------------------- criteria

def criterion_1():
    """Erasure channel SLD QFI against its closed form."""
    h = _sz_like(2)
    worst = 0.0
    for p in (0.1, 0.3, 0.5, 0.9):
        value = qfi.sld_qfi_channel_regularized(erasure(2, p), h).value
        ref = 4.0 * (1 - p) / p
        worst = max(worst, abs(value - ref) / ref)
    return CriterionResult(1, "erasure-qfi-closed-form", ("qfi", "erasure"),
                           worst <= 1e-5, f"max rel err {worst:.2e}",
                           "4(1-p)/p on p grid", "1e-5 relative")


def criterion_2():
    """Qubit depolarizing SLD QFI against its closed form."""
    h = _sz_like(2)
    worst = 0.0
    for p in (0.1, 0.3, 0.5, 0.9):
        value = qfi.sld_qfi_channel_regularized(depolarizing(2, p), h).value
        ref = 8.0 * (1 - p) ** 2 / (p * (3 - 2 * p))
        worst = max(worst, abs(value - ref) / ref)
    return CriterionResult(2, "qubit-depolarizing-qfi-closed-form",
                           ("qfi", "depolarizing"), worst <= 1e-5,
                           f"max rel err {worst:.2e}",
                           "8(1-p)^2/(p(3-2p)) on p grid", "1e-5 relative")


def criterion_3():
    """Higher-dimensional depolarizing QFI below both analytic envelopes."""
    ok = True
    detail = []
    for d in (3, 4, 5):
        h = _sz_like(d)
        for p in (0.2, 0.5):
            value = qfi.sld_qfi_channel_regularized(depolarizing(d, p), h).value
            cap1 = qfi.sld_upper_bound_depolarizing(d, p, h.delta)
            cap2 = h.delta ** 2 * (1 - p) / p
            ok = ok and value <= cap1 + 1e-6 and value <= cap2 + 1e-6
            detail.append(value - cap1)
    return CriterionResult(3, "general-depolarizing-qfi-envelopes",
                           ("qfi", "depolarizing"), ok,
                           f"max excess {max(detail):.2e}",
                           "F <= both closed-form envelopes", "1e-6 absolute")


def _random_rank2_channel(rng) -> Channel:
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    iso, _ = np.linalg.qr(g)
    return Channel((iso[:2, :], iso[2:, :]), 2, 2)


def _random_hamiltonian(rng, d: int) -> Hamiltonian:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Hamiltonian((g + g.conj().T) / 2)


def criterion_4():
    """Additivity of the regularized channel QFI over tensor products."""
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    done = 0
    while done < 20:
        ch_a, ch_b = _random_rank2_channel(rng), _random_rank2_channel(rng)
        h_a, h_b = _random_hamiltonian(rng, 2), _random_hamiltonian(rng, 2)
        if not (qfi.hks_check(ch_a, h_a)[0] and qfi.hks_check(ch_b, h_b)[0]):
            continue
        f_a = qfi.sld_qfi_channel_regularized(ch_a, h_a).value
        f_b = qfi.sld_qfi_channel_regularized(ch_b, h_b).value
        h_ab = Hamiltonian(np.kron(h_a.matrix, np.eye(2)) +
                           np.kron(np.eye(2), h_b.matrix))
        f_ab = qfi.sld_qfi_channel_regularized(tensor(ch_a, ch_b), h_ab).value
        worst = max(worst, abs(f_ab - f_a - f_b) / (1 + f_a + f_b))
        done += 1
    return CriterionResult(4, "qfi-additivity", ("qfi",), worst <= 1e-4,
                           f"max scaled defect {worst:.2e}",
                           "F(N (x) M) = F(N) + F(M), 20 pairs",
                           "1e-4 of 1 + F(N) + F(M)")


def _rld_depolarizing_reference(d: int, p: float, h: Hamiltonian) -> float:
    return ((1 - p) ** 2 / (4 * (1 - (d * d - 1) / (d * d) * p)) * h.delta ** 2
            + d * (1 - p) ** 2 / p * h.trace_sq)


def criterion_5():
    """RLD QFI of depolarizing channels: closed form and RLD >= SLD."""
    ok = True
    worst = 0.0
    for d in (2, 3):
        h = _sz_like(d)
        for p in (0.3, 0.5):
            ch = depolarizing(d, p)
            value = qfi.rld_qfi_channel(ch, h).value
            ref = _rld_depolarizing_reference(d, p, h)
            worst = max(worst, abs(value - ref) / ref)
            sld = qfi.sld_qfi_channel_regularized(ch, h).value
            ok = ok and value >= sld - 1e-8
    ok = ok and worst <= 1e-6
    return CriterionResult(5, "rld-depolarizing-closed-form", ("qfi", "rld"),
                           ok, f"max rel err {worst:.2e}",
                           "closed form; RLD >= regularized SLD", "1e-6 relative")


def criterion_6():
    """Thermodynamic code under erasure saturates the dephasing rate."""
    tc = codes.thermo_code(9, 3)
    p = tc.effective_erasure_rate()
    dist = np.max(np.abs(tc.effective_erasure_channel().choi()
                         - rotated_dephasing(p, 0.0).choi()))
    est = _erasure_estimate()
    lower = bounds.ell1(tc.m ** 2 / (4.0 * tc.n ** 2))
    tc25 = codes.thermo_code(25, 3)
    ratio = tc25.effective_erasure_rate() / bounds.ell1(9 / (4.0 * 25 ** 2))
    ok = (dist <= 1e-10 and est.choi_infidelity <= p + 1e-8
          and lower <= est.choi_infidelity and 1.0 <= ratio <= 1.05)
    return CriterionResult(6, "thermo-erasure-saturation", ("codes", "erasure"),
                           ok,
                           f"eps_choi {est.choi_infidelity:.8f}, ratio(25,3) {ratio:.4f}",
                           f"<= p = {p:.8f}, >= l1 = {lower:.8f}, ratio in [1, 1.05]",
                           "1e-10 channel / 1e-8 SDP")


def criterion_7():
    """Correctability blocks: numeric vs closed form, and the asymptote."""
    tc = codes.thermo_code(9, 3)
    sk = recovery.depolarizing_site_kraus()
    n, r = tc.n, len(sk)
    m0 = np.zeros((r * n, r * n), dtype=complex)
    m1 = np.zeros_like(m0)
    for target, mat in ((0, m0), (1, m1)):
        for i in range(r):
            for j in range(r):
                same = tc.overlap(target, target,
                                  {0: linalg.dagger(sk[i]) @ sk[j]}) / n
                diff = tc.overlap(target, target,
                                  {0: linalg.dagger(sk[i]), 1: sk[j]}) / n
                block = np.full((n, n), diff, dtype=complex)
                np.fill_diagonal(block, same)
                mat[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
    a_cf, b_cf = recovery.thermo_depolarizing_blocks(9, 3)
    block_err = max(np.abs((m0 + m1) / 2 - a_cf).max(),
                    np.abs((m0 - m1) / 2 - b_cf).max())
    windows = {27: 0.20, 81: 0.10, 243: 0.04}
    ratios = {nn: recovery.thermo_depolarizing_infidelity(nn, 3) / (27.0 / (4 * nn * nn))
              for nn in windows}
    ok = block_err <= 1e-12 and all(abs(ratios[nn] - 1) <= w
                                    for nn, w in windows.items())
    return CriterionResult(7, "thermo-depolarizing-blocks", ("codes", "depolarizing"),
                           ok,
                           f"block err {block_err:.1e}, ratios "
                           + ", ".join(f"n={k}: {v:.4f}" for k, v in ratios.items()),
                           "blocks exact; ratio->1 within 20/10/4%", "1e-12 / windows")


def criterion_8():
    """Lower-bound chain for depolarizing noise and the factor-2 gap.

    The measured upper estimate is the full recovery-SDP sandwich at
    (n, m) = (9, 3); the optimal recovery must also beat the achievable
    infidelity assembled from the correctability blocks (criterion 7 checks
    those blocks against their closed forms independently).
    """
    tc = codes.thermo_code(9, 3)
    est = recovery.measure_code(tc, "depolarizing")
    achievable = recovery.beny_oreshkov_infidelity(tc,
                                                   recovery.depolarizing_site_kraus())
    lower = bounds.ell1(3.0 * 9 / (8.0 * 81))
    ratio = (recovery.thermo_depolarizing_infidelity(243, 3)
             / bounds.ell1(3.0 * 9 / (8.0 * 243 ** 2)))
    ok = (lower <= est.worst_upper + 1e-12
          and est.choi_infidelity <= achievable + 1e-8
          and abs(ratio - 2.0) <= 0.5)
    return CriterionResult(8, "depolarizing-bound-chain", ("bounds", "depolarizing"),
                           ok,
                           f"l1 {lower:.5f} vs upper {est.worst_upper:.5f} "
                           f"(achievable {achievable:.5f}); ratio(243) {ratio:.4f}",
                           "l1(3m^2/8n^2) <= measured upper; ratio -> 2",
                           "25% of 2")


def criterion_9():
    """Recovery SDP sanity on the identity and the fully depolarized qubit."""
    _, eps_id = recovery.optimal_choi_recovery(identity_channel(2))
    _, eps_dep = recovery.optimal_choi_recovery(depolarizing(2, 1.0))
    ok = eps_id <= 1e-9 and abs(eps_dep - 0.75) <= 1e-6
    return CriterionResult(9, "choi-recovery-sdp-sanity", ("recovery", "sdp"), ok,
                           f"identity {eps_id:.2e}, full depol {eps_dep:.8f}",
                           "0 and 3/4", "1e-9 / 1e-6")


def criterion_10():
    """Twirling the optimal recovery: covariant, same Choi infidelity."""
    tc = codes.thermo_code(9, 3)
    m_tilde, rec, eps = _erasure_optimal_recovery()
    h_l, h_s = tc.h_l, tc.syndrome_hamiltonian()
    tw = codes.twirl_recovery(rec, h_l, h_s)
    rng = np.random.default_rng(DEFAULT_SEED)
    resid = 0.0
    for theta in rng.uniform(0, 2 * math.pi, 10):
        a = compose(tw, unitary_channel(h_s.unitary(theta)))
        b = compose(unitary_channel(h_l.unitary(theta)), tw)
        resid = max(resid, float(np.max(np.abs(a.choi() - b.choi()))))
    eps_tw = recovery.choi_infidelity_to_identity(compose(tw, m_tilde))
    ok = resid <= 1e-8 and abs(eps_tw - eps) <= 1e-6
    return CriterionResult(10, "twirl-preserves-choi-fidelity", ("recovery", "twirl"),
                           ok, f"cov resid {resid:.2e}, d(eps) {abs(eps_tw - eps):.2e}",
                           "covariant and fidelity-preserving", "1e-8 / 1e-6")


def criterion_11():
    """RLD state-QFI bound for near-coherent qubit states."""
    rng = np.random.default_rng(DEFAULT_SEED)
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    proj = np.outer(plus, plus)
    h = Hamiltonian(np.diag([1.0, -1.0]))
    violations = 0
    for _ in range(200):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho0 = g @ g.conj().T
        rho0 /= np.trace(rho0).real
        gap = 1.0 - float(np.real(np.trace(proj @ rho0)))
        eps = 10 ** rng.uniform(-4, -2)
        lam = eps / gap
        if lam > 1:
            lam, eps = 1.0, gap
        rho = (1 - lam) * proj + lam * rho0
        value = qfi.rld_qfi_state(rho, h)
        if not value.is_finite:
            continue
        floor = (1.0 - 6.0 * math.sqrt(2 * eps)) * (1 - 3 * eps + eps ** 2) / eps
        if value.value < floor - 1e-9 * abs(floor):
            violations += 1
    return CriterionResult(11, "rld-state-bound-near-plus", ("qfi", "rld"),
                           violations == 0, f"{violations} violations / 200",
                           "0 violations", "1e-9 relative slack")


def criterion_12():
    """Bound-shaping function round trips and ordering."""
    eps_grid = np.linspace(1e-6, 0.49, 1000)
    err1 = max(abs(bounds.ell1(bounds.forward_ell1(e)) - e) for e in eps_grid)
    eps2 = np.linspace(1e-6, 1 / 72 - 1e-6, 1000)
    err2 = max(abs(bounds.ell2(bounds.forward_sqrt_map(e, 6.0)) - e) for e in eps2)
    h3 = Hamiltonian(np.diag([1.0, 0.0, -1.0]))
    coeff3 = 3.0 * 3 * h3.delta ** 2 / (2.0 * h3.trace_sq)
    eps3 = np.linspace(1e-6, 1 / (2 * coeff3 ** 2) - 1e-6, 1000)
    err3 = max(abs(bounds.ell3(bounds.forward_sqrt_map(e, coeff3), 3, h3.delta,
                               h3.trace_sq) - e) for e in eps3)
    x_grid = np.linspace(1e-6, 0.01, 1000)
    ordered = all(bounds.ell3(x, 3, h3.delta, h3.trace_sq)
                  <= bounds.ell2(x) + 1e-12
                  and bounds.ell2(x) <= bounds.ell1(x) + 1e-12 for x in x_grid)
    worst = max(err1, err2, err3)
    return CriterionResult(12, "ell-function-round-trips", ("bounds",),
                           worst <= 1e-10 and ordered,
                           f"max round-trip err {worst:.2e}, ordered {ordered}",
                           "round trips exact, l3 <= l2 <= l1", "1e-10")


def criterion_13():
    """Multi-erasure QFI envelope equals its closed form."""
    worst = 0.0
    for t in (1, 2):
        parts = bounds.t_erasure_partition(4, t, codes.SIGMA_Z)
        value = bounds.multi_error_qfi_upper(parts)
        worst = max(worst, abs(value - 64.0) / 64.0)
    return CriterionResult(13, "multi-erasure-closed-form", ("bounds", "erasure"),
                           worst <= 1e-4, f"max rel err {worst:.2e}",
                           "(dH)^2 n^2 = 64 for t = 1, 2", "1e-4 relative")


def criterion_14():
    """Finite/infinite classifier agrees with the span conditions."""
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    dephase = Channel((math.sqrt(0.7) * np.eye(2, dtype=complex),
                       math.sqrt(0.3) * np.diag([1.0, -1.0]).astype(complex)), 2, 2)
    ok = not qfi.sld_qfi_channel_regularized(dephase, Hamiltonian(sx)).is_finite
    ok = ok and qfi.sld_qfi_channel_regularized(erasure(2, 0.4), Hamiltonian(sx)).is_finite
    ok = ok and qfi.sld_qfi_channel_regularized(depolarizing(2, 0.4), Hamiltonian(sx)).is_finite
    ok = ok and not qfi.rld_condition_check(identity_channel(2), _sz_like(2))[0]
    rng = np.random.default_rng(DEFAULT_SEED)
    agree = 0
    for trial in range(100):
        if trial % 2 == 0:
            ch = _random_rank2_channel(rng)
        else:
            p = rng.uniform(0.1, 0.9)
            ch = Channel((math.sqrt(1 - p) * np.eye(2, dtype=complex),
                          math.sqrt(p) * np.diag([1.0, -1.0]).astype(complex)), 2, 2)
        h = _random_hamiltonian(rng, 2)
        claim = qfi.hks_check(ch, h)[0]
        value = qfi.sld_qfi_channel_regularized(ch, h)
        agree += int(claim == value.is_finite)
    ok = ok and agree == 100
    return CriterionResult(14, "hks-classifier-agreement", ("qfi",), ok,
                           f"{agree}/100 randomized agreements",
                           "named cases plus 100/100", "exact")


# (function, name, tags) — tags duplicated here so filtering can happen
# before any expensive computation runs.
CRITERIA = [
    (criterion_1, "erasure-qfi-closed-form", ("qfi", "erasure")),
    (criterion_2, "qubit-depolarizing-qfi-closed-form", ("qfi", "depolarizing")),
    (criterion_3, "general-depolarizing-qfi-envelopes", ("qfi", "depolarizing")),
    (criterion_4, "qfi-additivity", ("qfi",)),
    (criterion_5, "rld-depolarizing-closed-form", ("qfi", "rld")),
    (criterion_6, "thermo-erasure-saturation", ("codes", "erasure")),
    (criterion_7, "thermo-depolarizing-blocks", ("codes", "depolarizing")),
    (criterion_8, "depolarizing-bound-chain", ("bounds", "depolarizing")),
    (criterion_9, "choi-recovery-sdp-sanity", ("recovery", "sdp")),
    (criterion_10, "twirl-preserves-choi-fidelity", ("recovery", "twirl")),
    (criterion_11, "rld-state-bound-near-plus", ("qfi", "rld")),
    (criterion_12, "ell-function-round-trips", ("bounds",)),
    (criterion_13, "multi-erasure-closed-form", ("bounds", "erasure")),
    (criterion_14, "hks-classifier-agreement", ("qfi",)),
]


def run_criteria(tag_filter: str | None = None) -> list[CriterionResult]:
    results = []
    for fn, name, tags in CRITERIA:
        if tag_filter is not None and tag_filter not in name \
                and all(tag_filter not in t for t in tags):
            continue
        results.append(fn())
        gc.collect()  # the SDP criteria allocate gigabytes transiently
    return results
