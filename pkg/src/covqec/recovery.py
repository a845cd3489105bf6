"""Recovery optimization and infidelity measurement.

The Choi-fidelity optimum is an SDP over the recovery channel's Choi matrix
and serves as the exact average-case reference; worst-case numbers come from
multi-start descent over pure inputs on small logical channels and are always
reported as an upper bound paired with the Choi lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
from scipy.optimize import minimize

from . import codes, linalg
from .channels import (Channel, Hamiltonian, compose, kraus_from_choi, reduce_kraus,
                       unitary_channel)
from .codes import CovariantCode, ThermoCode
from .qfi import SdpError, solve_robust

DEFAULT_SEED = 0xC0DEC0DE

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)


def _solve_recovery(prob: cp.Problem) -> None:
    """Solve a recovery SDP, preferring the first-order solver.

    The PSD cone here is large (2 d_l d_p per side) but the data are sparse,
    which suits SCS far better than an interior-point factorization: the
    latter densifies the cone block and needs orders of magnitude more time
    and memory at n = 9 and beyond.
    """
    try:
        prob.solve(solver=cp.SCS, eps=1e-9, max_iters=100_000)
        if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return
    except cp.error.SolverError:
        pass
    solve_robust(prob)


@dataclass(frozen=True)
class InfidelityEstimate:
    """Sandwich around the true worst-case infidelity of a code/noise pair.

    worst_lower equals the Choi infidelity (average case never exceeds worst
    case); worst_upper is the worst-case infidelity of the best recovery
    found, hence an achievable upper bound.
    """

    choi_infidelity: float
    worst_upper: float
    worst_lower: float
    recovery: Channel

    def __post_init__(self):
        for v in (self.choi_infidelity, self.worst_upper, self.worst_lower):
            if not -1e-9 <= v <= 1 + 1e-9:
                raise ValueError("infidelities must lie in [0, 1]")
        if self.worst_lower > self.worst_upper + 1e-8:
            raise ValueError("lower bound exceeds upper bound")

    def to_json(self) -> dict:
        return {
            "choi_infidelity": self.choi_infidelity,
            "worst_upper": self.worst_upper,
            "worst_lower": self.worst_lower,
            "recovery": self.recovery.to_json(),
        }


def optimal_choi_recovery(m_tilde: Channel) -> tuple[Channel, float]:
    """Best-possible Choi fidelity of R o m_tilde to the logical identity.

    ``m_tilde`` is the noise-after-encoder composite (logical in, physical
    out).  The squared Choi fidelity is linear in the recovery's Choi matrix
    X, so maximizing it subject to X >= 0 and the partial-trace TP constraint
    is an SDP; returns the optimizing recovery and 1 - f^2_Choi.
    """
    d_l, d_p = m_tilde.d_in, m_tilde.d_out
    sigma = m_tilde.choi() / d_l  # normalized state on (physical x logical)
    blocks = sigma.reshape(d_p, d_l, d_p, d_l)
    cost = np.zeros((d_l * d_p, d_l * d_p), dtype=complex)
    for i in range(d_l):
        for i2 in range(d_l):
            unit = np.zeros((d_l, d_l))
            unit[i2, i] = 1.0
            cost += np.kron(unit, blocks[:, i, :, i2].T)
    cost = (cost + linalg.dagger(cost)) / (2 * d_l)
    x = cp.Variable((d_l * d_p, d_l * d_p), hermitian=True)
    constraints = [x >> 0,
                   cp.partial_trace(x, [d_l, d_p], 0) == np.eye(d_p)]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(cost @ x))), constraints)
    _solve_recovery(prob)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SdpError(f"recovery SDP failed with status {prob.status}")
    f2 = min(1.0, max(0.0, float(prob.value)))
    recovery = kraus_from_choi(x.value, d_p, d_l, ensure_tp=True)
    return recovery, 1.0 - f2


def choi_infidelity_to_identity(ch: Channel) -> float:
    """1 - f^2 of a square channel against the identity on the maximally
    entangled input; linear in the Choi matrix, no optimization involved."""
    if ch.d_in != ch.d_out:
        raise ValueError("needs a square channel")
    d = ch.d_in
    choi = ch.choi()
    f2 = float(np.real(sum(choi[i * d + i, j * d + j] for i in range(d)
                           for j in range(d)))) / d ** 2
    return min(1.0, max(0.0, 1.0 - f2))


def rotated_dephasing_parameters(ch: Channel, tol: float = 1e-12) -> tuple[float, float] | None:
    """(p, phi) if the qubit channel fixes both poles and only damps/rotates
    the coherence; None otherwise."""
    if ch.d_in != 2 or ch.d_out != 2:
        return None
    choi = ch.choi()
    pattern = np.zeros((4, 4), dtype=complex)
    pattern[0, 0] = pattern[3, 3] = 1.0
    z = choi[0, 3]
    pattern[0, 3] = z
    pattern[3, 0] = np.conj(z)
    if np.linalg.norm(choi - pattern) > tol * 10 or abs(z) > 1 + tol:
        return None
    p = (1.0 - min(1.0, abs(z))) / 2.0
    phi = float(-np.angle(z))
    return p, phi


def _entanglement_fidelity_terms(ch: Channel) -> list[np.ndarray]:
    d = ch.d_in
    return [np.kron(k, np.eye(d)) for k in ch.kraus]


def worst_case_infidelity(ch: Channel, n_starts: int = 50,
                          seed: int = DEFAULT_SEED) -> float:
    """1 - min_psi <psi|(ch (x) 1)(|psi><psi|)|psi> over pure two-copy inputs.

    A reference system of the same dimension suffices and the minimum is
    attained on pure states, so this is multi-start quasi-Newton descent on
    the unit sphere in dimension d^2.  Channels that merely damp and rotate
    the qubit coherence short-circuit to the closed form (1-(1-2p)cos phi)/2.
    """
    if ch.d_in != ch.d_out:
        raise ValueError("worst-case infidelity needs a square channel")
    params = rotated_dephasing_parameters(ch)
    if params is not None:
        p, phi = params
        return (1.0 - (1.0 - 2.0 * p) * math.cos(phi)) / 2.0
    d = ch.d_in
    if d > 4:
        raise ValueError("generic worst-case search limited to dimension 4")
    ops = _entanglement_fidelity_terms(reduce_kraus(ch))
    dim = d * d

    def objective(z):
        psi = z[:dim] + 1j * z[dim:]
        n2 = float(np.real(psi.conj() @ psi))
        amps = [psi.conj() @ (a @ psi) for a in ops]
        s = float(sum(abs(c) ** 2 for c in amps))
        grad_s = np.zeros(dim, dtype=complex)
        for c, a in zip(amps, ops):
            grad_s += np.conj(c) * (a @ psi) + c * (linalg.dagger(a) @ psi)
        f = s / n2 ** 2
        grad_psi = grad_s / n2 ** 2 - 2.0 * s / n2 ** 3 * psi
        grad = np.concatenate([2.0 * np.real(grad_psi), 2.0 * np.imag(grad_psi)])
        return f, grad

    rng = np.random.default_rng(seed)
    best = 1.0
    for _ in range(n_starts):
        z0 = rng.normal(size=2 * dim)
        z0 /= np.linalg.norm(z0)
        res = minimize(objective, z0, jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-14, "gtol": 1e-12, "maxiter": 500})
        best = min(best, float(res.fun))
    return min(1.0, max(0.0, 1.0 - best))


def beny_oreshkov_infidelity(tc: ThermoCode, site_kraus: list[np.ndarray]) -> float:
    """Correctability-based upper bound on the worst-case infidelity.

    The noise hits each of the n sites with probability 1/n using the given
    single-site Kraus family.  Valid whenever the code states are not
    connected by any two-site operator, so the perturbation of the Kraus
    Gram matrix is diagonal in the logical basis; then the infidelity is
    controlled by the fidelity between the averaged Gram matrix A and the
    perturbed one A + B.
    """
    n = tc.n
    r = len(site_kraus)
    size = r * n

    def gram(a: int) -> np.ndarray:
        m = np.zeros((size, size), dtype=complex)
        for i in range(r):
            for j in range(r):
                op_ii = linalg.dagger(site_kraus[i]) @ site_kraus[j]
                same = tc.overlap(a, a, {0: op_ii}) / n
                diff = tc.overlap(a, a, {0: linalg.dagger(site_kraus[i]),
                                         1: site_kraus[j]}) / n
                for k in range(n):
                    for k2 in range(n):
                        m[i * n + k, j * n + k2] = same if k == k2 else diff
        return m

    cross = max(abs(tc.overlap(0, 1, {0: linalg.dagger(site_kraus[i]),
                                      1: site_kraus[j]}) / n)
                for i in range(r) for j in range(r))
    cross = max(cross, max(abs(tc.overlap(0, 1, {0: linalg.dagger(site_kraus[i]) @ site_kraus[j]}) / n)
                           for i in range(r) for j in range(r)))
    if cross > 1e-10:
        raise ValueError("code states are connected by the noise; diagonal perturbation ansatz invalid")
    m0, m1 = gram(0), gram(1)
    a = (m0 + m1) / 2
    f = linalg.state_fidelity(a, m0)
    return min(1.0, max(0.0, 1.0 - f ** 2))


def thermo_depolarizing_blocks(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form Gram blocks for a thermodynamic code under uniform
    single-site depolarizing noise, in Pauli-major (i, k) ordering."""
    ones = np.ones((n, n))
    eye = np.eye(n)
    c = (n ** 2 - m ** 2) / (2.0 * n * (n - 1))
    e = (m ** 2 - n) / (n * (n - 1.0))
    a = np.zeros((4 * n, 4 * n), dtype=complex)
    b = np.zeros((4 * n, 4 * n), dtype=complex)
    a[0:n, 0:n] = ones / (4 * n)
    for blk in (1, 2):
        a[blk * n:(blk + 1) * n, blk * n:(blk + 1) * n] = \
            ((1 - c) * eye + c * ones) / (4 * n)
    a[3 * n:, 3 * n:] = ((1 - e) * eye + e * ones) / (4 * n)
    b[0:n, 3 * n:] = b[3 * n:, 0:n] = m / (4 * n ** 2) * ones
    b[n:2 * n, 2 * n:3 * n] = 1j * m / (4 * n ** 2) * eye
    b[2 * n:3 * n, n:2 * n] = -1j * m / (4 * n ** 2) * eye
    return a, b


def thermo_depolarizing_infidelity(n: int, m: int) -> float:
    """Upper bound 1 - f(A, A+B)^2 from the closed-form blocks; cheap enough
    for n in the hundreds."""
    a, b = thermo_depolarizing_blocks(n, m)
    f = linalg.state_fidelity(a, a + b)
    return min(1.0, max(0.0, 1.0 - f ** 2))


def depolarizing_site_kraus() -> list[np.ndarray]:
    """Single-site Kraus family for a fully depolarized site: U_i / 2."""
    return [np.eye(2, dtype=complex) / 2, PAULI_X / 2, PAULI_Y / 2,
            codes.SIGMA_Z / 2]


def measure_code(code, noise, h_phys: Hamiltonian | None = None,
                 seed: int = DEFAULT_SEED) -> InfidelityEstimate:
    """Full infidelity sandwich for a code/noise pair.

    ``code`` is a CovariantCode with ``noise`` a Channel on its physical
    space, or a ThermoCode with ``noise`` one of "erasure"/"depolarizing"
    (compressed path).  The Choi-optimal recovery gives the exact lower
    bound; its worst-case infidelity — also tried after covariant twirling
    and against any explicit recovery — gives the upper bound.
    """
    explicit = None
    if isinstance(code, ThermoCode):
        if noise == "erasure":
            m_tilde = codes.thermo_erasure_noise(code)
            h_s = code.syndrome_hamiltonian()
            explicit = codes.thermo_erasure_syndrome_recovery(code)
        elif noise == "depolarizing":
            m_tilde, h_s = codes.thermo_depolarizing_noise(code)
        else:
            raise ValueError("compressed thermo noise must be 'erasure' or 'depolarizing'")
        h_l = code.h_l
    elif isinstance(code, CovariantCode):
        if noise.d_in != code.d_s:
            raise ValueError("noise does not act on the code's physical space")
        m_tilde = compose(noise, unitary_channel(code.isometry))
        h_l = code.h_l
        h_s = h_phys if h_phys is not None else (
            code.h_s if noise.d_out == code.d_s else None)
    else:
        raise TypeError("code must be a CovariantCode or ThermoCode")

    rec, eps_choi = optimal_choi_recovery(m_tilde)
    candidates = [rec]
    if h_s is not None:
        try:
            candidates.append(codes.twirl_recovery(rec, h_l, h_s))
        except ValueError:
            pass
    if explicit is not None:
        candidates.append(explicit)
    best_rec, best_worst = None, None
    for cand in candidates:
        worst = worst_case_infidelity(compose(cand, m_tilde), seed=seed)
        if best_worst is None or worst < best_worst:
            best_rec, best_worst = cand, worst
    return InfidelityEstimate(choi_infidelity=eps_choi,
                              worst_upper=max(best_worst, eps_choi),
                              worst_lower=eps_choi, recovery=best_rec)
