"""Quantum Fisher information for states and channels.

Implements the symmetric (SLD) and right (RLD) logarithmic-derivative QFI,
the Kraus-span condition deciding finiteness of the regularized channel SLD
QFI, the support condition for the channel RLD QFI, and the semidefinite
program computing the regularized SLD QFI via the block LMI

    minimize t   s.t.   beta(h) = 0,   [[t I, D(h)^dag], [D(h), I]] >= 0,

where D(h) stacks the blocks dK_i + i sum_j h_ij K_j, so that ||alpha(h)||
<= t by a Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from . import linalg
from .channels import Channel, ChannelFamily, Hamiltonian, hamiltonian_channel_family

# Residuals above this (relative) threshold mean the span/support condition
# is violated and the QFI is infinite.
CONDITION_RESIDUAL_TOL = 1e-6

_SOLVER_KWARGS = dict(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11,
                      tol_feas=1e-11)


def solve_robust(prob: cp.Problem) -> None:
    """Solve at tight tolerances, retrying at solver defaults on failure.

    Callers re-derive the reported objective from a feasibility-projected
    optimizer, so a looser solve only costs accuracy that the subsequent
    projection and gap check detect.
    """
    try:
        prob.solve(**_SOLVER_KWARGS)
    except cp.error.SolverError:
        try:
            prob.solve(solver=cp.CLARABEL)
        except cp.error.SolverError:
            prob.solve(solver=cp.SCS, eps=1e-9, max_iters=100_000)


@dataclass(frozen=True)
class SdpSolution:
    objective: float
    h: np.ndarray
    primal_residual: float
    dual_gap: float


@dataclass(frozen=True)
class QfiValue:
    """Finite value with optimizer certificate, or Infinite with a violation witness."""

    kind: str  # "finite" | "infinite"
    value: float | None = None
    certificate: np.ndarray | None = None
    sdp: SdpSolution | None = None

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @staticmethod
    def finite(value: float, certificate: np.ndarray | None = None,
               sdp: SdpSolution | None = None) -> "QfiValue":
        return QfiValue("finite", max(0.0, float(value)), certificate, sdp)

    @staticmethod
    def infinite(certificate: np.ndarray) -> "QfiValue":
        return QfiValue("infinite", None, certificate, None)

    def to_json(self) -> dict:
        if self.is_finite:
            return {"kind": "finite", "value": self.value}
        return {"kind": "infinite",
                "certificate_norm": float(linalg.operator_norm(self.certificate))}


class SdpError(RuntimeError):
    pass


def kraus_products(kraus) -> list[np.ndarray]:
    return [linalg.dagger(ki) @ kj for ki in kraus for kj in kraus]


def hks_check(ch: Channel, h: Hamiltonian) -> tuple[bool, np.ndarray]:
    """Hamiltonian-in-Kraus-span test; returns (satisfied, projection residual)."""
    if h.dim != ch.d_in:
        raise ValueError("Hamiltonian dimension does not match channel input")
    resid = linalg.span_projection_residual(h.matrix, kraus_products(ch.kraus))
    scale = max(1.0, linalg.operator_norm(h.matrix))
    return np.linalg.norm(resid) <= CONDITION_RESIDUAL_TOL * scale, resid


def _family_condition_target(fam: ChannelFamily) -> np.ndarray:
    """The Hermitian operator i sum_i K_i^dag dK_i that must lie in the Kraus span."""
    t = 1j * sum(linalg.dagger(k) @ dk for k, dk in zip(fam.kraus, fam.dkraus))
    return (t + linalg.dagger(t)) / 2


def family_condition_check(fam: ChannelFamily) -> tuple[bool, np.ndarray]:
    """Condition (S) for a generic family: i K^dag dK in span{K_i^dag K_j}."""
    target = _family_condition_target(fam)
    resid = linalg.span_projection_residual(target, kraus_products(fam.kraus))
    scale = max(1.0, linalg.operator_norm(target))
    return np.linalg.norm(resid) <= CONDITION_RESIDUAL_TOL * scale, resid


def sld_qfi_state(rho: np.ndarray, drho: np.ndarray, cutoff: float | None = None) -> float:
    """SLD QFI of a state family, 2 sum |<i|drho|j>|^2 / (l_i + l_j) over the support."""
    vals, vecs = linalg.hermitian_eigensystem(rho)
    d = (linalg.dagger(vecs) @ drho @ vecs)
    tol = linalg.spectral_cutoff(cutoff) * max(float(vals.max()), 1e-300)
    total = 0.0
    for i in range(len(vals)):
        for j in range(len(vals)):
            s = vals[i] + vals[j]
            if s > tol:
                total += 2.0 * abs(d[i, j]) ** 2 / s
    return float(total)


def rld_qfi_state(rho: np.ndarray, h: Hamiltonian) -> QfiValue:
    """RLD QFI Tr(H rho^2 H rho^-1) - Tr(rho H^2); infinite off the support."""
    hm = h.matrix
    hrh = hm @ rho @ hm
    if not linalg.support_contains(rho, hrh):
        proj = linalg.support_projector(rho)
        return QfiValue.infinite(hrh - proj @ hrh @ proj)
    rinv = linalg.support_pseudo_inverse(rho)
    value = np.trace(hm @ rho @ rho @ hm @ rinv) - np.trace(rho @ hm @ hm)
    return QfiValue.finite(value.real)


def _hermitian_basis(r: int) -> list[np.ndarray]:
    basis = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(r):
        for j in range(i + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = 1j / np.sqrt(2)
            e[j, i] = -1j / np.sqrt(2)
            basis.append(e)
    return basis


def _project_to_constraint(h: np.ndarray, kraus, target: np.ndarray) -> np.ndarray:
    """Least-squares correct h so that sum h_ij K_i^dag K_j = target exactly."""
    r = len(kraus)
    basis = _hermitian_basis(r)
    prods = kraus_products(kraus)  # ordered (i, j) row-major
    cols = []
    for b in basis:
        m = sum(b[i, j] * prods[i * r + j] for i in range(r) for j in range(r))
        cols.append(m.reshape(-1))
    a = np.stack(cols, axis=1)
    coeffs = np.array([np.vdot(b.reshape(-1), h.reshape(-1)).real for b in basis])
    defect = target.reshape(-1) - a @ coeffs
    system = np.vstack([a.real, a.imag])
    rhs = np.concatenate([defect.real, defect.imag])
    delta, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return h + sum(c * b for c, b in zip(delta, basis))


def _alpha_norm(kraus, dkraus, h: np.ndarray) -> float:
    r = len(kraus)
    blocks = [dkraus[i] + 1j * sum(h[i, j] * kraus[j] for j in range(r)) for i in range(r)]
    d_mat = np.vstack(blocks)
    return linalg.operator_norm(linalg.dagger(d_mat) @ d_mat)


def _solve_family_sdp(kraus, dkraus) -> SdpSolution:
    """Minimize 4||alpha(h)|| subject to beta(h) = 0 for a Kraus family."""
    r = len(kraus)
    d_in = kraus[0].shape[1]
    d_out = kraus[0].shape[0]
    target = 1j * sum(linalg.dagger(k) @ dk for k, dk in zip(kraus, dkraus))
    target = (target + linalg.dagger(target)) / 2

    h = cp.Variable((r, r), hermitian=True)
    t = cp.Variable(nonneg=True)
    prods = kraus_products(kraus)
    beta = sum(h[i, j] * prods[i * r + j] for i in range(r) for j in range(r)) - target
    blocks = [dkraus[i] + 1j * sum(h[i, j] * kraus[j] for j in range(r)) for i in range(r)]
    d_expr = cp.vstack(blocks)
    lmi = cp.bmat([[t * np.eye(d_in), d_expr.H], [d_expr, np.eye(r * d_out)]])
    prob = cp.Problem(cp.Minimize(t), [beta == 0, lmi >> 0])
    solve_robust(prob)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SdpError(f"QFI SDP failed with status {prob.status}")
    h_val = np.asarray(h.value)
    h_val = (h_val + linalg.dagger(h_val)) / 2
    h_val = _project_to_constraint(h_val, kraus, target)
    objective = 4.0 * _alpha_norm(kraus, dkraus, h_val)
    residual = linalg.operator_norm(
        sum(h_val[i, j] * prods[i * r + j] for i in range(r) for j in range(r)) - target)
    gap = abs(objective - 4.0 * float(t.value))
    if prob.status == cp.OPTIMAL_INACCURATE and gap > 1e-6 * max(1.0, objective):
        raise SdpError(f"QFI SDP inaccurate: recompute gap {gap:.3e}")
    return SdpSolution(objective=objective, h=h_val, primal_residual=residual, dual_gap=gap)


def sld_qfi_generic_family(fam: ChannelFamily) -> QfiValue:
    """Regularized SLD QFI of a one-parameter Kraus family at theta = 0."""
    ok, resid = family_condition_check(fam)
    if not ok:
        return QfiValue.infinite(resid)
    sol = _solve_family_sdp(list(fam.kraus), list(fam.dkraus))
    return QfiValue.finite(sol.objective, certificate=sol.h, sdp=sol)


def sld_qfi_channel_regularized(ch: Channel, h: Hamiltonian) -> QfiValue:
    """Regularized SLD QFI of N o U_theta; infinite iff the HKS condition fails."""
    ok, resid = hks_check(ch, h)
    fam = hamiltonian_channel_family(ch, h)
    ok_family, _ = family_condition_check(fam)
    if ok != ok_family:
        raise SdpError("HKS check disagrees with the family span condition")
    if not ok:
        return QfiValue.infinite(resid)
    sol = _solve_family_sdp(list(fam.kraus), list(fam.dkraus))
    return QfiValue.finite(sol.objective, certificate=sol.h, sdp=sol)


def rld_condition_check(ch: Channel, h: Hamiltonian) -> tuple[bool, np.ndarray]:
    """Condition (R): span{K_i H} contained in span{K_i}."""
    basis = list(ch.kraus)
    worst = np.zeros_like(ch.kraus[0])
    ok = True
    for k in ch.kraus:
        kh = k @ h.matrix
        resid = linalg.span_projection_residual(kh, basis)
        scale = max(1.0, linalg.operator_norm(kh))
        if np.linalg.norm(resid) > CONDITION_RESIDUAL_TOL * scale:
            ok = False
            if np.linalg.norm(resid) > np.linalg.norm(worst):
                worst = resid
    return ok, worst


def rld_qfi_channel(ch: Channel, h: Hamiltonian) -> QfiValue:
    """Channel RLD QFI ||Tr_out(dGamma Gamma^+ dGamma)|| with dGamma = d/dtheta Choi."""
    if h.dim != ch.d_in:
        raise ValueError("Hamiltonian dimension does not match channel input")
    if h.delta == 0:
        return QfiValue.finite(0.0)
    ok, resid = rld_condition_check(ch, h)
    if not ok:
        return QfiValue.infinite(resid)
    d = ch.d_in
    gamma_vec = np.eye(d, dtype=complex).reshape(-1)
    gamma = np.outer(gamma_vec, gamma_vec.conj())
    h_big = np.kron(h.matrix, np.eye(d))
    pre = -1j * (h_big @ gamma - gamma @ h_big)

    def lift(x):
        out = np.zeros((ch.d_out * d, ch.d_out * d), dtype=complex)
        for k in ch.kraus:
            kk = np.kron(k, np.eye(d))
            out += kk @ x @ linalg.dagger(kk)
        return out

    choi = lift(gamma)
    dchoi = lift(pre)
    inv = linalg.support_pseudo_inverse(choi)
    inner = dchoi @ inv @ dchoi
    reduced = linalg.partial_trace(inner, [ch.d_out, d], [1])
    return QfiValue.finite(linalg.operator_norm(reduced))


def sld_upper_bound_depolarizing(d: int, p: float, delta_h: float) -> float:
    """Closed-form upper bound on the regularized SLD QFI of depolarizing noise."""
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    return delta_h ** 2 * (1 - p) ** 2 / (p * (1 + 2 / d ** 2 - p))


def min_weighted_kraus_norm(kraus, h_target: np.ndarray, q: float) -> SdpSolution:
    """Solve min ||q K^dag h^2 K|| over Hermitian h with q K^dag h K = h_target.

    The per-block subproblem of the multi-error QFI upper bound; the objective
    is encoded through the same Schur-complement LMI with D = sqrt(q) (h K).
    """
    r = len(kraus)
    d_in = kraus[0].shape[1]
    d_out = kraus[0].shape[0]
    h = cp.Variable((r, r), hermitian=True)
    t = cp.Variable(nonneg=True)
    prods = kraus_products(kraus)
    beta = q * sum(h[i, j] * prods[i * r + j] for i in range(r) for j in range(r)) - h_target
    blocks = [np.sqrt(q) * sum(h[i, j] * kraus[j] for j in range(r)) for i in range(r)]
    d_expr = cp.vstack(blocks)
    lmi = cp.bmat([[t * np.eye(d_in), d_expr.H], [d_expr, np.eye(r * d_out)]])
    prob = cp.Problem(cp.Minimize(t), [beta == 0, lmi >> 0])
    solve_robust(prob)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SdpError(f"weighted-norm SDP failed with status {prob.status}")
    h_val = np.asarray(h.value)
    h_val = (h_val + linalg.dagger(h_val)) / 2
    h_val = _project_to_constraint(h_val, [np.sqrt(q) * k for k in kraus], h_target)
    r_mat = np.vstack([np.sqrt(q) * sum(h_val[i, j] * kraus[j] for j in range(r))
                       for i in range(r)])
    objective = linalg.operator_norm(linalg.dagger(r_mat) @ r_mat)
    residual = linalg.operator_norm(
        q * sum(h_val[i, j] * prods[i * r + j] for i in range(r) for j in range(r)) - h_target)
    return SdpSolution(objective=objective, h=h_val, primal_residual=residual,
                       dual_gap=abs(objective - float(t.value)))
