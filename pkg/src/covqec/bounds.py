"""Infidelity lower bounds for covariant codes.

The three bound-shaping functions ell1/ell2/ell3 invert the monotone forward
maps x(eps) arising in the metrological and resource-theoretic proofs; every
bound routine packages its result as a :class:`BoundReport`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qfi as qfi_mod
from .channels import Channel, Hamiltonian

BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    qfi_used: qfi_mod.QfiValue
    argument_x: float
    epsilon_lower: float
    inputs: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "x": self.argument_x,
            "epsilon_lower": self.epsilon_lower,
            "qfi": self.qfi_used.value if self.qfi_used.is_finite else None,
            "qfi_kind": self.qfi_used.kind,
            "flags": list(self.flags),
            "inputs": _jsonable(self.inputs),
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def ell1(x: float) -> float:
    """Inverse of x = eps(1-eps)/(1-2 eps)^2 on eps in [0, 1/2)."""
    if x < 0:
        raise ValueError("ell1 requires x >= 0")
    s = 1.0 + 4.0 * x
    return (s - math.sqrt(s)) / (2.0 * s)


def forward_ell1(eps: float) -> float:
    return eps * (1 - eps) / (1 - 2 * eps) ** 2


def forward_sqrt_map(eps: float, coeff: float) -> float:
    """Forward map eps / ((1 - 3 eps + eps^2)(1 - coeff sqrt(2 eps)))."""
    return eps / ((1 - 3 * eps + eps ** 2) * (1 - coeff * math.sqrt(2 * eps)))


def _invert_sqrt_map(x: float, coeff: float) -> tuple[float, bool]:
    """Bisection inverse of :func:`forward_sqrt_map` on eps in [0, 1/(2 coeff^2))."""
    if x < 0:
        raise ValueError("bound argument must be nonnegative")
    eps_max = 1.0 / (2.0 * coeff ** 2)
    lo, hi = 0.0, eps_max * (1.0 - 1e-14)
    if forward_sqrt_map(hi, coeff) <= x:
        return hi, True
    while hi - lo > BISECTION_TOL:
        mid = (lo + hi) / 2
        if forward_sqrt_map(mid, coeff) <= x:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2, False


def ell2(x: float) -> float:
    """Inverse of eps/((1-3eps+eps^2)(1-6 sqrt(2 eps))) on eps in [0, 1/72)."""
    return _invert_sqrt_map(x, 6.0)[0]


def ell3(x: float, d_l: int, delta_hl: float, tr_hl_sq: float) -> float:
    """Choi-infidelity analog of ell2, parameterized by the logical spectrum."""
    if tr_hl_sq <= 0:
        return 0.0
    coeff = 3.0 * d_l * delta_hl ** 2 / (2.0 * tr_hl_sq)
    return _invert_sqrt_map(x, coeff)[0]


def _no_bound(theorem: str, value: qfi_mod.QfiValue, inputs: dict) -> BoundReport:
    return BoundReport(theorem=theorem, qfi_used=value, argument_x=float("nan"),
                       epsilon_lower=0.0, inputs=inputs,
                       flags=("no-bound-condition-violated",))


def theorem1_bound(ch: Channel, h_s: Hamiltonian, delta_hl: float) -> BoundReport:
    """Metrological bound eps >= ell1(dHL^2 / (4 F_reg))."""
    inputs = {"delta_hl": delta_hl}
    value = qfi_mod.sld_qfi_channel_regularized(ch, h_s)
    if not value.is_finite:
        return _no_bound("T1", value, inputs)
    if delta_hl == 0 or value.value == 0:
        x = 0.0 if value.value else float("inf")
        eps = ell1(x) if math.isfinite(x) else 0.5
    else:
        x = delta_hl ** 2 / (4.0 * value.value)
        eps = ell1(x)
    return BoundReport("T1", value, x, eps, inputs)


def theorem2_bounds(ch: Channel, h_s: Hamiltonian, h_l: Hamiltonian,
                    assume_commuting_noise: bool = True,
                    assume_common_period: bool = True) -> tuple[BoundReport, BoundReport]:
    """Resource-theoretic bounds on eps (worst case) and eps_Choi."""
    d_l = h_l.dim
    flags = []
    if assume_commuting_noise:
        flags.append("assumed-noise-commutes-with-symmetry")
    if assume_common_period:
        flags.append("assumed-common-period")
    inputs = {"delta_hl": h_l.delta, "tr_hl_sq": h_l.trace_sq, "d_l": d_l}
    value = qfi_mod.rld_qfi_channel(ch, h_s)
    if not value.is_finite:
        return _no_bound("T2-worst", value, inputs), _no_bound("T2-choi", value, inputs)
    if h_l.delta == 0:
        zero = BoundReport("T2-worst", value, 0.0, 0.0, inputs, tuple(flags))
        return zero, BoundReport("T2-choi", value, 0.0, 0.0, inputs, tuple(flags))
    x2 = h_l.delta ** 2 / (4.0 * value.value)
    eps2, sat2 = _invert_sqrt_map(x2, 6.0)
    x3 = h_l.trace_sq / (d_l * value.value)
    coeff3 = 3.0 * d_l * h_l.delta ** 2 / (2.0 * h_l.trace_sq)
    eps3, sat3 = _invert_sqrt_map(x3, coeff3)
    worst = BoundReport("T2-worst", value, x2, eps2, inputs,
                        tuple(flags + (["saturated-at-domain-edge"] if sat2 else [])))
    choi = BoundReport("T2-choi", value, x3, eps3, inputs,
                       tuple(flags + (["saturated-at-domain-edge"] if sat3 else [])))
    return worst, choi


def local_bound(site_channels: list[Channel], site_hams: list[Hamiltonian],
                delta_hl: float) -> BoundReport:
    """Additive bound for tensor-product noise: sum the per-site channel QFIs."""
    total = 0.0
    per_site = []
    for ch, h in zip(site_channels, site_hams):
        value = qfi_mod.sld_qfi_channel_regularized(ch, h)
        if not value.is_finite:
            return _no_bound("local", value, {"delta_hl": delta_hl})
        total += value.value
        per_site.append(value.value)
    inputs = {"delta_hl": delta_hl, "per_site_qfi": per_site}
    x = delta_hl ** 2 / (4.0 * total) if total > 0 else float("inf")
    eps = ell1(x) if math.isfinite(x) else 0.5
    summary = qfi_mod.QfiValue.finite(total)
    return BoundReport("local", summary, x, eps, inputs)


def _mixture_with_identity(err: Channel, rate: float) -> Channel:
    """Kraus form of (1 - rate) Id + rate M; identity embeds into M's output space."""
    if err.d_out < err.d_in:
        raise ValueError("error channel must not shrink the system")
    incl = np.zeros((err.d_out, err.d_in), dtype=complex)
    incl[:err.d_in, :] = np.eye(err.d_in)
    kraus = [np.sqrt(1 - rate) * incl] + [np.sqrt(rate) * k for k in err.kraus]
    return Channel(tuple(kraus), err.d_in, err.d_out)


def single_error_bound(site_errors: list[tuple[float, Channel]],
                       site_hams: list[Hamiltonian], delta_hl: float,
                       flavor: str = "generic") -> BoundReport:
    """Bound for a single error occurring on site k with probability q_k.

    flavor "erasure" and "depolarizing-qubit" use the closed-form limits of
    the vanishing-noise construction; "generic" evaluates delta * sum_k
    F(N_k(delta)) on a small grid of delta and Richardson-extrapolates.
    """
    qs = [q for q, _ in site_errors]
    if abs(sum(qs) - 1.0) > 1e-9:
        raise ValueError("error probabilities must sum to 1")
    inputs = {"delta_hl": delta_hl, "q": qs, "flavor": flavor}
    flags: list[str] = []
    if flavor == "erasure":
        denom = 4.0 * sum(h.delta ** 2 / q for q, h in zip(qs, site_hams))
        x = delta_hl ** 2 / denom
        summary = qfi_mod.QfiValue.finite(denom / 4.0)
    elif flavor == "depolarizing-qubit":
        denom = (8.0 / 3.0) * sum(h.delta ** 2 / q for q, h in zip(qs, site_hams))
        x = delta_hl ** 2 / denom
        summary = qfi_mod.QfiValue.finite(denom / 4.0)
    elif flavor == "generic":
        deltas = [1e-2, 1e-3, 1e-4]
        values = []
        for d in deltas:
            total = 0.0
            for (q, err), h in zip(site_errors, site_hams):
                ch = _mixture_with_identity(err, d * q)
                value = qfi_mod.sld_qfi_channel_regularized(ch, h)
                if not value.is_finite:
                    return _no_bound("single-error", value, inputs)
                total += value.value
            values.append(d * total)
        extrap_a = (deltas[0] * values[1] - deltas[1] * values[0]) / (deltas[0] - deltas[1])
        extrap_b = (deltas[1] * values[2] - deltas[2] * values[1]) / (deltas[1] - deltas[2])
        residual = abs(extrap_b - extrap_a)
        inputs["extrapolation_residual"] = residual
        flags.append(f"richardson-residual={residual:.3e}")
        x = delta_hl ** 2 / (4.0 * extrap_b)
        summary = qfi_mod.QfiValue.finite(extrap_b)
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return BoundReport("single-error", summary, x, ell1(x), inputs, tuple(flags))


def multi_error_qfi_upper(partition: list[tuple[float, Channel, Hamiltonian]]) -> float:
    """Upper bound 4 sum_chi min ||q_chi K^dag h^2 K|| on the regularized SLD QFI.

    Each entry is (q_chi, error channel on the block, block Hamiltonian);
    blocks' Hamiltonians are assumed pairwise commuting (caller-checked).
    """
    total = 0.0
    for q, ch, h in partition:
        sol = qfi_mod.min_weighted_kraus_norm(list(ch.kraus), h.matrix, q)
        total += sol.objective
    return 4.0 * total


def t_erasure_partition(n: int, t: int, h_site: np.ndarray) -> list[tuple[float, Channel, Hamiltonian]]:
    """Partition for t simultaneous erasures: every t-subset of n sites is
    fully erased with equal probability.  Each site appears in C(n-1, t-1)
    subsets, so each block carries the within-block Hamiltonian sum divided
    by that count to keep the blocks summing to the total generator."""
    from itertools import combinations
    from math import comb
    d = h_site.shape[0]
    d_block = d ** t
    q = 1.0 / comb(n, t)
    erase = Channel(tuple(np.outer(np.eye(d_block)[0], np.eye(d_block)[i])
                          for i in range(d_block)), d_block, d_block)
    h_block = np.zeros((d_block, d_block), dtype=complex)
    for pos in range(t):
        h_block += np.kron(np.kron(np.eye(d ** pos), h_site), np.eye(d ** (t - pos - 1)))
    block = (q, erase, Hamiltonian(h_block / comb(n - 1, t - 1)))
    return [block for _ in combinations(range(n), t)]


def eastin_knill_bound(n: int, site_dims: list[int], d_l: int) -> BoundReport:
    """Dimension-counting infidelity bound for SU(d_L)-covariant codes."""
    if d_l < 2 or any(d < 2 for d in site_dims):
        raise ValueError("logical and site dimensions must be at least 2")
    denom = 4.0 * n * sum(
        (math.exp(math.log(d) / (d_l - 1)) - 1.0) ** 2 * (d_l - 1) ** 2
        for d in site_dims)
    x = 1.0 / denom
    approx_x = 1.0 / (4.0 * n * sum(math.log(d) ** 2 for d in site_dims))
    inputs = {"n": n, "site_dims": list(site_dims), "d_l": d_l,
              "approx_x": approx_x, "approx_epsilon": ell1(approx_x)}
    summary = qfi_mod.QfiValue.finite(denom / 4.0)
    return BoundReport("eastin-knill", summary, x, ell1(x), inputs)
