"""Dicke-state combinatorics.

Matrix elements of one- and two-site operators between Dicke states are
computed from binomial identities (log-Gamma based so n in the hundreds is
safe), never from 2^n-dimensional vectors.  Site basis: index 0 = spin up
(sigma_z eigenvalue +1), index 1 = spin down (-1).
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.special import gammaln


def log_binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -np.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def amp_ratio(n_small: int, k_small: int, n_big: int, k_big: int) -> float:
    """sqrt(C(n_small, k_small) / C(n_big, k_big)); zero off the valid range."""
    num = log_binom(n_small, k_small)
    if num == -np.inf:
        return 0.0
    return float(np.exp(0.5 * (num - log_binom(n_big, k_big))))


def single_site_amplitudes(n: int, w: int) -> tuple[float, float]:
    """Amplitudes (site up, site down) of D(n, w) split over one site.

    D(n, w) = a_up D(n-1, w-1)|up> + a_down D(n-1, w)|down>.
    """
    return amp_ratio(n - 1, w - 1, n, w), amp_ratio(n - 1, w, n, w)


def single_site_element(n: int, w1: int, w2: int, op: np.ndarray) -> complex:
    """<D(n, w1)| op acting on one site |D(n, w2)> (site choice immaterial)."""
    a1 = single_site_amplitudes(n, w1)
    a2 = single_site_amplitudes(n, w2)
    total = 0.0 + 0.0j
    for s1, u1 in ((0, 1), (1, 0)):
        for s2, u2 in ((0, 1), (1, 0)):
            if w1 - u1 == w2 - u2 and 0 <= w1 - u1 <= n - 1:
                total += a1[s1] * a2[s2] * op[s1, s2]
    return total


def two_site_element(n: int, w1: int, w2: int, op_a: np.ndarray, op_b: np.ndarray) -> complex:
    """<D(n, w1)| op_a (x) op_b on two distinct sites |D(n, w2)>."""
    total = 0.0 + 0.0j
    for s1 in (0, 1):
        for s2 in (0, 1):
            ups = (1 - s1) + (1 - s2)
            c1 = amp_ratio(n - 2, w1 - ups, n, w1)
            if c1 == 0.0:
                continue
            for t1 in (0, 1):
                for t2 in (0, 1):
                    upt = (1 - t1) + (1 - t2)
                    if w1 - ups != w2 - upt:
                        continue
                    c2 = amp_ratio(n - 2, w2 - upt, n, w2)
                    total += c1 * c2 * op_a[s1, t1] * op_b[s2, t2]
    return total


def dense_dicke(n: int, w: int) -> np.ndarray:
    """Explicit 2^n Dicke vector with w up spins (up = bit 0); for verification."""
    v = np.zeros(2 ** n)
    amp = 1.0 / np.sqrt(np.exp(log_binom(n, w)))
    for downs in combinations(range(n), n - w):
        idx = sum(1 << (n - 1 - k) for k in downs)
        v[idx] = amp
    return v
