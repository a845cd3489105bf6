"""Dense complex linear algebra kernel.

All matrices are plain ``numpy.ndarray`` with complex dtype, row-major.
Every routine here is a pure function; nothing is mutated in place.
The single spectral cutoff used for all support / rank decisions lives in
:func:`spectral_cutoff` and can be overridden per call or globally via the
``COVQEC_TOL`` environment variable.
"""

from __future__ import annotations

import os

import numpy as np

# Relative cutoff for support/rank decisions (fraction of the largest
# eigenvalue).  One constant so every rank test in the library agrees.
DEFAULT_SPECTRAL_CUTOFF = 1e-10

# Eigenvalues in (-CLAMP_WINDOW * norm, 0) on PSD inputs are treated as
# round-off and clamped to zero; anything below that is a real error.
PSD_CLAMP_WINDOW = 1e-8


def spectral_cutoff(override: float | None = None) -> float:
    """Return the relative spectral cutoff, honoring COVQEC_TOL."""
    if override is not None:
        return override
    env = os.environ.get("COVQEC_TOL")
    if env is not None:
        return float(env)
    return DEFAULT_SPECTRAL_CUTOFF


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def is_hermitian(m: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = max(1.0, operator_norm(m))
    return bool(np.linalg.norm(m - dagger(m)) <= rtol * scale * 10)


def require_hermitian(m: np.ndarray, rtol: float = 1e-9, what: str = "matrix") -> np.ndarray:
    """Validate Hermiticity and return the exactly-Hermitian part."""
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - dagger(m)) > rtol * scale:
        raise ValueError(f"{what} is not Hermitian within tolerance")
    return (m + dagger(m)) / 2


def hermitian_eigensystem(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending, real) and orthonormal eigenvectors of a Hermitian matrix."""
    m = require_hermitian(m)
    vals, vecs = np.linalg.eigh(m)
    return vals, vecs


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def _clamped_psd_eigs(m: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = hermitian_eigensystem(m)
    scale = max(float(vals[-1]), float(np.abs(vals).max()), 1e-300)
    if vals[0] < -PSD_CLAMP_WINDOW * scale:
        raise ValueError(f"{what} has materially negative eigenvalue {vals[0]:.3e}")
    return np.clip(vals, 0.0, None), vecs


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix; tiny negative eigenvalues clamped."""
    vals, vecs = _clamped_psd_eigs(m, "psd_sqrt input")
    return (vecs * np.sqrt(vals)) @ dagger(vecs)


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Fidelity f(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    for name, s in (("rho", rho), ("sigma", sigma)):
        if abs(np.trace(s) - 1.0) > 1e-6:
            raise ValueError(f"{name} trace deviates from 1 by more than 1e-6")
    root = psd_sqrt(rho)
    inner = root @ sigma @ root
    vals, _ = _clamped_psd_eigs((inner + dagger(inner)) / 2, "fidelity inner matrix")
    return float(min(1.0, np.sum(np.sqrt(vals))))


def partial_trace(m: np.ndarray, dims: list[int], keep: list[int]) -> np.ndarray:
    """Trace out all subsystems not in ``keep`` from an operator on a tensor product.

    ``dims`` lists subsystem dimensions in tensor order; ``keep`` gives the
    indices of subsystems to retain (order preserved).
    """
    dims = list(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = sorted(set(keep))
    n = len(dims)
    tensor = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # Trace out from the highest axis down so earlier axis numbers stay valid.
    n_sub = n
    for i in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + n_sub)
        n_sub -= 1
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return tensor.reshape(d_keep, d_keep)


def support_pseudo_inverse(m: np.ndarray, cutoff: float | None = None) -> np.ndarray:
    """Invert a Hermitian matrix on its support; eigenvalues below cutoff map to 0."""
    vals, vecs = hermitian_eigensystem(m)
    tol = spectral_cutoff(cutoff) * max(float(np.abs(vals).max()), 1e-300)
    inv = np.where(np.abs(vals) > tol, 1.0 / np.where(np.abs(vals) > tol, vals, 1.0), 0.0)
    return (vecs * inv) @ dagger(vecs)


def support_projector(m: np.ndarray, cutoff: float | None = None) -> np.ndarray:
    """Orthogonal projector onto the range of a Hermitian matrix."""
    vals, vecs = hermitian_eigensystem(m)
    tol = spectral_cutoff(cutoff) * max(float(np.abs(vals).max()), 1e-300)
    sel = np.abs(vals) > tol
    v = vecs[:, sel]
    return v @ dagger(v)


def support_contains(a: np.ndarray, b: np.ndarray, cutoff: float | None = None) -> bool:
    """True iff the range of Hermitian ``b`` lies inside the range of Hermitian ``a``."""
    proj = support_projector(a, cutoff)
    resid = b - proj @ b @ proj
    scale = max(operator_norm(b), 1e-300)
    return operator_norm(resid) <= 1e-8 * scale


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major flattening to a column vector."""
    return m.reshape(-1)


def span_projection_residual(target: np.ndarray, basis: list[np.ndarray],
                             cutoff: float | None = None) -> np.ndarray:
    """Residual of ``target`` after orthogonal projection onto span(basis).

    The span is taken over complex matrices viewed as vectors; rank decisions
    inside the basis use the global spectral cutoff on singular values.
    """
    if not basis:
        return target.copy()
    cols = np.stack([vec(b) for b in basis], axis=1)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    tol = spectral_cutoff(cutoff) * max(float(s[0]), 1e-300)
    u = u[:, s > tol]
    t = vec(target)
    resid = t - u @ (dagger(u) @ t)
    return resid.reshape(target.shape)
