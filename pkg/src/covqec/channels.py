"""Quantum channel algebra: Kraus representations, Choi matrices, and the
named channel families used throughout (erasure, depolarizing, rotated
dephasing).

Conventions:
  * Choi matrices are unnormalized, built from |Gamma> = sum_i |i>|i>,
    laid out as (output system) x (reference copy of the input).
  * The erasure channel appends the vacuum state as the last basis vector
    of the output space (index d).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg


@dataclass(frozen=True)
class Channel:
    """A CPTP map held as a list of Kraus operators (each d_out x d_in)."""

    kraus: tuple[np.ndarray, ...]
    d_in: int
    d_out: int

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("Kraus list must be non-empty")
        object.__setattr__(self, "kraus", tuple(np.asarray(k, dtype=complex) for k in self.kraus))
        for k in self.kraus:
            if k.shape != (self.d_out, self.d_in):
                raise ValueError(f"Kraus shape {k.shape} != ({self.d_out}, {self.d_in})")
        tp = sum(linalg.dagger(k) @ k for k in self.kraus)
        if np.linalg.norm(tp - np.eye(self.d_in)) > 1e-9 * max(1, self.d_in):
            raise ValueError("Kraus operators are not trace preserving within 1e-9")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if rho.shape != (self.d_in, self.d_in):
            raise ValueError(f"state shape {rho.shape} does not match d_in={self.d_in}")
        out = np.zeros((self.d_out, self.d_out), dtype=complex)
        for k in self.kraus:
            out += k @ rho @ linalg.dagger(k)
        return out

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix (N x 1)(|Gamma><Gamma|) on out (x) in."""
        # (K (x) I)|Gamma> is the row-major vectorization of K, so the Choi
        # matrix is W W^dag with W stacking those vectors as columns.
        w = np.stack([k.reshape(-1) for k in self.kraus], axis=1)
        return w @ linalg.dagger(w)

    def to_json(self) -> dict:
        return {
            "d_in": self.d_in,
            "d_out": self.d_out,
            "kraus": [matrix_to_json(k) for k in self.kraus],
        }

    @staticmethod
    def from_json(data: dict) -> "Channel":
        kraus = tuple(matrix_from_json(k, data["d_out"], data["d_in"]) for k in data["kraus"])
        return Channel(kraus, data["d_in"], data["d_out"])


def matrix_to_json(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]


def matrix_from_json(entries: list, rows: int, cols: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in entries])
    if flat.size != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {flat.size}")
    return flat.reshape(rows, cols)


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian generator, normalized traceless, with cached spectral data."""

    matrix: np.ndarray
    delta: float = field(init=False)
    opnorm: float = field(init=False)
    trace_sq: float = field(init=False)

    def __post_init__(self):
        m = linalg.require_hermitian(self.matrix, what="Hamiltonian")
        d = m.shape[0]
        m = m - (np.trace(m) / d) * np.eye(d)
        vals = np.linalg.eigvalsh(m)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "delta", float(vals[-1] - vals[0]))
        object.__setattr__(self, "opnorm", float(np.abs(vals).max()))
        object.__setattr__(self, "trace_sq", float(np.sum(vals ** 2)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitary(self, theta: float) -> np.ndarray:
        vals, vecs = linalg.hermitian_eigensystem(self.matrix)
        return (vecs * np.exp(-1j * vals * theta)) @ linalg.dagger(vecs)

    def to_json(self) -> dict:
        return {"d": self.dim, "matrix": matrix_to_json(self.matrix)}

    @staticmethod
    def from_json(data: dict) -> "Hamiltonian":
        return Hamiltonian(matrix_from_json(data["matrix"], data["d"], data["d"]))


def identity_channel(d: int) -> Channel:
    return Channel((np.eye(d, dtype=complex),), d, d)


def compose(a: Channel, b: Channel) -> Channel:
    """The channel a after b (input of a is output of b)."""
    if a.d_in != b.d_out:
        raise ValueError(f"cannot compose: a.d_in={a.d_in} != b.d_out={b.d_out}")
    kraus = tuple(ka @ kb for ka in a.kraus for kb in b.kraus)
    return Channel(kraus, b.d_in, a.d_out)


def tensor(a: Channel, b: Channel) -> Channel:
    kraus = tuple(np.kron(ka, kb) for ka in a.kraus for kb in b.kraus)
    return Channel(kraus, a.d_in * b.d_in, a.d_out * b.d_out)


def unitary_channel(u: np.ndarray) -> Channel:
    d = u.shape[0]
    return Channel((u.astype(complex),), u.shape[1], d)


def erasure(d: int, p: float) -> Channel:
    """Erasure channel on a d-level system; |vac> is output index d."""
    if not 0 <= p <= 1:
        raise ValueError("erasure probability must lie in [0, 1]")
    keep = np.zeros((d + 1, d), dtype=complex)
    keep[:d, :] = np.sqrt(1 - p) * np.eye(d)
    kraus = [keep]
    for i in range(d):
        k = np.zeros((d + 1, d), dtype=complex)
        k[d, i] = np.sqrt(p)
        kraus.append(k)
    return Channel(tuple(kraus), d, d + 1)


def weyl_basis(d: int) -> list[np.ndarray]:
    """Clock-and-shift unitary basis, Tr(U_i^dag U_j) = d delta_ij; U_0 = I."""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    basis = []
    for a in range(d):
        for b in range(d):
            basis.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return basis


def depolarizing(d: int, p: float) -> Channel:
    """Depolarizing channel rho -> (1-p) rho + p I/d via the Weyl unitary basis."""
    if not 0 <= p <= 1:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    x = 1 - (d * d - 1) / (d * d) * p
    y = p / (d * d)
    basis = weyl_basis(d)
    kraus = [np.sqrt(x) * basis[0]] + [np.sqrt(y) * u for u in basis[1:]]
    return Channel(tuple(kraus), d, d)


def rotated_dephasing(p: float, phi: float) -> Channel:
    """Qubit channel (1-p) R rho R^dag + p R Z rho Z R^dag with R = exp(-i phi Z / 2)."""
    z = np.diag([1.0, -1.0]).astype(complex)
    rot = np.diag(np.exp(-1j * phi / 2 * np.array([1.0, -1.0])))
    return Channel((np.sqrt(1 - p) * rot, np.sqrt(p) * rot @ z), 2, 2)


@dataclass(frozen=True)
class ChannelFamily:
    """A one-parameter channel family at theta = 0: Kraus list and derivatives."""

    kraus: tuple[np.ndarray, ...]
    dkraus: tuple[np.ndarray, ...]
    d_in: int
    d_out: int

    def __post_init__(self):
        if len(self.kraus) != len(self.dkraus):
            raise ValueError("Kraus and derivative lists must have equal length")
        for k, dk in zip(self.kraus, self.dkraus):
            if k.shape != dk.shape:
                raise ValueError("Kraus/derivative shape mismatch")


def hamiltonian_channel_family(ch: Channel, h: Hamiltonian) -> ChannelFamily:
    """Family N o U_theta generated by h; at theta=0 the derivatives are -i K_i H."""
    if h.dim != ch.d_in:
        raise ValueError(f"Hamiltonian dim {h.dim} != channel d_in {ch.d_in}")
    dkraus = tuple(-1j * k @ h.matrix for k in ch.kraus)
    return ChannelFamily(ch.kraus, dkraus, ch.d_in, ch.d_out)


def apply_choi(choi: np.ndarray, rho: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Apply a channel given by its unnormalized Choi matrix: Tr_in[(I (x) rho^T) choi]."""
    m = np.kron(np.eye(d_out), rho.T) @ choi
    return linalg.partial_trace(m, [d_out, d_in], [0])


def kraus_from_choi(choi: np.ndarray, d_in: int, d_out: int,
                    cutoff: float | None = None, ensure_tp: bool = False) -> Channel:
    """Reconstruct a Kraus representation from an unnormalized Choi matrix.

    With ``ensure_tp`` small trace-preservation defects (e.g. SDP solver
    residuals) are repaired by right-multiplying with (sum K^dag K)^{-1/2}.
    """
    vals, vecs = linalg.hermitian_eigensystem((choi + linalg.dagger(choi)) / 2)
    tol = max(linalg.spectral_cutoff(cutoff), 1e-9) * max(float(np.abs(vals).max()), 1e-300)
    kraus = []
    for lam, v in zip(vals, vecs.T):
        if lam > tol:
            kraus.append(np.sqrt(lam) * v.reshape(d_out, d_in))
    if ensure_tp:
        total = sum(linalg.dagger(k) @ k for k in kraus)
        w, u = linalg.hermitian_eigensystem(total)
        if w[0] <= 0:
            raise ValueError("Choi matrix is not trace preserving on the full input space")
        fix = (u * (1.0 / np.sqrt(w))) @ linalg.dagger(u)
        kraus = [k @ fix for k in kraus]
    return Channel(tuple(kraus), d_in, d_out)


def reduce_kraus(ch: Channel) -> Channel:
    """Equivalent channel with at most d_in*d_out Kraus operators (Choi rank)."""
    if len(ch.kraus) <= ch.d_in * ch.d_out:
        return ch
    return kraus_from_choi(ch.choi(), ch.d_in, ch.d_out, ensure_tp=True)


def choi_distance(a: Channel, b: Channel) -> float:
    """Operator-norm distance between Choi matrices (same dimensions required)."""
    return linalg.operator_norm(a.choi() - b.choi())


def channel_from_file(path: str) -> Channel:
    with open(path) as fh:
        return Channel.from_json(json.load(fh))


def hamiltonian_from_file(path: str) -> Hamiltonian:
    with open(path) as fh:
        return Hamiltonian.from_json(json.load(fh))
