"""Covariant code constructions.

Provides the two-dimensional thermodynamic Dicke codes (dense and
compressed), the repetition extension that squeezes any covariant code down
to a qubit logical space, the erasure recovery for thermodynamic codes, and
covariant twirling of recovery channels.

Erased systems are modeled by enlarging each site to a qutrit with basis
(up, down, vac); erasure swaps the site content for |vac>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dicke, linalg
from .channels import Channel, Hamiltonian, matrix_from_json, matrix_to_json

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)

# Site operator basis for the erasure-extended (qutrit) site space.
SITE_Z3 = np.diag([1.0, -1.0, 0.0]).astype(complex)

DENSE_DIM_CAP = 2 ** 20


@dataclass(frozen=True)
class CovariantCode:
    """Encoding isometry intertwining a logical and a physical Hamiltonian.

    ``shift`` records the constant by which the physical generator had to be
    offset to make the intertwining exact after traceless normalization
    (nonzero only for codes whose logical spectrum is not symmetric).
    """

    isometry: np.ndarray
    h_l: Hamiltonian
    h_s: Hamiltonian
    period: float | None = None
    shift: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=complex)
        object.__setattr__(self, "isometry", v)
        d_s, d_l = v.shape
        if np.linalg.norm(linalg.dagger(v) @ v - np.eye(d_l)) > 1e-10 * d_l:
            raise ValueError("isometry is not an isometry within 1e-10")
        if self.h_l.dim != d_l or self.h_s.dim != d_s:
            raise ValueError("Hamiltonian dimensions do not match the isometry")
        resid = v @ self.h_l.matrix - self.h_s.matrix @ v - self.shift * v
        if np.linalg.norm(resid) > 1e-9 * (1.0 + self.h_s.opnorm):
            raise ValueError("isometry does not intertwine the Hamiltonians")

    @property
    def d_l(self) -> int:
        return self.isometry.shape[1]

    @property
    def d_s(self) -> int:
        return self.isometry.shape[0]

    def encode(self, rho_l: np.ndarray) -> np.ndarray:
        return self.isometry @ rho_l @ linalg.dagger(self.isometry)

    def to_json(self) -> dict:
        return {
            "kind": "explicit",
            "isometry": matrix_to_json(self.isometry),
            "h_l": self.h_l.to_json(),
            "h_s": self.h_s.to_json(),
        }


def _thermo_weights(n: int, m: int) -> tuple[int, int]:
    if (n + m) % 2 != 0:
        raise ValueError("n + m must be even")
    if not 3 <= m < n:
        raise ValueError("magnetization must satisfy 3 <= m < n")
    return (n + m) // 2, (n - m) // 2


@dataclass(frozen=True)
class ThermoCode:
    """Compressed thermodynamic code: two Dicke states at magnetization +-m.

    Only few-site matrix elements are ever materialized; everything is a
    binomial identity, so n in the hundreds costs nothing.
    """

    n: int
    m: int

    def __post_init__(self):
        _thermo_weights(self.n, self.m)

    def weight(self, i: int) -> int:
        """Up-spin count of logical state i (0 -> +m sector, 1 -> -m)."""
        return _thermo_weights(self.n, self.m)[i]

    @property
    def h_l(self) -> Hamiltonian:
        return Hamiltonian(self.m * SIGMA_Z)

    def overlap(self, a: int, b: int, ops: dict[int, np.ndarray] | None = None) -> complex:
        """<g_a| (product of site operators) |g_b> for at most two sites."""
        wa, wb = self.weight(a), self.weight(b)
        if not ops:
            return 1.0 + 0.0j if wa == wb else 0.0j
        vals = list(ops.values())
        if len(vals) == 1:
            return dicke.single_site_element(self.n, wa, wb, vals[0])
        if len(vals) == 2:
            return dicke.two_site_element(self.n, wa, wb, vals[0], vals[1])
        raise ValueError("overlap oracle supports at most two-site operators")

    def site_amplitudes(self, a: int) -> tuple[float, float]:
        """Amplitudes (c_up, c_down) of one site inside logical state a."""
        return dicke.single_site_amplitudes(self.n, self.weight(a))

    def offdiagonal_damping(self) -> float:
        """sum_s c_0^s c_1^s: logical coherence surviving one erased site."""
        c0 = self.site_amplitudes(0)
        c1 = self.site_amplitudes(1)
        return c0[0] * c1[0] + c0[1] * c1[1]

    def effective_erasure_rate(self) -> float:
        """Dephasing rate p of the recovered channel under one erased site."""
        return (1.0 - self.offdiagonal_damping()) / 2.0

    def effective_erasure_channel(self) -> Channel:
        """Logical channel after uniform single-site erasure and recovery.

        Diagonal logical elements are restored perfectly; the coherence is
        damped by the single-site amplitude overlap, independent of which
        site was lost — a dephasing channel.
        """
        lam = self.offdiagonal_damping()
        choi = np.zeros((4, 4), dtype=complex)
        choi[0, 0] = choi[3, 3] = 1.0
        choi[0, 3] = choi[3, 0] = lam
        from .channels import kraus_from_choi
        return kraus_from_choi(choi, 2, 2)

    def syndrome_hamiltonian(self) -> Hamiltonian:
        """Physical generator restricted to the one-site-erased syndrome span.

        Basis ordering: (k, i, j) for site k, logical i, magnetization kick
        j in (+1, -1); the generator is diagonal with eigenvalue (+-m) + j.
        """
        diag = []
        for _ in range(self.n):
            for i in (0, 1):
                for j in (1, -1):
                    diag.append((self.m if i == 0 else -self.m) + j)
        return Hamiltonian(np.diag(np.array(diag, dtype=complex)))

    def dense(self) -> CovariantCode:
        return thermo_code(self.n, self.m, dense=True)

    def to_json(self) -> dict:
        return {"kind": "thermo", "n": self.n, "m": self.m}


def thermo_code(n: int, m: int, dense: bool = False):
    """Thermodynamic code on n spins with logical Hamiltonian m Z.

    Compressed mode (default) returns a :class:`ThermoCode` oracle; dense
    mode materializes the 2^n x 2 isometry and the total-sigma_z generator.
    """
    w_plus, w_minus = _thermo_weights(n, m)
    if not dense:
        return ThermoCode(n, m)
    if 2 ** n > DENSE_DIM_CAP:
        raise ValueError("dense mode limited to 2^n <= 2^20")
    v = np.stack([dicke.dense_dicke(n, w_plus), dicke.dense_dicke(n, w_minus)], axis=1)
    h_s = total_site_operator(SIGMA_Z, n)
    return CovariantCode(v.astype(complex), Hamiltonian(m * SIGMA_Z), Hamiltonian(h_s),
                         period=2 * math.pi)


def total_site_operator(op: np.ndarray, n: int) -> np.ndarray:
    """sum_k op_k on n identical sites."""
    d = op.shape[0]
    total = np.zeros((d ** n, d ** n), dtype=complex)
    for k in range(n):
        total += np.kron(np.kron(np.eye(d ** k), op), np.eye(d ** (n - k - 1)))
    return total


def repetition_extension(code: CovariantCode) -> CovariantCode:
    """Append a qubit ancilla and encode only the extremal pair of H_L.

    The new logical space is a qubit with Hamiltonian (spread/2) Z; logical
    0/1 go to the largest/smallest eigenvectors of H_L duplicated into the
    ancilla.  Degenerate extremes are broken by eigenvalue index.
    """
    vals, vecs = linalg.hermitian_eigensystem(code.h_l.matrix)
    spread = float(vals[-1] - vals[0])
    if spread <= 1e-12:
        raise ValueError("logical Hamiltonian has no nontrivial extremes")
    top = code.isometry @ vecs[:, -1]
    bot = code.isometry @ vecs[:, 0]
    d_sa = code.d_s * 2
    v = np.zeros((d_sa, 2), dtype=complex)
    v[:, 0] = np.kron(top, np.array([1.0, 0.0]))
    v[:, 1] = np.kron(bot, np.array([0.0, 1.0]))
    h_c = Hamiltonian((spread / 2.0) * SIGMA_Z)
    h_sa = Hamiltonian(np.kron(code.h_s.matrix, np.eye(2)))
    # columns satisfy v h_c = h_sa v + shift v with h_c eigenvalues +-spread/2,
    # so the midpoint of the extremal pair moves into the shift
    shift = code.shift - float(vals[-1] + vals[0]) / 2.0
    return CovariantCode(v, h_c, h_sa, period=code.period, shift=shift)


def repetition_recovery(d_l: int, basis: np.ndarray | None = None) -> Channel:
    """Decoder from L (x) ancilla-qubit back to the extended logical qubit.

    Matched pairs |0_L 0_A>, |1_L 1_A> decode faithfully; the mismatched
    pair swaps; every remaining L level decodes by its ancilla bit.  The
    third family is empty when d_l = 2.  ``basis`` optionally supplies the
    orthonormal columns identifying |0_L>, |1_L> (default: computational).
    """
    if d_l < 2:
        raise ValueError("logical dimension must be at least 2")
    b = np.eye(d_l, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    def bra(i, a):
        return np.kron(b[:, i], (e0 if a == 0 else e1)).conj()
    kraus = []
    k1 = np.outer(e0, bra(0, 0)) + np.outer(e1, bra(1, 1))
    k2 = np.outer(e0, bra(1, 0)) + np.outer(e1, bra(0, 1))
    kraus.extend([k1, k2])
    for i in range(2, d_l):
        kraus.append(np.outer(e0, bra(i, 0)) + np.outer(e1, bra(i, 1)))
    return Channel(tuple(kraus), 2 * d_l, 2)


def effective_logical_channel(code: CovariantCode, noise: Channel, recovery: Channel) -> Channel:
    """Logical channel R o N o E, assembled one logical matrix unit at a time.

    The recovery may decode either straight to the logical space or back to
    the code subspace of S (then the encoder conjugation finishes the job).
    """
    if isinstance(code, ThermoCode):
        raise TypeError("compressed thermo codes use effective_erasure_channel()")
    v = code.isometry
    d_l = code.d_l
    if noise.d_in != code.d_s:
        raise ValueError("noise input dimension does not match the code")
    if recovery.d_in != noise.d_out:
        raise ValueError("recovery input dimension does not match the noise output")
    decode_to_s = recovery.d_out == code.d_s and code.d_s != d_l
    if not decode_to_s and recovery.d_out != d_l:
        raise ValueError("recovery must decode to the logical or the physical space")
    choi = np.zeros((d_l * d_l, d_l * d_l), dtype=complex)
    for a in range(d_l):
        for b in range(d_l):
            unit = np.outer(v[:, a], v[:, b].conj())
            block = recovery.apply(noise.apply(unit))
            if decode_to_s:
                block = linalg.dagger(v) @ block @ v
            unit_l = np.zeros((d_l, d_l), dtype=complex)
            unit_l[a, b] = 1.0
            choi += np.kron(block, unit_l)
    from .channels import kraus_from_choi
    return kraus_from_choi(choi, d_l, d_l, ensure_tp=True)


def _qutrit_embed_indices(n: int, vac_site: int | None = None) -> np.ndarray:
    """Map qubit-string indices into the qutrit space, optionally fixing one
    site to |vac>; returns the flat qutrit index for each qubit index."""
    n_q = n if vac_site is None else n - 1
    idx = np.arange(2 ** n_q)
    bits = [(idx >> (n_q - 1 - pos)) & 1 for pos in range(n_q)]
    digits = []
    pos = 0
    for site in range(n):
        if site == vac_site:
            digits.append(np.full_like(idx, 2))
        else:
            digits.append(bits[pos])
            pos += 1
    flat = np.zeros_like(idx)
    for d in digits:
        flat = flat * 3 + d
    return flat


def embed_qubit_state(vec: np.ndarray, n: int, vac_site: int | None = None) -> np.ndarray:
    """Lift an n-qubit (or (n-1)-qubit with one erased site) vector to qutrits."""
    out = np.zeros(3 ** n, dtype=complex)
    out[_qutrit_embed_indices(n, vac_site)] = vec
    return out


def thermo_code_embedded(n: int, m: int) -> CovariantCode:
    """Dense thermodynamic code living in the erasure-extended qutrit space."""
    if 3 ** n > 3 ** 6:
        raise ValueError("embedded dense mode limited to n <= 6")
    w_plus, w_minus = _thermo_weights(n, m)
    v = np.stack([embed_qubit_state(dicke.dense_dicke(n, w), n) for w in (w_plus, w_minus)],
                 axis=1)
    h_s = total_site_operator(SITE_Z3, n)
    return CovariantCode(v, Hamiltonian(m * SIGMA_Z), Hamiltonian(h_s), period=2 * math.pi)


def uniform_site_erasure(n: int) -> Channel:
    """Each site erased with probability 1/n: its content swapped for |vac>."""
    d = 3 ** n
    kraus = []
    for k in range(n):
        for s in range(3):
            op = np.zeros((3, 3), dtype=complex)
            op[2, s] = 1.0
            kraus.append(np.sqrt(1.0 / n) *
                         np.kron(np.kron(np.eye(3 ** k), op), np.eye(3 ** (n - k - 1))))
    return Channel(tuple(kraus), d, d)


def thermo_syndrome_state(n: int, m: int, i: int, j: int, k: int) -> np.ndarray:
    """Dense qutrit vector for the erasure syndrome: site k vacant, the rest
    a Dicke state at magnetization (+-m) + j."""
    w_plus, w_minus = _thermo_weights(n, m)
    w = (w_plus if i == 0 else w_minus) - (0 if j == 1 else 1)
    # magnetization of the remaining n-1 spins is (+-m) + j = 2w - (n-1)
    return embed_qubit_state(dicke.dense_dicke(n - 1, w), n, vac_site=k)


def thermo_erasure_recovery(n: int, m: int) -> Channel:
    """Recovery for one erased site of a thermodynamic code (dense, small n).

    Each syndrome state (vacancy at k, magnetization (+-m)+-1) decodes back
    to the matching code state; un-erased code states pass through; the
    orthogonal remainder dumps to |g_0>.
    """
    if 3 ** n > 3 ** 5:
        raise ValueError("dense erasure recovery limited to n <= 5")
    w_plus, w_minus = _thermo_weights(n, m)
    d = 3 ** n
    g = [embed_qubit_state(dicke.dense_dicke(n, w), n) for w in (w_plus, w_minus)]
    kraus = []
    spanned = []
    for k in range(n):
        for j in (1, -1):
            op = np.zeros((d, d), dtype=complex)
            for i in (0, 1):
                syn = thermo_syndrome_state(n, m, i, j, k)
                op += np.outer(g[i], syn.conj())
                spanned.append(syn)
            kraus.append(op)
    kraus.append(np.outer(g[0], g[0].conj()) + np.outer(g[1], g[1].conj()))
    spanned.extend(g)
    proj = np.eye(d) - sum(np.outer(s, s.conj()) for s in spanned)
    vals, vecs = linalg.hermitian_eigensystem(proj)
    for lam, vec in zip(vals, vecs.T):
        if lam > 0.5:
            kraus.append(np.outer(g[0], vec.conj()))
    return Channel(tuple(kraus), d, d)


def _rationalize(values: np.ndarray, max_den: int = 10 ** 4) -> tuple[list[int], int]:
    """Common-denominator integer form of a spectrum, or 'no common period'."""
    fracs = []
    for v in values:
        f = Fraction(float(v)).limit_denominator(max_den)
        if abs(float(f) - float(v)) > 1e-9 * max(1.0, abs(float(v))):
            raise ValueError("no common period: spectrum is not commensurate")
        fracs.append(f)
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    if den > max_den:
        raise ValueError("no common period: spectrum is not commensurate")
    return [int(f * den) for f in fracs], den


def twirl_recovery(rec: Channel, h_l: Hamiltonian, h_s: Hamiltonian,
                   tau: float | None = None) -> Channel:
    """Symmetrize a recovery channel over the joint Hamiltonian flow.

    Averages U_{L,theta} o rec o U_{S,theta}^dag over one common period.
    Because the Choi matrix of the conjugated channel has Fourier support
    bounded by the summed spectral spans, a uniform average over
    span(H_L) + span(H_S) + 1 angles (in grain units) equals the integral
    exactly.
    """
    if h_l.dim != rec.d_out or h_s.dim != rec.d_in:
        raise ValueError("Hamiltonian dimensions must match the recovery channel")
    spec_l = np.linalg.eigvalsh(h_l.matrix)
    spec_s = np.linalg.eigvalsh(h_s.matrix)
    ints, den = _rationalize(np.concatenate([spec_l, spec_s]))
    ints_l, ints_s = ints[:len(spec_l)], ints[len(spec_l):]
    span = (max(ints_l) - min(ints_l)) + (max(ints_s) - min(ints_s))
    n_phi = span + 1
    if n_phi > 10 ** 5:
        raise ValueError("no common period: spectral span too large to twirl exactly")
    period = 2 * math.pi * den
    if tau is not None:
        ratio = tau / period
        if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 1:
            raise ValueError("tau is not a multiple of the common period")
    kraus = []
    for j in range(n_phi):
        theta = period * j / n_phi
        u_l = h_l.unitary(theta)
        u_s_dag = h_s.unitary(-theta)
        for k in rec.kraus:
            kraus.append((u_l @ k @ u_s_dag) / math.sqrt(n_phi))
    return Channel(tuple(kraus), rec.d_in, rec.d_out)


# Raising/lowering site operators (basis index 0 = up).
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


def thermo_erasure_noise(tc: ThermoCode) -> Channel:
    """Encoder followed by uniform single-site erasure, compressed.

    Output lives in the orthonormal syndrome basis indexed (k, i, j) —
    matching :meth:`ThermoCode.syndrome_hamiltonian` — so the channel maps
    the logical qubit into a 4n-dimensional space.
    """
    n = tc.n
    d = 4 * n

    def syn_index(k, i, j):
        return k * 4 + i * 2 + (0 if j == 1 else 1)

    kraus = []
    for k in range(n):
        # losing an up (down) spin kicks the remaining magnetization by -1 (+1)
        for s, j in ((0, -1), (1, 1)):
            op = np.zeros((d, 2), dtype=complex)
            for a in (0, 1):
                op[syn_index(k, a, j), a] = tc.site_amplitudes(a)[s]
            kraus.append(op / math.sqrt(n))
    return Channel(tuple(kraus), 2, d)


def thermo_erasure_syndrome_recovery(tc: ThermoCode) -> Channel:
    """Compressed form of the erasure recovery: each syndrome decodes to its
    logical label, regardless of site and magnetization kick."""
    n = tc.n
    d = 4 * n
    kraus = []
    for k in range(n):
        for jbit in (0, 1):
            op = np.zeros((2, d), dtype=complex)
            for i in (0, 1):
                op[i, k * 4 + i * 2 + jbit] = 1.0
            kraus.append(op)
    return Channel(tuple(kraus), d, 2)


def _raw_depolarizing_vectors(n: int) -> list[tuple[int, np.ndarray | None, int | None, int]]:
    """Spanning set (a, site op, site, magnetization kick) for single-site
    Pauli hits on the code states; sigma_+/- keep each vector in a single
    magnetization sector."""
    raws = []
    for a in (0, 1):
        raws.append((a, None, None, 0))
        for k in range(n):
            raws.append((a, SIGMA_Z.copy(), k, 0))
            raws.append((a, SIGMA_PLUS, k, 2))
            raws.append((a, SIGMA_MINUS, k, -2))
    return raws


def _raw_overlap(tc: ThermoCode, va, vb) -> complex:
    a, op_a, k_a, _ = va
    b, op_b, k_b, _ = vb
    ops: dict[int, np.ndarray] = {}
    if op_a is not None and op_b is not None:
        if k_a == k_b:
            ops[k_a] = linalg.dagger(op_a) @ op_b
        else:
            ops[k_a] = linalg.dagger(op_a)
            ops[k_b] = op_b
    elif op_a is not None:
        ops[k_a] = linalg.dagger(op_a)
    elif op_b is not None:
        ops[k_b] = op_b
    return tc.overlap(a, b, ops if ops else None)


def thermo_depolarizing_noise(tc: ThermoCode) -> tuple[Channel, Hamiltonian]:
    """Encoder followed by uniform single-site depolarizing, compressed.

    Each site is hit with probability 1/n by the Kraus family U_i/2 over the
    Pauli basis.  The physical support — code states plus single Pauli hits —
    is orthonormalized sector by sector from oracle Gram matrices; returns
    the compressed channel and the physical generator on that support.
    """
    n = tc.n
    raws = _raw_depolarizing_vectors(n)
    s = len(raws)
    gram = np.zeros((s, s), dtype=complex)
    for x in range(s):
        for y in range(x, s):
            val = _raw_overlap(tc, raws[x], raws[y])
            gram[x, y] = np.conj(val)
            gram[y, x] = val
    # orthonormalize within each magnetization sector
    cutoff = linalg.spectral_cutoff()
    coords = []   # columns of T: basis vector = sum_s raws[s] T[s, t]
    sector_of = []
    for sector in sorted({(tc.m if a == 0 else -tc.m) + kick for a, _, _, kick in raws}):
        rows = [idx for idx, (a, _, _, kick) in enumerate(raws)
                if (tc.m if a == 0 else -tc.m) + kick == sector]
        sub = gram[np.ix_(rows, rows)]
        vals, vecs = linalg.hermitian_eigensystem(sub)
        tol = cutoff * max(float(vals[-1]), 1e-300)
        for lam, vec in zip(vals, vecs.T):
            if lam > max(tol, 1e-12):
                col = np.zeros(s, dtype=complex)
                col[rows] = vec / math.sqrt(lam)
                coords.append(col)
                sector_of.append(sector)
    t_mat = np.stack(coords, axis=1)
    dim = t_mat.shape[1]
    # raw-coefficient expansions of (U_i / 2)|g_a> at each site
    paulis = {
        "I": [(1.0, None, 0)],
        "X": [(1.0, "P", 2), (1.0, "M", -2)],
        "Y": [(-1j, "P", 2), (1j, "M", -2)],
        "Z": [(1.0, "Z", 0)],
    }
    def raw_index(a, label, k):
        base = a * (3 * n + 1)
        if label is None:
            return base
        offset = {"Z": 0, "P": 1, "M": 2}[label]
        return base + 1 + 3 * k + offset
    bra = linalg.dagger(t_mat) @ gram   # <b_t | raw_s>
    kraus = []
    for k in range(n):
        for name in ("I", "X", "Y", "Z"):
            op = np.zeros((dim, 2), dtype=complex)
            for a in (0, 1):
                coeff = np.zeros(s, dtype=complex)
                for amp, label, _ in paulis[name]:
                    coeff[raw_index(a, label, k)] = amp
                op[:, a] = bra @ coeff
            kraus.append(op / (2.0 * math.sqrt(n)))
    h_phys = Hamiltonian(np.diag(np.array(sector_of, dtype=complex)))
    return Channel(tuple(kraus), 2, dim), h_phys


def code_from_json(data: dict):
    if data["kind"] == "thermo":
        return ThermoCode(int(data["n"]), int(data["m"]))
    if data["kind"] == "explicit":
        h_l = Hamiltonian.from_json(data["h_l"])
        h_s = Hamiltonian.from_json(data["h_s"])
        v = matrix_from_json(data["isometry"], h_s.dim, h_l.dim)
        return CovariantCode(v, h_l, h_s)
    raise ValueError(f"unknown code kind {data['kind']!r}")
