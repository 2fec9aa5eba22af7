"""Dense Fock-space matrices and block-encoding identities for small systems.

Spin orbitals are bit positions: ``p`` for spin up and ``p + N_b`` for spin
down, so a state is an integer bitstring. Creation and annihilation operators
carry the sign ``(-1)^(number of occupied modes below the target)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import expm, logm

from .factorize import FactorizedHamiltonian, OneBodyTerm

MAX_ORBITALS = 5
MAX_DIMENSION = 2000


class FockSpace:
    """Fixed-particle-number sector of ``2 * n_orbitals`` spin orbitals.

    With ``sz`` given (in units of 1/2, i.e. ``n_up - n_down``) only states of
    that spin projection are kept.
    """

    def __init__(self, n_orbitals: int, n_electrons: int, sz: int | None = None):
        if not 1 <= n_orbitals <= MAX_ORBITALS:
            raise ValueError(f"n_orbitals must be in 1..{MAX_ORBITALS}")
        if not 0 <= n_electrons <= 2 * n_orbitals:
            raise ValueError("n_electrons out of range")
        self.n_orbitals = n_orbitals
        self.n_electrons = n_electrons
        self.sz = sz
        n_modes = 2 * n_orbitals
        states = []
        for occ in combinations(range(n_modes), n_electrons):
            s = sum(1 << k for k in occ)
            up = sum(1 for k in occ if k < n_orbitals)
            if sz is None or 2 * up - n_electrons == sz:
                states.append(s)
        self.states = sorted(states)
        if len(self.states) > MAX_DIMENSION:
            raise ValueError(f"Fock space dimension {len(self.states)} exceeds {MAX_DIMENSION}")
        self.index = {s: i for i, s in enumerate(self.states)}
        self._cache = None

    @property
    def dimension(self) -> int:
        return len(self.states)

    def excitation_operator(self, p: int, q: int) -> np.ndarray:
        """``E_pq = sum_sigma a^dagger_{p sigma} a_{q sigma}``."""
        n = self.n_orbitals
        if not (0 <= p < n and 0 <= q < n):
            raise IndexError(f"orbital index out of range: ({p}, {q})")
        if self._cache is not None:
            return self._cache[p, q]
        out = np.zeros((self.dimension, self.dimension))
        for col, s in enumerate(self.states):
            for sigma in (0, 1):
                lo, hi = q + sigma * n, p + sigma * n
                if not s >> lo & 1:
                    continue
                s1 = s ^ (1 << lo)
                sign = (-1) ** bin(s1 & ((1 << lo) - 1)).count("1")
                if s1 >> hi & 1:
                    continue
                sign *= (-1) ** bin(s1 & ((1 << hi) - 1)).count("1")
                out[self.index[s1 | (1 << hi)], col] += sign
        return out

    def all_excitations(self) -> np.ndarray:
        """Stacked ``E[p, q]`` for all orbital pairs, cached."""
        if self._cache is None:
            n = self.n_orbitals
            self._cache = np.array([[self.excitation_operator(p, q) for q in range(n)] for p in range(n)])
        return self._cache

    def number_operator(self) -> np.ndarray:
        e = self.all_excitations()
        return np.einsum("ppij->ij", e)

    def sz_operator(self) -> np.ndarray:
        n = self.n_orbitals
        diag = [bin(s & ((1 << n) - 1)).count("1") - bin(s >> n).count("1") for s in self.states]
        return 0.5 * np.diag(np.array(diag, dtype=float))

    def one_body(self, m: np.ndarray) -> np.ndarray:
        """``sum_pq m_pq E_pq``."""
        return np.tensordot(np.asarray(m), self.all_excitations(), axes=([0, 1], [0, 1]))


def _h_corrected(one_body) -> np.ndarray:
    return one_body.h_corrected if isinstance(one_body, OneBodyTerm) else np.asarray(one_body)


def fock_hamiltonian_direct(one_body, kappa, constant: float, fock: FockSpace) -> np.ndarray:
    """``H0 + sum h_corrected_pq E_pq + 1/2 sum kappa_pqrs E_qp E_rs``.

    ``one_body`` is a OneBodyTerm or the corrected one-body matrix itself.
    """
    kappa = np.asarray(kappa)
    e = fock.all_excitations()
    H = constant * np.eye(fock.dimension) + fock.one_body(_h_corrected(one_body))
    inner = np.tensordot(kappa, e, axes=([2, 3], [0, 1]))  # [p, q] -> sum_rs kappa_pqrs E_rs
    for p in range(fock.n_orbitals):
        for q in range(fock.n_orbitals):
            H = H + 0.5 * e[q, p] @ inner[p, q]
    return H


def fock_hamiltonian_factored(factors: FactorizedHamiltonian, fock: FockSpace, explicit_rotation: bool = False) -> np.ndarray:
    """Assemble the Hamiltonian from soft and PAW factors.

    Each factor contributes ``w/2 A^2`` with ``A = sum_pq M_pq E_pq``, where
    ``w = 2 v'(G)`` for soft factors and ``sign * |eps|`` for PAW factors.
    With ``explicit_rotation`` ``A`` is formed as ``U (sum_p f_p E_pp) U^dagger``
    using the many-body orbital rotation generated by ``log(u)``.
    """
    H = factors.constant * np.eye(fock.dimension) + fock.one_body(factors.one_body.h_corrected)
    terms = [(2.0 * s.weight, s) for s in factors.soft] + [(p.sign * p.eps, p) for p in factors.paw]
    for w, fac in terms:
        if w == 0 or not np.any(fac.f):
            continue
        if explicit_rotation:
            A = rotated_number_sum(fac.u, fac.f, fock)
        else:
            A = fock.one_body(fac.matrix())
        H = H + 0.5 * w * (A @ A)
    return H


def orbital_rotation(u: np.ndarray, fock: FockSpace) -> np.ndarray:
    """Many-body unitary with ``U a^dagger_p U^dagger = sum_r a^dagger_r u_rp``."""
    gen = logm(np.asarray(u, dtype=complex))
    return expm(fock.one_body(gen))


def rotated_number_sum(u, f, fock: FockSpace) -> np.ndarray:
    U = orbital_rotation(u, fock)
    e = fock.all_excitations()
    diag = np.einsum("p,ppij->ij", np.asarray(f), e)
    return U @ diag @ U.conj().T


def ground_energy(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(H)[0])


def spectral_halfwidth(H: np.ndarray) -> float:
    w = np.linalg.eigvalsh(H)
    return 0.5 * float(w[-1] - w[0])


@dataclass
class BlockEncoding:
    matrix: np.ndarray
    alpha: float
    coding_dim: int

    def top_left(self) -> np.ndarray:
        m = self.coding_dim
        return self.matrix[:m, :m]


def hermitian_block_encoding(A, alpha: float) -> BlockEncoding:
    """Hermitian unitary ``[[A/alpha, B], [B, -A/alpha]]`` with ``B = sqrt(1 - (A/alpha)^2)``."""
    A = np.asarray(A, dtype=complex)
    m = A.shape[0]
    if np.abs(A - A.conj().T).max(initial=0.0) > 1e-12:
        raise ValueError("A must be Hermitian")
    a, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    norm = float(np.abs(a).max(initial=0.0))
    if alpha <= 0 or norm > alpha * (1 + 1e-12):
        raise ValueError(f"subnormalization too small: alpha={alpha} < ||A||={norm}")
    x = np.clip(a / alpha, -1.0, 1.0)
    rad = 1.0 - x**2
    rad = np.where((rad < 0) & (rad >= -1e-14), 0.0, rad)
    top = (V * x) @ V.conj().T
    off = (V * np.sqrt(rad)) @ V.conj().T
    U = np.block([[top, off], [off, -top]])
    return BlockEncoding(U, float(alpha), m)


def reflection(m: int, flipped: bool = False) -> np.ndarray:
    d = np.concatenate([np.ones(m), -np.ones(m)])
    return np.diag(-d if flipped else d)


def chebyshev_square(be: BlockEncoding, flipped: bool = False, tol: float = 1e-12) -> np.ndarray:
    """``U R U``; its top-left block is ``T_2(A/alpha) = 2 (A/alpha)^2 - 1``.

    With the flipped reflection ``diag(-1, +1)`` the block is ``-T_2``.
    """
    m = be.coding_dim
    W = be.matrix @ reflection(m, flipped) @ be.matrix
    x = be.top_left()
    expected = 2.0 * x @ x - np.eye(m)
    if flipped:
        expected = -expected
    dev = np.abs(W[:m, :m] - expected).max(initial=0.0)
    if dev > tol:
        raise ArithmeticError(f"Chebyshev square identity violated by {dev:.3e}")
    return W
