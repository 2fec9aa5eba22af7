"""Linear-combination-of-unitaries factorization of the two-body term.

Soft part: for every half-space G and parity channel j the Hermitian matrix
``eta_j(G)`` is diagonalized, ``eta = u diag(f) u^dagger``. The two-body
operator becomes ``sum_{G,j} v'(G) (sum_pq eta_pq E_pq)^2``.

PAW part: the scaled atomic tensor on the ``i1 <= i2`` sector is diagonalized,
``M = O diag(eps) O^T``, and every eigenvector gives a Hermitian orbital
matrix ``L = u diag(f) u^dagger`` entering as ``eps/2 (sum_pq L_pq E_pq)^2``.
The sign of ``eps`` is kept apart from its magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .pwbasis import CoulombKernel
from .toyscf import KAPPA_ORACLE_MAX_ORBITALS, HamiltonianInstance, PairDensityTensor, PawBlock

HERMITIAN_TOL = 1e-10
DEFAULT_FLOOR = 1e-10


@dataclass
class SoftFactor:
    miller: tuple
    gnorm: float
    j: int
    weight: float
    f: np.ndarray
    u: np.ndarray

    def matrix(self) -> np.ndarray:
        return (self.u * self.f) @ self.u.conj().T


@dataclass
class PawFactor:
    atom_id: int
    pair: tuple
    eps: float
    sign: int
    f: np.ndarray
    u: np.ndarray

    def matrix(self) -> np.ndarray:
        return (self.u * self.f) @ self.u.conj().T


@dataclass
class OneBodyTerm:
    h: np.ndarray
    h_corrected: np.ndarray
    h_prime: np.ndarray
    eps_prime: np.ndarray


@dataclass
class FactorizedHamiltonian:
    constant: float
    one_body: OneBodyTerm
    soft: list
    paw: list
    n_orbitals: int
    n_pw: int
    volume: float
    g_min: float
    paw_sizes: list = field(default_factory=list)
    n_pw_orbital: int | None = None
    truncation_delta: float | None = None
    floor: float | None = None

    @property
    def n_soft_terms(self) -> int:
        return len(self.soft)

    def surviving_items(self) -> int:
        """Nonzero eigenvalues (each carrying one rotation column) over all factors."""
        return int(sum(np.count_nonzero(x.f) for x in self.soft) + sum(np.count_nonzero(x.f) for x in self.paw))

    def nominal_items(self) -> int:
        return (len(self.soft) + len(self.paw)) * self.n_orbitals


def _fix_phases(u: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    idx = np.argmax(np.abs(u) * (1 + 1e-12 * np.arange(u.shape[0], 0, -1))[:, None], axis=0)
    piv = u[idx, np.arange(u.shape[1])]
    phase = np.where(np.abs(piv) > 0, piv / np.where(np.abs(piv) > 0, np.abs(piv), 1.0), 1.0)
    return u / phase


def hermitian_eig(m: np.ndarray, label: str = "") -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending |eigenvalue| with fixed eigenvector phases."""
    dev = np.abs(m - m.conj().T).max(initial=0.0)
    if dev > HERMITIAN_TOL:
        raise ValueError(f"matrix {label} is not Hermitian (deviation {dev:.3e})")
    try:
        f, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigendecomposition failed for {label}: {exc}") from None
    order = np.argsort(-np.abs(f), kind="stable")
    return f[order], _fix_phases(u[:, order])


def factor_soft(pair: PairDensityTensor, kernel: CoulombKernel) -> list:
    if kernel.basis.size != pair.grid.size:
        raise ValueError("kernel and pair density are on different grids")
    eta = pair.eta()
    weights = kernel.halfspace_weights
    grid = pair.grid
    out = []
    for h, gi in enumerate(grid.halfspace):
        miller = tuple(int(x) for x in grid.miller[gi])
        for j in (0, 1):
            f, u = hermitian_eig(eta[j, h], f"G={miller}, j={j}")
            out.append(SoftFactor(miller, float(grid.gnorm[gi]), j, float(weights[h]), f, u))
    return out


def compound_pairs(n_a: int) -> list:
    return [(i, k) for i in range(n_a) for k in range(i, n_a)]


def scaled_pair_matrix(ctensor: np.ndarray) -> np.ndarray:
    """``(1/2)^(delta_12 + delta_34) C`` restricted to the ``i1 <= i2, i3 <= i4`` sector."""
    pairs = compound_pairs(ctensor.shape[0])
    m = np.empty((len(pairs), len(pairs)))
    for x, (a, b) in enumerate(pairs):
        for y, (c, d) in enumerate(pairs):
            m[x, y] = ctensor[a, b, c, d] * 0.5 ** ((a == b) + (c == d))
    return m


def factor_paw(blocks) -> list:
    out = []
    for blk in blocks:
        sym = blk.symmetry_error()
        if sym > HERMITIAN_TOL:
            raise ValueError(f"PAW block {blk.atom_id}: ctensor is not symmetric (deviation {sym:.3e})")
        pairs = compound_pairs(blk.n_a)
        m = scaled_pair_matrix(blk.ctensor)
        eps, O = np.linalg.eigh(0.5 * (m + m.T))
        order = np.argsort(-np.abs(eps), kind="stable")
        eps, O = eps[order], np.real(_fix_phases(O[:, order]))
        scale = max(1.0, float(np.abs(eps).max(initial=0.0)))
        D = blk.pair_matrices()
        sym_D = np.stack([D[:, :, a, b] + D[:, :, b, a] for a, b in pairs])
        for k, label in enumerate(pairs):
            if abs(eps[k]) <= 1e-14 * scale:
                continue
            L = np.einsum("x,xpq->pq", O[:, k], sym_D)
            f, u = hermitian_eig(L, f"atom {blk.atom_id}, pair {label}")
            out.append(PawFactor(blk.atom_id, label, float(abs(eps[k])), 1 if eps[k] > 0 else -1, f, u))
    return out


def _factor_terms(factors: FactorizedHamiltonian):
    """Yield ``(w, M)`` with ``kappa_pqrs = sum w conj(M_pq) M_rs``."""
    for s in factors.soft:
        yield 2.0 * s.weight, s.matrix()
    for p in factors.paw:
        yield p.sign * p.eps, p.matrix()


def reconstruct_kappa(factors: FactorizedHamiltonian) -> np.ndarray:
    n = factors.n_orbitals
    if n > KAPPA_ORACLE_MAX_ORBITALS:
        raise ValueError(f"reconstruct_kappa is limited to N_b <= {KAPPA_ORACLE_MAX_ORBITALS} (got {n})")
    kappa = np.zeros((n,) * 4, dtype=complex)
    for w, m in _factor_terms(factors):
        if w != 0 and np.any(m):
            kappa += w * np.einsum("pq,rs->pqrs", m.conj(), m)
    return kappa


def _one_body_from_sums(h, exchange_sum, coulomb_sum) -> OneBodyTerm:
    h = np.asarray(h, dtype=complex)
    h_corr = h - 0.5 * exchange_sum
    h_prime = h_corr + coulomb_sum
    for name, m in (("h_corrected", h_corr), ("h_prime", h_prime)):
        dev = np.abs(m - m.conj().T).max(initial=0.0)
        if dev > HERMITIAN_TOL:
            raise ValueError(f"{name} is not Hermitian (deviation {dev:.3e}); kappa symmetries are inconsistent")
    h_corr = 0.5 * (h_corr + h_corr.conj().T)
    h_prime = 0.5 * (h_prime + h_prime.conj().T)
    return OneBodyTerm(h, h_corr, h_prime, np.linalg.eigvalsh(h_prime))


def effective_one_body(h, kappa) -> OneBodyTerm:
    """One-body terms from a dense ``kappa``.

    ``h_corrected = h - 1/2 sum_r kappa_rprq`` and
    ``h_prime = h + 1/2 sum_r (2 kappa_rrpq - kappa_rprq)``.
    """
    kappa = np.asarray(kappa)
    return _one_body_from_sums(h, np.einsum("rprq->pq", kappa), np.einsum("rrpq->pq", kappa))


def effective_one_body_from_factors(h, factors) -> OneBodyTerm:
    """Same contraction as ``effective_one_body`` evaluated factor by factor."""
    n = np.asarray(h).shape[0]
    exch = np.zeros((n, n), dtype=complex)
    coul = np.zeros((n, n), dtype=complex)
    terms = factors if not isinstance(factors, FactorizedHamiltonian) else _factor_terms(factors)
    for w, m in terms:
        exch += w * (m @ m)
        coul += w * np.trace(m) * m
    return _one_body_from_sums(h, exch, coul)


def factorize(instance: HamiltonianInstance, delta: float | None = None, floor: float = DEFAULT_FLOOR) -> FactorizedHamiltonian:
    """Factor soft and PAW terms, build the one-body term, optionally truncate."""
    soft = factor_soft(instance.pair_density, instance.kernel)
    paw = factor_paw(instance.paw_blocks)
    grid = instance.pair_density.grid
    gn = grid.gnorm
    g_min = float(gn[gn > 1e-12].min()) if np.any(gn > 1e-12) else 0.0
    fh = FactorizedHamiltonian(
        constant=float(instance.constant),
        one_body=None,
        soft=soft,
        paw=paw,
        n_orbitals=instance.n_orbitals,
        n_pw=grid.size,
        volume=grid.cell.volume,
        g_min=g_min,
        paw_sizes=[b.n_a for b in instance.paw_blocks],
        n_pw_orbital=None if instance.orbitals is None else instance.orbitals.basis.size,
    )
    fh.one_body = effective_one_body_from_factors(instance.h, fh)
    if delta is not None:
        fh = truncate(fh, delta, floor)
    return fh


def truncate(factors: FactorizedHamiltonian, delta: float, floor: float = DEFAULT_FLOOR) -> FactorizedHamiltonian:
    """Zero soft eigenvalues with ``|f| <= delta |G|`` and all entries below ``floor``.

    At G=0 the threshold is ``delta * g_min``. The one-body term is kept as
    computed from the untruncated factors.
    """
    if not delta >= 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    soft = []
    for s in factors.soft:
        g = s.gnorm if s.gnorm > 1e-12 else factors.g_min
        keep = (np.abs(s.f) > delta * g) & (np.abs(s.f) > floor)
        soft.append(replace(s, f=np.where(keep, s.f, 0.0)))
    paw = [replace(p, f=np.where(np.abs(p.f) > floor, p.f, 0.0)) for p in factors.paw]
    return replace(factors, soft=soft, paw=paw, truncation_delta=float(delta), floor=float(floor))
