"""Desk-scale Hamiltonian instances.

A dense plane-wave one-electron solver for a periodic sum of Gaussian wells,
orbital-pair densities on the difference grid, synthetic PAW atomic blocks and
the brute-force two-body tensor built from them.

Conventions
-----------
Orbitals are ``psi_p(r) = V^{-1/2} sum_g c_{gp} exp(i g.r)`` with orthonormal
coefficient columns. Pair-density coefficients are cell-integrated,
``C_pq(G) = int_V exp(-i G.r) psi_p^*(r) psi_q(r) dr = sum_g c_{gp}^* c_{g+G,q}``,
so ``C(0)`` is the identity and ``kappa_pqrs = sum_G v(G) C_pq(G)^* C_rs(G)``
with ``v(G) = 4 pi / (V G^2)`` is in Hartree.

Projector overlaps are stored as ``P[p, i] = <p_i|psi_p>`` so that the atomic
pair-density matrix is ``D[p, q, i1, i2] = conj(P[p, i1]) * P[q, i2]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pwbasis import (
    Cell,
    CoulombKernel,
    PlaneWaveBasis,
    build_basis,
    coulomb_kernel,
    difference_grid,
)

KAPPA_ORACLE_MAX_ORBITALS = 16


@dataclass(frozen=True)
class GaussianWell:
    center: tuple
    depth: float
    width: float


@dataclass
class OrbitalSet:
    basis: PlaneWaveBasis
    coefficients: np.ndarray
    eigenvalues: np.ndarray
    n_occ: int

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if self.coefficients.shape != (self.basis.size, len(self.eigenvalues)):
            raise ValueError("coefficient matrix does not match basis/eigenvalues")
        if not 0 <= self.n_occ <= self.n_orbitals:
            raise ValueError("n_occ out of range")

    @property
    def n_orbitals(self) -> int:
        return self.coefficients.shape[1]

    @property
    def n_virt(self) -> int:
        return self.n_orbitals - self.n_occ

    def orthonormality_error(self) -> float:
        c = self.coefficients
        return float(np.abs(c.conj().T @ c - np.eye(c.shape[1])).max())

    def subset(self, idx) -> "OrbitalSet":
        idx = np.asarray(idx)
        n_occ = int(np.sum(idx < self.n_occ))
        return OrbitalSet(self.basis, self.coefficients[:, idx], self.eigenvalues[idx], n_occ)


@dataclass
class PairDensityTensor:
    """Raw pair-density coefficients ``raw[G, p, q] = C_pq(G)`` on ``grid``."""

    grid: PlaneWaveBasis
    raw: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=complex)
        if self.raw.ndim != 3 or self.raw.shape[0] != self.grid.size:
            raise ValueError("raw pair density must have shape (n_G, N_b, N_b)")
        if self.raw.shape[1] != self.raw.shape[2]:
            raise ValueError("pair density matrices must be square")

    @property
    def n_orbitals(self) -> int:
        return self.raw.shape[1]

    def eta(self) -> np.ndarray:
        """Even/odd Hermitian parts on the half-space, shape ``(2, n_half, N_b, N_b)``."""
        half = self.grid.halfspace
        plus = self.raw[half]
        minus = self.raw[self.grid.neg_index[half]]
        return np.stack([(plus + minus) / 2.0, (plus - minus) / 2.0j])

    def symmetry_error(self) -> float:
        """max |C_pq(G)^* - C_qp(-G)|."""
        neg = self.raw[self.grid.neg_index]
        return float(np.abs(self.raw.conj() - neg.transpose(0, 2, 1)).max(initial=0.0))


@dataclass
class PawBlock:
    atom_id: int
    proj_overlaps: np.ndarray
    ctensor: np.ndarray

    def __post_init__(self):
        self.proj_overlaps = np.asarray(self.proj_overlaps, dtype=complex)
        self.ctensor = np.asarray(self.ctensor, dtype=float)
        n_a = self.proj_overlaps.shape[1]
        if self.ctensor.shape != (n_a,) * 4:
            raise ValueError(f"ctensor must have shape {(n_a,) * 4}, got {self.ctensor.shape}")
        if not np.all(np.isfinite(self.ctensor)):
            raise ValueError("ctensor has non-finite entries")

    @property
    def n_a(self) -> int:
        return self.proj_overlaps.shape[1]

    def pair_matrices(self) -> np.ndarray:
        """``D[p, q, i1, i2] = conj(P[p, i1]) P[q, i2]``."""
        P = self.proj_overlaps
        return np.einsum("pa,qb->pqab", P.conj(), P)

    def symmetry_error(self) -> float:
        """Largest violation of pair-swap and within-pair index symmetry."""
        c = self.ctensor
        return float(
            max(
                np.abs(c - c.transpose(2, 3, 0, 1)).max(),
                np.abs(c - c.transpose(1, 0, 2, 3)).max(),
                np.abs(c - c.transpose(0, 1, 3, 2)).max(),
            )
        )


@dataclass
class HamiltonianInstance:
    h: np.ndarray
    pair_density: PairDensityTensor
    kernel: CoulombKernel
    paw_blocks: list = field(default_factory=list)
    constant: float = 0.0
    orbitals: OrbitalSet | None = None
    cutoff_ev: float | None = None

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        n = self.h.shape[0]
        if self.h.shape != (n, n):
            raise ValueError("h must be square")
        herm = np.abs(self.h - self.h.conj().T).max(initial=0.0)
        if herm > 1e-12:
            raise ValueError(f"h is not Hermitian (max deviation {herm:.3e})")
        if self.pair_density.n_orbitals != n:
            raise ValueError("pair density and h disagree on the orbital count")
        if self.kernel.basis.size != self.pair_density.grid.size:
            raise ValueError("kernel and pair density live on different grids")
        for blk in self.paw_blocks:
            if blk.proj_overlaps.shape[0] != n:
                raise ValueError(f"PAW block {blk.atom_id} has wrong orbital dimension")

    @property
    def n_orbitals(self) -> int:
        return self.h.shape[0]

    @property
    def cell(self) -> Cell:
        return self.pair_density.grid.cell


def _well_potential(basis: PlaneWaveBasis, wells: Sequence[GaussianWell]) -> np.ndarray:
    """Fourier coefficients of the local potential on the difference grid.

    Returns ``(grid, vg)`` with ``vg[i] = V^{-1} int exp(-i G.r) V(r) dr``.
    """
    grid = difference_grid(basis)
    vol = basis.cell.volume
    vg = np.zeros(grid.size, dtype=complex)
    g2 = grid.g2
    for w in wells:
        center = np.asarray(w.center, dtype=float)
        amp = -w.depth * (2.0 * np.pi * w.width**2) ** 1.5 / vol
        vg += amp * np.exp(-0.5 * g2 * w.width**2) * np.exp(-1j * grid.gvecs @ center)
    return grid, vg


def one_electron_matrix(basis: PlaneWaveBasis, wells: Sequence[GaussianWell], shift=0.0) -> np.ndarray:
    """Dense ``1/2 |g|^2 delta + V(g - g')`` in the plane-wave basis."""
    grid, vg = _well_potential(basis, wells)
    index = grid.index_of()
    m = basis.miller
    diff = (m[:, None, :] - m[None, :, :]).reshape(-1, 3)
    pos = np.array([index[tuple(d)] for d in diff.tolist()]).reshape(basis.size, basis.size)
    H = vg[pos]
    H[np.diag_indices_from(H)] += 0.5 * basis.g2 + shift
    return H


def solve_mean_field(cell: Cell, cutoff_ev: float, wells, n_bands: int, n_occ: int = 1, shift=0.0) -> OrbitalSet:
    """Lowest ``n_bands`` eigenpairs of the one-electron plane-wave Hamiltonian."""
    basis = build_basis(cell, cutoff_ev)
    if n_bands > basis.size:
        raise ValueError(f"n_bands={n_bands} exceeds the {basis.size} plane waves")
    H = one_electron_matrix(basis, wells, shift)
    dev = np.abs(H - H.conj().T).max()
    if dev > 1e-10:
        raise ValueError(f"assembled one-electron matrix is not Hermitian ({dev:.2e})")
    e, c = np.linalg.eigh(0.5 * (H + H.conj().T))
    return OrbitalSet(basis, c[:, :n_bands], e[:n_bands], n_occ)


def _pair_coefficients(basis: PlaneWaveBasis, left, right, grid: PlaneWaveBasis) -> np.ndarray:
    """``out[G, p, q] = sum_g conj(left[g, p]) right[g + G, q]`` on ``grid``."""
    index = grid.index_of()
    m = basis.miller
    n_g = basis.size
    diff = (m[None, :, :] - m[:, None, :]).reshape(-1, 3)  # row g, column g' -> g' - g
    pos = np.array([index.get(tuple(d), -1) for d in diff.tolist()])
    order = np.argsort(pos, kind="stable")
    pos_sorted = pos[order]
    starts = np.searchsorted(pos_sorted, np.arange(grid.size))
    stops = np.searchsorted(pos_sorted, np.arange(grid.size), side="right")
    rows, cols = np.divmod(order, n_g)
    out = np.zeros((grid.size, left.shape[1], right.shape[1]), dtype=complex)
    lc = left.conj()
    for k in range(grid.size):
        if starts[k] == stops[k]:
            continue
        sl = slice(starts[k], stops[k])
        out[k] = lc[rows[sl]].T @ right[cols[sl]]
    return out


def pair_density(orbitals: OrbitalSet, grid: PlaneWaveBasis | None = None) -> PairDensityTensor:
    """Cell-integrated pair-density coefficients by discrete convolution.

    ``grid`` defaults to the full difference grid, which is exact. A smaller
    grid (e.g. the orbital grid itself) drops the outer shells.
    """
    if grid is None:
        grid = difference_grid(orbitals.basis)
    c = orbitals.coefficients
    return PairDensityTensor(grid, _pair_coefficients(orbitals.basis, c, c, grid))


def random_pair_density(grid: PlaneWaveBasis, n_b: int, rng, scale=1.0) -> PairDensityTensor:
    """Random coefficients obeying ``C(-G) = C(G)^dagger`` with ``C(0) = 1``."""
    raw = np.zeros((grid.size, n_b, n_b), dtype=complex)
    for i in grid.halfspace[1:]:
        blk = rng.normal(size=(n_b, n_b)) + 1j * rng.normal(size=(n_b, n_b))
        blk *= scale * np.exp(-0.1 * grid.g2[i])
        raw[i] = blk
        raw[grid.neg_index[i]] = blk.conj().T
    raw[grid.halfspace[0]] = np.eye(n_b)
    return PairDensityTensor(grid, raw)


def soft_kappa(pair: PairDensityTensor, kernel: CoulombKernel) -> np.ndarray:
    """Soft two-body tensor as the half-space sum over both parity channels."""
    eta = pair.eta()
    w = kernel.halfspace_weights
    return 2.0 * np.einsum("h,jhpq,jhrs->pqrs", w, eta.conj(), eta, optimize=True)


def paw_kappa(blocks, n_b: int) -> np.ndarray:
    kappa = np.zeros((n_b,) * 4, dtype=complex)
    for blk in blocks:
        D = blk.pair_matrices()
        kappa += np.einsum("abcd,pqab,rscd->pqrs", blk.ctensor, D.conj(), D, optimize=True)
    return kappa


def kappa_oracle(instance: HamiltonianInstance) -> np.ndarray:
    """Dense ``kappa_pqrs``: soft half-space sum plus atomic PAW corrections."""
    n_b = instance.n_orbitals
    if n_b > KAPPA_ORACLE_MAX_ORBITALS:
        raise ValueError(
            f"kappa_oracle is limited to N_b <= {KAPPA_ORACLE_MAX_ORBITALS} (got {n_b})"
        )
    return soft_kappa(instance.pair_density, instance.kernel) + paw_kappa(instance.paw_blocks, n_b)


def synthesize_paw_block(n_a: int, n_b: int, seed: int, magnitude: float = 1.0, atom_id: int = 0) -> PawBlock:
    """Random PAW block with a symmetric, generally indefinite coefficient tensor."""
    if n_a < 1:
        raise ValueError("n_a must be >= 1")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n_a) for j in range(i, n_a)]
    m = rng.normal(size=(len(pairs), len(pairs)))
    m = magnitude * 0.5 * (m + m.T)
    c = np.zeros((n_a,) * 4)
    for x, (i1, i2) in enumerate(pairs):
        for y, (i3, i4) in enumerate(pairs):
            for a, b in {(i1, i2), (i2, i1)}:
                for cc, d in {(i3, i4), (i4, i3)}:
                    c[a, b, cc, d] = m[x, y]
    P = (rng.normal(size=(n_b, n_a)) + 1j * rng.normal(size=(n_b, n_a))) / np.sqrt(2 * n_b)
    return PawBlock(atom_id, P, c)


def gaussian_projector_overlaps(orbitals: OrbitalSet, center, widths) -> np.ndarray:
    """``<p_i|psi_p>`` for normalized s-type Gaussian projectors at ``center``."""
    basis = orbitals.basis
    vol = basis.cell.volume
    phase = np.exp(1j * basis.gvecs @ np.asarray(center, dtype=float))
    cols = []
    for s in widths:
        norm = (np.pi * s**2) ** -0.75
        ft = norm * (2 * np.pi * s**2) ** 1.5 * np.exp(-0.5 * basis.g2 * s**2) * phase
        cols.append(orbitals.coefficients.T @ ft / np.sqrt(vol))
    return np.array(cols).T


def instance_from_orbitals(
    orbitals: OrbitalSet,
    paw_blocks=(),
    constant=0.0,
    h=None,
    regularization="spherical_truncation",
    v0=None,
) -> HamiltonianInstance:
    pair = pair_density(orbitals)
    kernel = coulomb_kernel(pair.grid, regularization, v0)
    if h is None:
        h = np.diag(orbitals.eigenvalues).astype(complex)
    return HamiltonianInstance(
        h, pair, kernel, list(paw_blocks), constant, orbitals, orbitals.basis.cutoff_ev
    )


def random_wells(cell: Cell, n_wells: int, rng, depth=(0.5, 2.0), width=(0.5, 1.2)):
    frac = rng.uniform(size=(n_wells, 3))
    return [
        GaussianWell(tuple(f @ cell.lattice), float(rng.uniform(*depth)), float(rng.uniform(*width)))
        for f in frac
    ]


def synthetic_instance(
    n_b: int = 4,
    seed: int = 0,
    n_paw: int = 1,
    n_a: int = 2,
    paw_magnitude: float = 0.5,
    lattice_const: float = 2 * np.pi,
    cutoff_ev: float = 1.7 * 27.211386245988,
    n_wells: int = 2,
    n_occ: int = 1,
) -> HamiltonianInstance:
    """Small random instance: random Gaussian wells, lowest ``n_b`` orbitals, random PAW blocks.

    The default cell/cutoff gives the 27-point cube of Miller indices and a
    125-point pair-density grid.
    """
    rng = np.random.default_rng(seed)
    cell = Cell.cubic(lattice_const)
    wells = random_wells(cell, n_wells, rng)
    orbitals = solve_mean_field(cell, cutoff_ev, wells, n_b, n_occ)
    blocks = [
        synthesize_paw_block(n_a, n_b, seed=int(rng.integers(2**31)), magnitude=paw_magnitude, atom_id=a)
        for a in range(n_paw)
    ]
    return instance_from_orbitals(orbitals, blocks)


DIAMOND_A0 = 6.740  # Bohr


def diamond_cell() -> tuple[Cell, list]:
    """fcc primitive cell with the two-atom diamond basis (fractional positions)."""
    a = DIAMOND_A0
    lattice = 0.5 * a * np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    return Cell(lattice), [np.zeros(3), np.full(3, 0.25)]


def supercell_sites(cell: Cell, frac_sites, reps):
    """Cartesian atom positions of a ``reps`` supercell of ``cell``."""
    sites = []
    for i in range(reps[0]):
        for j in range(reps[1]):
            for k in range(reps[2]):
                shift = np.array([i, j, k], dtype=float)
                for f in frac_sites:
                    sites.append((np.asarray(f) + shift) @ cell.lattice)
    return sites


# --- MP2 and natural orbitals -------------------------------------------------

DEGENERATE_GAP = 1e-10


class CoulombIntegrals:
    """Sub-blocks of ``kappa`` without forming the full tensor.

    Either wraps a dense tensor or evaluates blocks from orbital coefficients,
    a kernel on the difference grid and optional PAW blocks whose projector
    overlaps are indexed by the same orbitals.
    """

    def __init__(self, dense=None, orbitals=None, kernel=None, paw_blocks=()):
        if (dense is None) == (orbitals is None):
            raise ValueError("give exactly one of dense or orbitals")
        self.dense = None if dense is None else np.asarray(dense)
        self.orbitals = orbitals
        self.paw_blocks = list(paw_blocks)
        if orbitals is not None and kernel is None:
            kernel = coulomb_kernel(difference_grid(orbitals.basis))
        self.kernel = kernel

    @classmethod
    def wrap(cls, kappa) -> "CoulombIntegrals":
        if isinstance(kappa, CoulombIntegrals):
            return kappa
        if isinstance(kappa, HamiltonianInstance):
            if kappa.orbitals is None:
                return cls(dense=kappa_oracle(kappa))
            return cls(orbitals=kappa.orbitals, kernel=kappa.kernel, paw_blocks=kappa.paw_blocks)
        return cls(dense=kappa)

    def block(self, a, b, c, d) -> np.ndarray:
        """``kappa[a][:, b][:, :, c][:, :, :, d]`` for index arrays a, b, c, d."""
        if self.dense is not None:
            return self.dense[np.ix_(a, b, c, d)]
        coef = self.orbitals.coefficients
        basis = self.orbitals.basis
        grid = self.kernel.basis
        left = _pair_coefficients(basis, coef[:, a], coef[:, b], grid)
        right = _pair_coefficients(basis, coef[:, c], coef[:, d], grid)
        out = np.einsum("g,gpq,grs->pqrs", self.kernel.values, left.conj(), right, optimize=True)
        for blk in self.paw_blocks:
            P = blk.proj_overlaps
            d1 = np.einsum("pa,qb->pqab", P[a].conj(), P[b])
            d2 = np.einsum("pa,qb->pqab", P[c].conj(), P[d])
            out += np.einsum("abcd,pqab,rscd->pqrs", blk.ctensor, d1.conj(), d2, optimize=True)
        return out


def _split(orbitals: OrbitalSet):
    if orbitals.n_occ < 1 or orbitals.n_virt < 1:
        raise ValueError("MP2 needs at least one occupied and one virtual orbital")
    occ = np.arange(orbitals.n_occ)
    virt = np.arange(orbitals.n_occ, orbitals.n_orbitals)
    return occ, virt


def _guard(denom):
    small = np.abs(denom) < DEGENERATE_GAP
    if np.any(small):
        raise ValueError(f"degenerate gap: {int(small.sum())} MP2 denominators below {DEGENERATE_GAP} Ha")


def mp2_energy(orbitals: OrbitalSet, kappa) -> float:
    """Closed-shell spin-summed second-order correlation energy (Hartree).

    ``kappa`` may be a dense tensor, a HamiltonianInstance or CoulombIntegrals.
    The orbital energies must be those of a diagonal mean-field operator.
    """
    occ, virt = _split(orbitals)
    ints = CoulombIntegrals.wrap(kappa)
    e = orbitals.eigenvalues
    k = ints.block(virt, occ, occ, virt)  # k[a, i, j, b] = kappa_aijb
    denom = e[occ][None, :, None, None] + e[occ][None, None, :, None] - e[virt][:, None, None, None] - e[virt][None, None, None, :]
    _guard(denom)
    exch = k.transpose(0, 2, 1, 3)  # kappa_ajib
    return float(np.real(np.sum(k * (2.0 * k.conj() - exch.conj()) / denom)))


def mp2_density(orbitals: OrbitalSet, kappa) -> np.ndarray:
    """Approximate MP2 virtual-space density matrix ``D_ab``."""
    occ, virt = _split(orbitals)
    ints = CoulombIntegrals.wrap(kappa)
    e = orbitals.eigenvalues
    k = ints.block(occ, virt, virt, occ)
    diag = k[occ, :, :, occ]  # diag[i, c, b] = kappa_icbi
    denom = e[virt][None, :, None] + e[virt][None, None, :] - 2.0 * e[occ][:, None, None]
    _guard(denom)
    y = diag / denom
    d = np.einsum("icb,ica->ab", y, y.conj())
    return 0.5 * (d + d.conj().T)


def natural_orbital_rotation(D, virt_energies, n_keep: int, semicanonical: bool = True):
    """Rotation of the virtual block onto the leading ``n_keep`` natural orbitals.

    Returns ``(R, energies, occupations)`` with ``R`` of shape (n_virt, n_keep).
    With ``semicanonical`` the kept space is re-diagonalized against the
    virtual orbital energies so the result is again a canonical-like set;
    otherwise ``energies`` are the diagonal elements in the natural basis.
    """
    D = np.asarray(D)
    n_virt = D.shape[0]
    if not 0 < n_keep <= n_virt:
        raise ValueError(f"n_keep must be in 1..{n_virt}, got {n_keep}")
    occ_nums, vecs = np.linalg.eigh(0.5 * (D + D.conj().T))
    order = np.argsort(-occ_nums, kind="stable")
    occ_nums, vecs = occ_nums[order], vecs[:, order]
    R = vecs[:, :n_keep]
    f = R.conj().T @ (np.asarray(virt_energies)[:, None] * R)
    if semicanonical:
        energies, w = np.linalg.eigh(0.5 * (f + f.conj().T))
        R = R @ w
    else:
        energies = np.real(np.diag(f))
    return R, energies, occ_nums[:n_keep]


def natural_orbitals(orbitals: OrbitalSet, D, n_keep: int, semicanonical: bool = True) -> OrbitalSet:
    """Occupied orbitals plus the first ``n_keep`` rotated virtuals."""
    occ, virt = _split(orbitals)
    R, energies, _ = natural_orbital_rotation(D, orbitals.eigenvalues[virt], n_keep, semicanonical)
    c = orbitals.coefficients
    coef = np.hstack([c[:, occ], c[:, virt] @ R])
    eps = np.concatenate([orbitals.eigenvalues[occ], energies])
    return OrbitalSet(orbitals.basis, coef, eps, orbitals.n_occ)


# --- scaling families ---------------------------------------------------------

def h4_like_instance(n_b: int, box: float = 8.0, cutoff_ev: float = 130.0, side: float = 2.0, depth: float = 4.4324, width: float = 0.6) -> HamiltonianInstance:
    """Four wells on a square of ``side`` Bohr in a cubic box; lowest ``n_b`` orbitals.

    A single default well binds at -0.5 Ha. The plane-wave grid is fixed by
    ``box`` and ``cutoff_ev``; only ``n_b`` varies. The square geometry has a
    degenerate frontier pair, so canonical orbitals are used.
    """
    cell = Cell.cubic(box)
    c = 0.5 * box
    corners = [(c - side / 2 + dx, c - side / 2 + dy, c) for dx in (0, side) for dy in (0, side)]
    wells = [GaussianWell(p, depth, width) for p in corners]
    orbitals = solve_mean_field(cell, cutoff_ev, wells, n_b, n_occ=2)
    return instance_from_orbitals(orbitals)


def diamond_like_instance(
    reps,
    orbitals_per_atom: int = 4,
    cutoff_ev: float = 110.0,
    depth: float = 2.0,
    width: float = 0.7,
    paw: bool = True,
    paw_seed: int = 7,
    paw_magnitude: float = 0.1,
    projector_widths=(0.5, 0.8),
) -> HamiltonianInstance:
    """Gaussian-well model of a diamond supercell with ``orbitals_per_atom`` bands per atom.

    With ``paw`` every atom carries two s-type Gaussian projectors and the same
    synthetic atomic tensor.
    """
    prim, frac = diamond_cell()
    cell = prim.supercell(reps)
    sites = supercell_sites(prim, frac, reps)
    wells = [GaussianWell(tuple(s), depth, width) for s in sites]
    n_b = orbitals_per_atom * len(sites)
    orbitals = solve_mean_field(cell, cutoff_ev, wells, n_b, n_occ=min(n_b, 2 * len(sites)))
    blocks = []
    if paw:
        ctensor = synthesize_paw_block(len(projector_widths), 1, paw_seed, paw_magnitude).ctensor
        for a, s in enumerate(sites):
            P = gaussian_projector_overlaps(orbitals, s, projector_widths)
            blocks.append(PawBlock(a, P, ctensor))
    return instance_from_orbitals(orbitals, blocks)
