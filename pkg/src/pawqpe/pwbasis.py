"""Periodic cells, plane-wave G-vector grids and the regularized Coulomb kernel.

Energies are Hartree internally; cutoffs enter the public API in eV.
Reciprocal vectors follow ``a_i . b_j = 2 pi delta_ij``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

HARTREE_EV = 27.211386245988


@dataclass(frozen=True)
class Cell:
    """Simulation cell with lattice vectors as rows (Bohr)."""

    lattice: np.ndarray

    def __post_init__(self):
        lat = np.asarray(self.lattice, dtype=float)
        if lat.shape != (3, 3) or not np.all(np.isfinite(lat)):
            raise ValueError("lattice must be a finite 3x3 array")
        det = float(np.linalg.det(lat))
        if abs(det) < 1e-12:
            raise ValueError("lattice vectors are linearly dependent")
        lat.setflags(write=False)
        object.__setattr__(self, "lattice", lat)

    @classmethod
    def cubic(cls, a: float) -> "Cell":
        return cls(np.eye(3) * a)

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.lattice)))

    @property
    def reciprocal(self) -> np.ndarray:
        return 2.0 * np.pi * np.linalg.inv(self.lattice).T

    def supercell(self, reps) -> "Cell":
        reps = np.asarray(reps, dtype=float).reshape(3)
        return Cell(self.lattice * reps[:, None])


def _halfspace_rank(m) -> bool:
    """True for the representative of a {G, -G} pair (first nonzero index > 0)."""
    for x in m:
        if x != 0:
            return x > 0
    return False


@dataclass(frozen=True)
class PlaneWaveBasis:
    """Sorted set of Miller triples with Cartesian G vectors.

    ``halfspace`` holds indices into ``miller``: the origin first, then one
    representative of every +/- pair. ``neg_index[i]`` is the index of -G_i.
    """

    cell: Cell
    cutoff_ev: float | None
    miller: np.ndarray
    gvecs: np.ndarray = field(repr=False)
    halfspace: np.ndarray = field(repr=False)
    neg_index: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.miller)

    @property
    def g2(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.gvecs, self.gvecs)

    @property
    def gnorm(self) -> np.ndarray:
        return np.sqrt(self.g2)

    def index_of(self) -> dict:
        return {tuple(int(x) for x in m): i for i, m in enumerate(self.miller)}

    @classmethod
    def from_miller(cls, cell: Cell, miller, cutoff_ev=None) -> "PlaneWaveBasis":
        """Build a basis from an arbitrary negation-closed set of Miller triples."""
        miller = np.asarray(miller, dtype=np.int64).reshape(-1, 3)
        keys = sorted({tuple(int(x) for x in m) for m in miller})
        if len(keys) != len(miller):
            raise ValueError("duplicate Miller indices")
        miller = np.array(keys, dtype=np.int64).reshape(-1, 3)
        lookup = {k: i for i, k in enumerate(keys)}
        try:
            neg = np.array([lookup[(-a, -b, -c)] for a, b, c in keys], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"grid is not closed under negation: missing {exc}") from None
        if (0, 0, 0) not in lookup:
            raise ValueError("grid must contain G=0")
        half = [lookup[(0, 0, 0)]] + [i for i, k in enumerate(keys) if _halfspace_rank(k)]
        gvecs = miller @ cell.reciprocal
        return cls(cell, cutoff_ev, miller, gvecs, np.array(half, dtype=np.int64), neg)


def build_basis(cell: Cell, cutoff_ev: float) -> PlaneWaveBasis:
    """All G with 1/2 |G|^2 <= cutoff, in lexicographic Miller order."""
    if not cutoff_ev > 0:
        raise ValueError("cutoff must be positive")
    ecut = cutoff_ev / HARTREE_EV
    gmax = math.sqrt(2.0 * ecut)
    bounds = [int(math.floor(gmax * np.linalg.norm(a) / (2 * np.pi))) + 1 for a in cell.lattice]
    ranges = [np.arange(-b, b + 1) for b in bounds]
    cand = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(3, -1).T
    g = cand @ cell.reciprocal
    keep = 0.5 * np.einsum("ij,ij->i", g, g) <= ecut * (1 + 1e-12)
    basis = PlaneWaveBasis.from_miller(cell, cand[keep], cutoff_ev)
    if basis.size == 1:
        warnings.warn("cutoff admits only G=0", stacklevel=2)
    return basis


def difference_grid(basis: PlaneWaveBasis) -> PlaneWaveBasis:
    """Set of all differences g' - g of the orbital grid (the pair-density grid)."""
    m = basis.miller
    diffs = (m[None, :, :] - m[:, None, :]).reshape(-1, 3)
    uniq = np.unique(diffs, axis=0)
    return PlaneWaveBasis.from_miller(basis.cell, uniq, None)


def truncated_v0(volume: float) -> float:
    """G=0 limit of the Coulomb kernel truncated at the equal-volume sphere radius."""
    rc = (3.0 * volume / (4.0 * np.pi)) ** (1.0 / 3.0)
    return 2.0 * np.pi * rc**2 / volume


@dataclass(frozen=True)
class CoulombKernel:
    """Coulomb kernel on a G grid.

    ``values[i]`` is v(G_i) = 4 pi / (V |G_i|^2) with the regularized ``v0`` at
    G=0. ``halfspace_weights`` are the v'(G) on ``basis.halfspace`` with the
    origin weight halved.
    """

    basis: PlaneWaveBasis
    values: np.ndarray = field(repr=False)
    v0: float
    regularization: str
    halved_zero: bool = True

    @property
    def halfspace_weights(self) -> np.ndarray:
        w = self.values[self.basis.halfspace].copy()
        if self.halved_zero:
            w[0] *= 0.5
        return w


def coulomb_kernel(basis: PlaneWaveBasis, regularization="spherical_truncation", v0=None) -> CoulombKernel:
    """Evaluate the kernel; ``regularization`` is ``spherical_truncation`` or ``user``."""
    vol = basis.cell.volume
    if regularization == "spherical_truncation":
        if v0 is not None:
            raise ValueError("v0 is only accepted with regularization='user'")
        v0 = truncated_v0(vol)
    elif regularization == "user":
        if v0 is None or not np.isfinite(v0) or v0 < 0:
            raise ValueError(f"user v0 must be finite and non-negative, got {v0!r}")
        v0 = float(v0)
    else:
        raise ValueError(f"unknown regularization {regularization!r}")
    g2 = basis.g2
    values = np.empty(basis.size)
    zero = g2 < 1e-14
    values[~zero] = 4.0 * np.pi / (vol * g2[~zero])
    values[zero] = v0
    values.setflags(write=False)
    return CoulombKernel(basis, values, v0, regularization)

