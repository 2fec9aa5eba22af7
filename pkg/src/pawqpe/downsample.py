"""Down-sampling energy bookkeeping, error-budget allocation and run planning.

``E(n, m)`` is the energy per primitive cell of an ``[n, n, n]`` supercell
with ``m`` orbitals per atom. The down-sampled estimate is the telescoping
sum ``E_ds(n + 1) = E_ds(n) + E(n + 1, n_b) - E(n, n_b)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np


def _exact(x) -> Fraction:
    """Rational value of the shortest decimal form of ``x``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class Run:
    cell: int
    n_b: int
    sign: int
    eps_qpe: float | None = None


@dataclass
class ErrorBudget:
    """Error components in Hartree; ``eps_qpe`` is the remainder when not given."""

    eps_tot: float
    eps_trunc: float = 0.0
    eps_be: float = 0.0
    eps_orb: float = 0.0
    eps_pw: float = 0.0
    eps_paw: float = 0.0
    eps_qpe: float | None = None

    def consumed(self) -> Fraction:
        return sum((_exact(x) for x in (self.eps_trunc, self.eps_be, self.eps_orb, self.eps_pw, self.eps_paw)), Fraction(0))

    def residual(self) -> Fraction:
        return _exact(self.eps_tot) - self.consumed()


@dataclass
class DownsamplePlan:
    levels: list
    runs: list
    budgets: list = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def evaluate(self, energy):
        """Signed sum of ``energy(cell, n_b)`` over the runs."""
        return sum(r.sign * energy(r.cell, r.n_b) for r in self.runs)


def expand_plan(n_b: int, n_bp: int, n_bpp: int) -> DownsamplePlan:
    """Five runs of the three-level down-sampling estimate."""
    if not n_b < n_bp < n_bpp:
        raise ValueError(f"need n_b < n_b' < n_b'', got {n_b}, {n_bp}, {n_bpp}")
    runs = [Run(1, n_bpp, +1), Run(2, n_bp, +1), Run(1, n_bp, -1), Run(3, n_b, +1), Run(2, n_b, -1)]
    return DownsamplePlan(levels=[(1, n_bpp), (2, n_bp), (3, n_b)], runs=runs)


def downsampled_energy(energy, n_b: int, n_bp: int, n_bpp: int):
    """``E_ds(3)`` by the recursion, independent of the expanded plan."""
    e = energy(1, n_bpp)
    for n, m in ((1, n_bp), (2, n_b)):
        e = e + energy(n + 1, m) - energy(n, m)
    return e


def allocate_budget(budget: ErrorBudget, n_runs: int, weights=None) -> list:
    """Per-run QPE error: the residual budget split equally (or by ``weights``)."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    residual = budget.residual()
    if residual <= 0:
        raise ValueError(f"budget exhausted before QPE (residual {float(residual):.3e} Ha)")
    if weights is None:
        return [float(residual / n_runs)] * n_runs
    w = [_exact(x) for x in weights]
    if len(w) != n_runs or any(x <= 0 for x in w):
        raise ValueError("weights must be n_runs positive numbers")
    total = sum(w, Fraction(0))
    return [float(residual * x / total) for x in w]


def plan_with_budget(n_b, n_bp, n_bpp, budget: ErrorBudget, weights=None) -> DownsamplePlan:
    plan = expand_plan(n_b, n_bp, n_bpp)
    eps = allocate_budget(budget, len(plan.runs), weights)
    plan.runs = [Run(r.cell, r.n_b, r.sign, e) for r, e in zip(plan.runs, eps)]
    plan.budgets = eps
    plan.totals = {
        "eps_tot": budget.eps_tot,
        "eps_orb": budget.eps_orb,
        "eps_trunc": budget.eps_trunc,
        "eps_paw_pw": float(_exact(budget.eps_paw) + _exact(budget.eps_pw)),
        "eps_be": budget.eps_be,
        "eps_qpe": float(budget.residual()),
    }
    return plan


@dataclass
class ConvergenceTable:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_b", "supercell", "downsampled", "downsampled_telescoped"])
        for r in self.rows:
            w.writerow([r["n_b"], repr(r["supercell"]), repr(r["downsampled"]), repr(r["downsampled_telescoped"])])
        return buf.getvalue()


def convergence_table(energy, n_b_list, cell: int = 3, n_ref_low=None) -> ConvergenceTable:
    """Deviation from the largest-``n_b`` reference in supercell and down-sampling modes.

    Supercell mode varies ``n_b`` in the ``cell`` supercell alone. Down-sampling
    mode uses ``n_b' = n_b'' = max(n_b_list)`` for the smaller cells. The
    down-sampling deviation is also accumulated from the two changed terms.
    """
    n_b_list = sorted(n_b_list)
    if cell < 2:
        raise ValueError("down-sampling needs cell >= 2")
    top = n_b_list[-1]

    def ds(m):
        e = energy(1, top)
        for n in range(1, cell - 1):
            e = e + energy(n + 1, top) - energy(n, top)
        return e + energy(cell, m) - energy(cell - 1, m)

    ref_sc, ref_ds = energy(cell, top), ds(top)
    rows = []
    for m in n_b_list:
        tele = (energy(cell, m) - energy(cell - 1, m)) - (energy(cell, top) - energy(cell - 1, top))
        rows.append(
            {
                "n_b": m,
                "supercell": energy(cell, m) - ref_sc,
                "downsampled": ds(m) - ref_ds,
                "downsampled_telescoped": tele,
            }
        )
    return ConvergenceTable(rows)


class ToyEnergySurface:
    """MP2 correlation energy per primitive cell of a chain of toy cells.

    Supercell ``n`` repeats the primitive cell ``n`` times along the first
    lattice vector. Orbitals per atom are counted over occupied plus kept
    natural virtual orbitals; results are cached.
    """

    def __init__(self, lattice_const=5.0, cutoff_ev=120.0, depth=3.0, width=0.8, n_occ_per_cell=1, chain=True):
        from .pwbasis import Cell

        self.cell = Cell.cubic(lattice_const)
        self.cutoff_ev = cutoff_ev
        self.depth = depth
        self.width = width
        self.n_occ_per_cell = n_occ_per_cell
        self.chain = chain
        self._cache = {}
        self._setup = {}

    def _reps(self, n):
        return (n, 1, 1) if self.chain else (n, n, n)

    def _prepare(self, n):
        from . import toyscf

        if n in self._setup:
            return self._setup[n]
        reps = self._reps(n)
        sc = self.cell.supercell(reps)
        center = 0.5 * np.ones(3) @ self.cell.lattice
        sites = [center + np.array([i, j, k]) @ self.cell.lattice for i in range(reps[0]) for j in range(reps[1]) for k in range(reps[2])]
        wells = [toyscf.GaussianWell(tuple(s), self.depth, self.width) for s in sites]
        n_cells = int(np.prod(reps))
        n_occ = self.n_occ_per_cell * n_cells
        basis_size = toyscf.build_basis(sc, self.cutoff_ev).size
        orbs = toyscf.solve_mean_field(sc, self.cutoff_ev, wells, basis_size, n_occ)
        D = toyscf.mp2_density(orbs, toyscf.CoulombIntegrals(orbitals=orbs))
        self._setup[n] = (orbs, D, n_cells)
        return self._setup[n]

    def __call__(self, n: int, n_b: int) -> float:
        from . import toyscf

        key = (n, n_b)
        if key not in self._cache:
            orbs, D, n_cells = self._prepare(n)
            n_keep = n_b * n_cells - orbs.n_occ
            no = toyscf.natural_orbitals(orbs, D, min(n_keep, orbs.n_virt))
            self._cache[key] = toyscf.mp2_energy(no, toyscf.CoulombIntegrals(orbitals=no)) / n_cells
        return self._cache[key]
