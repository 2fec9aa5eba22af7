"""Subnormalization, data volume, QROAM tradeoff and qubitized-QPE totals."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .factorize import FactorizedHamiltonian

# Walk steps per unit of lambda/eps for qubitized phase estimation.
WALK_CONSTANT = math.pi / 2
# Reflection ancilla, success flags and phase-estimation control.
CONTROL_QUBITS = 6
IDENTITY_TOL = 1e-10


def ceil_log2(x) -> int:
    """Smallest m >= 0 with 2**m >= x, for positive integers or fractions."""
    if x <= 1:
        return 0
    return (math.ceil(x) - 1).bit_length()


def is_power_of_two(k) -> bool:
    return isinstance(k, (int, np.integer)) and k >= 1 and (int(k) & (int(k) - 1)) == 0


@dataclass
class CostConfig:
    eps_qpe: float = 1.6e-3
    beth: int = 20
    aleph: int = 10
    kr: int | None = None

    def __post_init__(self):
        if not self.eps_qpe > 0:
            raise ValueError(f"eps_qpe must be positive, got {self.eps_qpe}")
        if self.beth < 1 or self.aleph < 1:
            raise ValueError("beth and aleph must be >= 1")
        if self.kr is not None and not is_power_of_two(self.kr):
            raise ValueError(f"kr must be a power of 2, got {self.kr}")


@dataclass
class LambdaResult:
    total: float
    one_body: float
    two_body: float
    soft: float
    soft_zero: float
    paw: float
    xi: np.ndarray = field(repr=False)
    two_body_by_factor: float = 0.0


def _is_identity_like(f) -> bool:
    f = np.asarray(f)
    return bool(np.all(np.abs(f - f[0]) <= IDENTITY_TOL * max(1.0, abs(f[0]))))


def lambda_total(factors: FactorizedHamiltonian) -> LambdaResult:
    """One-norm of the LCU.

    ``lambda_1 = sum_p |eps'_p|``; soft ``lambda`` is ``1/4 sum_pq xi_pq`` over
    G > 0 with ``xi_pq = sum_{G>0, j} 8 pi / (V G^2) |f_p| |f_q|`` plus the
    G = 0 factors that are not a multiple of the identity; PAW terms add
    ``1/2 |eps| (sum_p |f_p|)^2``. ``two_body_by_factor`` repeats the sum
    factor by factor.
    """
    ob = factors.one_body
    if ob is None or ob.eps_prime is None:
        raise ValueError("factors carry no one-body spectrum")
    lam1 = float(np.sum(np.abs(ob.eps_prime)))
    n = factors.n_orbitals
    xi = np.zeros((n, n))
    soft_zero = 0.0
    by_factor = 0.0
    for s in factors.soft:
        a = np.abs(s.f)
        if s.gnorm > 1e-12:
            xi += (8.0 * math.pi / (factors.volume * s.gnorm**2)) * np.outer(a, a)
            by_factor += 0.5 * s.weight * a.sum() ** 2
        elif not _is_identity_like(s.f):
            soft_zero += 0.5 * s.weight * a.sum() ** 2
            by_factor += 0.5 * s.weight * a.sum() ** 2
    paw = 0.0
    for p in factors.paw:
        paw += 0.5 * p.eps * np.abs(p.f).sum() ** 2
        by_factor += 0.5 * p.eps * np.abs(p.f).sum() ** 2
    soft = 0.25 * float(xi.sum())
    lam2 = soft + soft_zero + paw
    return LambdaResult(lam1 + lam2, lam1, lam2, soft, soft_zero, paw, xi, float(by_factor))


def gamma(factors: FactorizedHamiltonian, beth: int = 20) -> tuple[int, int, int]:
    """``(L, Gamma_nominal, Gamma_nonzero)`` in bits."""
    L = factors.n_pw + sum(n * (n + 1) // 2 for n in factors.paw_sizes)
    n = factors.n_orbitals
    return L, L * n * n * beth, factors.surviving_items() * n * beth


def qroam_cost(L: int, n_b: int, beth: int, kr: int) -> tuple[int, int]:
    """Toffolis ``ceil(L N_b / k) + N_b beth (k - 1)`` and qubits ``N_b beth k + ceil(log2(L N_b / k))``."""
    if not is_power_of_two(kr):
        raise ValueError(f"kr must be a power of 2, got {kr}")
    x = int(L) * int(n_b)
    y = int(n_b) * int(beth)
    kr = int(kr)
    toff = -(-x // kr) + y * (kr - 1)
    m = 0
    while (kr << m) < x:
        m += 1
    return toff, y * kr + m


def optimal_kr(L: int, n_b: int, beth: int) -> int:
    """Power of 2 minimizing the QROAM Toffoli count (ties go to the smaller k)."""
    x = int(L) * int(n_b)
    best, best_cost = 1, qroam_cost(L, n_b, beth, 1)[0]
    k = 2
    while k <= 2 * max(x, 1):
        c = qroam_cost(L, n_b, beth, k)[0]
        if c < best_cost:
            best, best_cost = k, c
        k *= 2
    return best


@dataclass
class CostReport:
    lambda_total: float
    lambda_one_body: float
    lambda_two_body: float
    lambda_two_body_by_factor: float
    xi_sum: float
    xi_max: float
    L: int
    n_orbitals: int
    gamma_nominal: int
    gamma_nonzero: int
    kr_chosen: int
    qroam_toffolis: int
    qroam_qubits: int
    iterations: int
    toffolis_per_iteration: int
    toffoli_total: int
    logical_qubits: int
    breakdown: dict

    def to_dict(self) -> dict:
        return asdict(self)


def qpe_iterations(lam: float, eps_qpe: float) -> int:
    if not eps_qpe > 0:
        raise ValueError(f"eps_qpe must be positive, got {eps_qpe}")
    x = WALK_CONSTANT * lam / eps_qpe
    return max(1, math.ceil(x * (1 - 1e-12)))


def qpe_cost(factors: FactorizedHamiltonian, config: CostConfig) -> CostReport:
    """Logical cost of qubitized QPE under an explicit per-step model.

    Per walk step: QROAM load and unload at the chosen ``k_r``, two rotation
    layers of ``4 N_b (beth - 2)`` Toffolis, alias-sampling preparation
    ``L + 2^ceil(log2 L)`` and one Toffoli for the PAW sign bit.
    """
    lam = lambda_total(factors)
    L, g_nom, g_nz = gamma(factors, config.beth)
    n_b = factors.n_orbitals
    kr = config.kr or optimal_kr(L, n_b, config.beth)
    q_toff, q_qubits = qroam_cost(L, n_b, config.beth, kr)
    iters = qpe_iterations(lam.total, config.eps_qpe)
    per_iter = {
        "qroam": 2 * q_toff,
        "rotations": 2 * 4 * n_b * max(config.beth - 2, 0),
        "state_prep": L + 2 ** ceil_log2(L),
        "sign_bit": 1,
    }
    per = sum(per_iter.values())
    qubits = {
        "system": 2 * n_b,
        "qroam": q_qubits,
        "index": ceil_log2(L),
        "keep_probability": config.aleph,
        "phase_register": ceil_log2(iters),
        "sign": 1,
        "control": CONTROL_QUBITS,
    }
    return CostReport(
        lambda_total=lam.total,
        lambda_one_body=lam.one_body,
        lambda_two_body=lam.two_body,
        lambda_two_body_by_factor=lam.two_body_by_factor,
        xi_sum=float(lam.xi.sum()),
        xi_max=float(lam.xi.max(initial=0.0)),
        L=L,
        n_orbitals=n_b,
        gamma_nominal=g_nom,
        gamma_nonzero=g_nz,
        kr_chosen=kr,
        qroam_toffolis=q_toff,
        qroam_qubits=q_qubits,
        iterations=iters,
        toffolis_per_iteration=per,
        toffoli_total=iters * per,
        logical_qubits=sum(qubits.values()),
        breakdown={"toffolis_per_iteration": per_iter, "logical_qubits": qubits},
    )


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 4:
        raise ValueError("a scaling fit needs at least 4 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


@dataclass
class ScalingTable:
    rows: list
    slopes: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(self.rows[0].keys())
        w.writerow(keys)
        for r in self.rows:
            w.writerow([r[k] for k in keys])
        for k, v in self.slopes.items():
            w.writerow([f"# slope {k}", f"{v:.6f}"])
        return buf.getvalue()


def lambda_scaling_study(family, sizes, delta: float = 0.0, beth: int = 20) -> ScalingTable:
    """Factor ``family(size)`` for every size and fit log-log slopes against size.

    ``family`` maps a size to a HamiltonianInstance or a FactorizedHamiltonian.
    """
    from .factorize import factorize, truncate

    sizes = list(sizes)
    if len(sizes) < 4:
        raise ValueError("a scaling study needs at least 4 sizes")
    rows = []
    for size in sizes:
        obj = family(size)
        fh = obj if isinstance(obj, FactorizedHamiltonian) else factorize(obj)
        fh = truncate(fh, delta)
        lam = lambda_total(fh)
        L, g_nom, g_nz = gamma(fh, beth)
        rows.append(
            {
                "size": size,
                "n_orbitals": fh.n_orbitals,
                "n_pw": fh.n_pw,
                "L": L,
                "lambda_two_body": lam.two_body,
                "gamma_nominal": g_nom,
                "gamma_nonzero": g_nz,
            }
        )
    x = [r["size"] for r in rows]
    slopes = {
        "lambda_two_body": loglog_slope(x, [r["lambda_two_body"] for r in rows]),
        "gamma_nonzero": loglog_slope(x, [r["gamma_nonzero"] for r in rows]),
    }
    return ScalingTable(rows, slopes)
