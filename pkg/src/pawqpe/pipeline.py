"""Stage composition: instance -> factors -> truncation -> cost -> surface code."""

from __future__ import annotations

import numpy as np

from . import besim, downsample, lcucost, qec, toyscf
from .factorize import effective_one_body, factorize, reconstruct_kappa, truncate

IDENTITY_TOL = 1e-9
KAPPA_TOL = 1e-10
LAMBDA_TOL = 1e-10


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _default_electrons(inst) -> int:
    if inst.orbitals is not None and inst.orbitals.n_occ > 0:
        return min(2 * inst.orbitals.n_occ, 2 * inst.n_orbitals)
    return min(2, 2 * inst.n_orbitals)


def truncation_bound(full, trunc) -> float:
    """Operator-norm bound on the Hamiltonian change caused by truncation.

    Each soft factor contributes ``v' |A^2 - A'^2|`` with ``A = sum_p f_p n_p``
    in its rotated basis; ``|A| <= 2 sum |f|`` and
    ``|A - A'| <= 2 sum |f - f'|``.
    """
    bound = 0.0
    for a, b in zip(full.soft, trunc.soft):
        diff = np.abs(a.f - b.f).sum()
        if diff == 0:
            continue
        bound += a.weight * 2 * diff * 2 * (np.abs(a.f).sum() + np.abs(b.f).sum())
    for a, b in zip(full.paw, trunc.paw):
        diff = np.abs(a.f - b.f).sum()
        if diff == 0:
            continue
        bound += 0.5 * a.eps * 2 * diff * 2 * (np.abs(a.f).sum() + np.abs(b.f).sum())
    return float(bound)


def run_identity_suite(inst, delta=None, n_electrons=None, sz=0) -> dict:
    """Dense-oracle checks on a small instance; ``ok`` is False if any fails."""
    checks = {}
    n = inst.n_orbitals
    fh = factorize(inst)
    if n <= toyscf.KAPPA_ORACLE_MAX_ORBITALS:
        kappa = toyscf.kappa_oracle(inst)
        dev = float(np.abs(reconstruct_kappa(fh) - kappa).max())
        checks["kappa_reconstruction"] = {"max_dev": dev, "tol": KAPPA_TOL, "pass": dev <= KAPPA_TOL}
        ob = effective_one_body(inst.h, kappa)
        dev = float(np.abs(ob.h_corrected - fh.one_body.h_corrected).max())
        checks["one_body_dual_path"] = {"max_dev": dev, "tol": KAPPA_TOL, "pass": dev <= KAPPA_TOL}
    lam = lcucost.lambda_total(fh)
    rel = abs(lam.two_body - lam.two_body_by_factor) / max(abs(lam.two_body), 1e-300)
    checks["lambda_dual_path"] = {"rel_dev": rel, "tol": LAMBDA_TOL, "pass": rel <= LAMBDA_TOL}
    if n <= besim.MAX_ORBITALS:
        ne = _default_electrons(inst) if n_electrons is None else n_electrons
        fock = besim.FockSpace(n, ne, sz if ne % 2 == 0 else None)
        H_d = besim.fock_hamiltonian_direct(ob, kappa, inst.constant, fock)
        H_f = besim.fock_hamiltonian_factored(fh, fock)
        dev = float(np.abs(H_d - H_f).max())
        checks["fock_identity"] = {"max_dev": dev, "tol": IDENTITY_TOL, "pass": dev <= IDENTITY_TOL, "dimension": fock.dimension}
        N = fock.number_operator()
        comm = float(np.abs(H_f @ N - N @ H_f).max())
        checks["number_conservation"] = {"max_dev": comm, "tol": 1e-10, "pass": comm <= 1e-10}
        hw = besim.spectral_halfwidth(H_d)
        checks["lambda_bound"] = {"lambda": lam.total, "halfwidth": hw, "pass": lam.total >= hw}
        shift = float(np.mean(np.linalg.eigvalsh(H_d)[[0, -1]]))
        be = besim.hermitian_block_encoding(H_d - shift * np.eye(fock.dimension), lam.total)
        try:
            besim.chebyshev_square(be)
            ok = True
        except ArithmeticError:
            ok = False
        checks["chebyshev_square"] = {"pass": ok}
        if delta is not None:
            tr = truncate(fh, delta)
            e0 = besim.ground_energy(H_f)
            e1 = besim.ground_energy(besim.fock_hamiltonian_factored(tr, fock))
            bound = truncation_bound(fh, tr)
            checks["truncation_shift"] = {"shift": abs(e1 - e0), "bound": bound, "pass": abs(e1 - e0) <= bound + 1e-12}
    return {"checks": checks, "ok": all(c["pass"] for c in checks.values())}


def cost_instance(inst, delta, cost_config, qec_config=None) -> dict:
    try:
        fh = factorize(inst)
    except ValueError as exc:
        raise StageError("factorize", str(exc)) from None
    try:
        tr = truncate(fh, delta)
    except ValueError as exc:
        raise StageError("truncate", str(exc)) from None
    try:
        report = lcucost.qpe_cost(tr, cost_config)
    except ValueError as exc:
        raise StageError("cost", str(exc)) from None
    out = {"cost": report.to_dict(), "surviving_items": tr.surviving_items(), "n_soft_factors": len(tr.soft), "n_paw_factors": len(tr.paw)}
    if qec_config is not None:
        try:
            out["qec"] = qec.physical_resources(qec_config, report.logical_qubits, report.toffoli_total).to_dict()
        except ValueError as exc:
            raise StageError("qec", str(exc)) from None
    return out


def replay_downsampling(n_b=2, n_bp=3, n_bpp=4, budget=None, delta=0.0, cutoff_ev=110.0, beth=20, aleph=10, qec_config=None) -> dict:
    """Cost the five down-sampling jobs on the diamond-like toy family.

    Cell ``n`` is a ``[n, 1, 1]`` chain of primitive cells. Surface-code
    resources are computed for the job with the largest Toffoli count.
    """
    if budget is None:
        budget = downsample.ErrorBudget(eps_tot=1.6e-3, eps_orb=0.96e-3, eps_paw=0.44e-3)
    plan = downsample.plan_with_budget(n_b, n_bp, n_bpp, budget)
    rows = []
    for run in plan.runs:
        inst = toyscf.diamond_like_instance((run.cell, 1, 1), run.n_b, cutoff_ev)
        res = cost_instance(inst, delta, lcucost.CostConfig(run.eps_qpe, beth, aleph))
        rows.append(
            {
                "cell": [run.cell, 1, 1],
                "orbitals_per_atom": run.n_b,
                "sign": run.sign,
                "eps_qpe": run.eps_qpe,
                "logical_qubits": res["cost"]["logical_qubits"],
                "toffolis": res["cost"]["toffoli_total"],
                "lambda": res["cost"]["lambda_total"],
            }
        )
    largest = max(range(len(rows)), key=lambda i: rows[i]["toffolis"])
    qc = qec_config or qec.QecConfig()
    phys = qec.physical_resources(qc, rows[largest]["logical_qubits"], rows[largest]["toffolis"])
    return {"plan": plan.to_dict(), "jobs": rows, "largest_job": largest, "qec": phys.to_dict()}
