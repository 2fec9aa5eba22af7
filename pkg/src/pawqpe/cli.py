"""Command-line entry point.

Exit codes: 0 success, 1 invariant or stage failure, 2 usage error
(bad flags or unreadable paths).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import downsample, io, lcucost, pipeline, qec, toyscf, upaw_radial
from .factorize import factorize, truncate

DIAMOND_REPS = {2: (1, 1, 1), 4: (2, 1, 1), 8: (2, 2, 1), 16: (2, 2, 2), 32: (4, 2, 2), 54: (3, 3, 3)}


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v

    return parse


def _nonneg(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _reps(text):
    try:
        reps = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n1,n2,n3: {text!r}") from None
    if len(reps) != 3 or min(reps) < 1:
        raise argparse.ArgumentTypeError(f"expected three positive integers: {text!r}")
    return reps


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit(obj, out=None):
    text = io.dumps(_jsonable(obj))
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _config(args) -> dict:
    # output destinations do not change the report, so they stay out of it
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv")}


def _eps_qpe(args):
    if args.eps_qpe_mha is not None:
        return args.eps_qpe_mha * 1e-3
    return args.eps_qpe


# --- subcommands -------------------------------------------------------------

def cmd_synth(args):
    if args.family == "random":
        inst = toyscf.synthetic_instance(args.nb, args.seed, args.paw_blocks, args.na, args.magnitude)
    elif args.family == "h4":
        inst = toyscf.h4_like_instance(args.nb)
    else:
        inst = toyscf.diamond_like_instance(args.reps, args.orbitals_per_atom, paw=args.paw_blocks > 0)
    _emit(io.instance_to_dict(inst), args.out)
    return 0


def cmd_factorize(args):
    inst = io.load_instance(args.instance)
    fh = factorize(inst)
    if args.delta is not None:
        fh = truncate(fh, args.delta, args.floor)
    _emit(io.factors_to_dict(fh), args.out)
    return 0


def _table(report: lcucost.CostReport) -> str:
    lines = [
        f"lambda           {report.lambda_total:.6g} Ha",
        f"  one-body       {report.lambda_one_body:.6g}",
        f"  two-body       {report.lambda_two_body:.6g}",
        f"L                {report.L}",
        f"Gamma nominal    {report.gamma_nominal}",
        f"Gamma nonzero    {report.gamma_nonzero}",
        f"k_r              {report.kr_chosen}",
        f"iterations       {report.iterations}",
        f"Toffolis         {report.toffoli_total:.4g}",
        f"logical qubits   {report.logical_qubits}",
    ]
    return "\n".join(lines) + "\n"


def cmd_estimate(args):
    fh = io.load_factors(args.factors)
    config = lcucost.CostConfig(_eps_qpe(args), args.beth, args.aleph, args.kr)
    report = lcucost.qpe_cost(fh, config)
    out = {"config": _config(args), "inputs": {"factors": io.sha256_file(args.factors)}, "cost": report.to_dict()}
    if args.qec:
        out["qec"] = qec.physical_resources(qec.QecConfig(), report.logical_qubits, report.toffoli_total).to_dict()
    _emit(out, args.out)
    sys.stderr.write(_table(report))
    return 0


def cmd_verify(args):
    inst = io.load_instance(args.instance)
    res = pipeline.run_identity_suite(inst, args.delta, args.electrons)
    for name, c in res["checks"].items():
        detail = ", ".join(f"{k}={v:.3e}" for k, v in c.items() if isinstance(v, float))
        sys.stderr.write(f"{'PASS' if c['pass'] else 'FAIL'}  {name}  {detail}\n")
    _emit({"config": _config(args), "inputs": {"instance": io.sha256_file(args.instance)}, **res}, args.out)
    return 0 if res["ok"] else 1


def _family(doc):
    name = doc.get("family")
    opts = doc.get("options", {})
    if name == "h4":
        return lambda n: toyscf.h4_like_instance(n, **opts)
    if name == "diamond":
        return lambda n: toyscf.diamond_like_instance(DIAMOND_REPS[n], **opts)
    raise io.SchemaError("/family", f"unknown family {name!r}")


def cmd_scaling(args):
    with open(args.family) as fh:
        doc = json.load(fh)
    sizes = doc.get("sizes")
    if not isinstance(sizes, list):
        raise io.SchemaError("/sizes", "expected a list")
    table = lcucost.lambda_scaling_study(_family(doc), sizes, float(doc.get("delta", 0.0)), int(doc.get("beth", 20)))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(table.to_csv())
    _emit({"config": _config(args), "inputs": {"family": io.sha256_file(args.family)}, "rows": table.rows, "slopes": table.slopes}, args.out)
    return 0


def cmd_downsample(args):
    budget = downsample.ErrorBudget(
        eps_tot=args.budget_mha * 1e-3,
        eps_orb=args.consumed_mha * 1e-3,
        eps_trunc=args.trunc_mha * 1e-3,
        eps_paw=args.pawpw_mha * 1e-3,
    )
    plan = downsample.plan_with_budget(args.nb, args.nbp, args.nbpp, budget)
    doc = plan.to_dict()
    doc["budgets_mha"] = [float(downsample._exact(e) * 1000) for e in plan.budgets]
    _emit({"config": _config(args), "plan": doc}, args.out)
    return 0


def cmd_upaw_fit(args):
    with open(args.input) as fh:
        channels = io.radial_channels_from_dict(json.load(fh))
    try:
        setup = upaw_radial.fit_pseudo_radial(channels, args.ra, args.p, args.m, args.gmax, args.tol)
    except upaw_radial.FitError as exc:
        sys.stderr.write(f"error [upaw-fit]: {exc}\n")
        _emit({"error": str(exc), "residuals": exc.residuals}, args.out)
        return 1
    report = upaw_radial.verify_setup(setup, channels, args.tol)
    doc = io.setup_to_dict(setup, channels)
    doc["verification"] = {"checks": report["checks"], "ok": report["ok"]}
    _emit(doc, args.out)
    return 0 if report["ok"] else 1


def cmd_qec(args):
    catalog = qec.load_catalog(args.catalog)
    config = qec.QecConfig(p_phys=args.p, factory_catalog=catalog)
    res = qec.physical_resources(config, args.logical_qubits, args.toffolis)
    _emit({"config": _config(args), "resources": res.to_dict()}, args.out)
    return 0


def cmd_run(args):
    inputs = {}
    if args.instance:
        inst = io.load_instance(args.instance)
        inputs["instance"] = io.sha256_file(args.instance)
    else:
        inst = toyscf.synthetic_instance(args.nb, args.seed, args.paw_blocks, args.na)
        inputs["instance"] = io.sha256_text(io.dumps(io.instance_to_dict(inst)))
    report = {"config": _config(args), "inputs": inputs}
    cost_config = lcucost.CostConfig(_eps_qpe(args), args.beth, args.aleph)
    report.update(pipeline.cost_instance(inst, args.delta, cost_config, qec.QecConfig(p_phys=args.p)))
    ok = True
    if args.verify:
        suite = pipeline.run_identity_suite(inst, args.delta)
        report["verification"] = suite
        ok = suite["ok"]
    if args.replay:
        report["replay"] = pipeline.replay_downsampling(*args.replay)
    _emit(report, args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pawqpe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic instance")
    p.add_argument("--family", choices=["random", "h4", "diamond"], default="random")
    p.add_argument("--nb", type=_positive(int), default=4)
    p.add_argument("--paw-blocks", type=int, default=1)
    p.add_argument("--na", type=_positive(int), default=2)
    p.add_argument("--magnitude", type=float, default=0.5)
    p.add_argument("--reps", type=_reps, default=(1, 1, 1))
    p.add_argument("--orbitals-per-atom", type=_positive(int), default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factorize", help="factorize an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--delta", type=_nonneg)
    p.add_argument("--floor", type=_nonneg, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_factorize)

    def cost_flags(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--eps-qpe", type=_positive(float), default=1.6e-3, help="Hartree")
        g.add_argument("--eps-qpe-mha", type=_positive(float), help="milli-Hartree")
        p.add_argument("--beth", type=_positive(int), default=20)
        p.add_argument("--aleph", type=_positive(int), default=10)

    p = sub.add_parser("estimate", help="logical cost of qubitized QPE")
    p.add_argument("--factors", required=True)
    cost_flags(p)
    p.add_argument("--kr", type=_positive(int))
    p.add_argument("--qec", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run the dense identity suite")
    p.add_argument("--instance", required=True)
    p.add_argument("--delta", type=_nonneg)
    p.add_argument("--electrons", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scaling", help="lambda / Gamma scaling study")
    p.add_argument("--family", required=True, help="JSON family description")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("downsample", help="plan the five down-sampling runs")
    p.add_argument("--nb", type=_positive(int), required=True)
    p.add_argument("--nbp", type=_positive(int), required=True)
    p.add_argument("--nbpp", type=_positive(int), required=True)
    p.add_argument("--budget-mha", type=_positive(float), required=True)
    p.add_argument("--consumed-mha", type=_nonneg, default=0.0, help="orbital error, mHa")
    p.add_argument("--trunc-mha", type=_nonneg, default=0.0)
    p.add_argument("--pawpw-mha", type=_nonneg, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("upaw-fit", help="fit polynomial pseudo partial waves")
    p.add_argument("--input", required=True)
    p.add_argument("--ra", type=_positive(float), required=True)
    p.add_argument("--p", type=_positive(int), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--gmax", type=_positive(float))
    p.add_argument("--tol", type=_positive(float), default=upaw_radial.DEFAULT_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_upaw_fit)

    p = sub.add_parser("qec", help="surface-code physical resources")
    p.add_argument("--logical-qubits", type=_positive(int), required=True)
    p.add_argument("--toffolis", type=_positive(float), required=True)
    p.add_argument("--p", type=_positive(float), default=1e-4)
    p.add_argument("--catalog")
    p.add_argument("--out")
    p.set_defaults(func=cmd_qec)

    p = sub.add_parser("run", help="full pipeline on an instance file or a synthetic instance")
    p.add_argument("--instance")
    p.add_argument("--nb", type=_positive(int), default=4)
    p.add_argument("--paw-blocks", type=int, default=1)
    p.add_argument("--na", type=_positive(int), default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=_nonneg, default=0.0)
    cost_flags(p)
    p.add_argument("--p", type=_positive(float), default=1e-4)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--replay", type=lambda s: tuple(int(x) for x in s.split(",")), metavar="NB,NBP,NBPP")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        sys.stderr.write(f"error [{args.command}]: {exc}\n")
        return 2
    except (ValueError, pipeline.StageError) as exc:
        sys.stderr.write(f"error [{args.command}]: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
