"""JSON file formats for instances, factorizations, radial setups and reports.

Complex arrays are stored as ``{"shape": [...], "re": [...], "im": [...]}``
with row-major flat lists. Output is canonical (sorted keys, fixed indent) so
that writing a loaded canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .factorize import FactorizedHamiltonian, OneBodyTerm, PawFactor, SoftFactor
from .pwbasis import Cell, PlaneWaveBasis, coulomb_kernel, difference_grid
from .toyscf import HamiltonianInstance, OrbitalSet, PairDensityTensor, PawBlock, pair_density
from .upaw_radial import PseudoRadialSetup, RadialFunction

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Malformed document; ``pointer`` is a JSON pointer to the offending item."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def write_json(obj, path=None) -> str:
    text = dumps(obj)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def sha256_file(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def encode_array(a) -> dict:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"shape": list(a.shape), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}
    return {"shape": list(a.shape), "re": a.ravel().tolist(), "im": [0.0] * a.size}


def decode_array(d, pointer: str, real: bool = False) -> np.ndarray:
    if not isinstance(d, dict):
        raise SchemaError(pointer, "expected an object with re/im arrays")
    for key in ("re", "im"):
        if key not in d:
            raise SchemaError(f"{pointer}/{key}", "missing")
    re = np.asarray(d["re"], dtype=float)
    im = np.asarray(d["im"], dtype=float)
    if re.shape != im.shape:
        raise SchemaError(pointer, "re and im lengths differ")
    if "shape" in d:
        shape = tuple(int(x) for x in d["shape"])
    elif "n" in d:
        shape = (int(d["n"]), int(d["n"]))
    else:
        raise SchemaError(pointer, "missing shape")
    if int(np.prod(shape)) != re.size:
        raise SchemaError(pointer, f"{re.size} entries do not fit shape {list(shape)}")
    if real:
        if np.any(im != 0):
            raise SchemaError(f"{pointer}/im", "expected a real array")
        return re.reshape(shape)
    out = np.empty(shape, dtype=complex)
    out.real = re.reshape(shape)
    out.imag = im.reshape(shape)
    return out


def _get(doc, key, pointer):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{pointer}/{key}", "missing")
    return doc[key]


# --- instances ---------------------------------------------------------------

def instance_to_dict(inst: HamiltonianInstance) -> dict:
    cell = inst.cell
    n = inst.n_orbitals
    doc = {
        "version": SCHEMA_VERSION,
        "cell": {"lattice_bohr": cell.lattice.tolist()},
        "basis": {"cutoff_ev": inst.cutoff_ev},
        "constant_ha": float(inst.constant),
        "h": {"n": n, "re": inst.h.real.ravel().tolist(), "im": inst.h.imag.ravel().tolist()},
        "kernel": {"regularization": inst.kernel.regularization, "v0": float(inst.kernel.v0)},
        "paw_blocks": [
            {
                "atom_id": int(b.atom_id),
                "n_a": b.n_a,
                "proj_overlaps": encode_array(b.proj_overlaps),
                "ctensor_flat": b.ctensor.ravel().tolist(),
            }
            for b in inst.paw_blocks
        ],
    }
    if inst.orbitals is not None:
        o = inst.orbitals
        doc["pair_density"] = {
            "mode": "from_orbitals",
            "miller": o.basis.miller.tolist(),
            "coefficients": encode_array(o.coefficients),
            "eigenvalues": o.eigenvalues.tolist(),
            "n_occ": o.n_occ,
        }
    else:
        pd = inst.pair_density
        doc["pair_density"] = {
            "mode": "explicit",
            "grid_miller": pd.grid.miller.tolist(),
            "coeffs": encode_array(pd.raw),
        }
    return doc


def instance_from_dict(doc) -> HamiltonianInstance:
    version = _get(doc, "version", "")
    if version != SCHEMA_VERSION:
        raise SchemaError("/version", f"unsupported schema version {version!r}")
    try:
        cell = Cell(np.asarray(_get(_get(doc, "cell", ""), "lattice_bohr", "/cell"), dtype=float))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("/cell/lattice_bohr", str(exc)) from None
    cutoff = _get(doc, "basis", "").get("cutoff_ev")
    h = decode_array(_get(doc, "h", ""), "/h")
    pd_doc = _get(doc, "pair_density", "")
    mode = _get(pd_doc, "mode", "/pair_density")
    orbitals = None
    if mode == "from_orbitals":
        basis = PlaneWaveBasis.from_miller(cell, _get(pd_doc, "miller", "/pair_density"), cutoff)
        coef = decode_array(_get(pd_doc, "coefficients", "/pair_density"), "/pair_density/coefficients")
        orbitals = OrbitalSet(basis, coef, np.asarray(_get(pd_doc, "eigenvalues", "/pair_density"), dtype=float), int(_get(pd_doc, "n_occ", "/pair_density")))
        err = orbitals.orthonormality_error()
        if err > 1e-10:
            raise SchemaError("/pair_density/coefficients", f"orbitals are not orthonormal (deviation {err:.2e})")
        pair = pair_density(orbitals)
    elif mode == "explicit":
        grid = PlaneWaveBasis.from_miller(cell, _get(pd_doc, "grid_miller", "/pair_density"))
        pair = PairDensityTensor(grid, decode_array(_get(pd_doc, "coeffs", "/pair_density"), "/pair_density/coeffs"))
        err = pair.symmetry_error()
        if err > 1e-10:
            raise SchemaError("/pair_density/coeffs", f"pair density violates C_pq(G)^* = C_qp(-G) (deviation {err:.2e})")
    else:
        raise SchemaError("/pair_density/mode", f"unknown mode {mode!r}")
    kdoc = _get(doc, "kernel", "")
    reg = _get(kdoc, "regularization", "/kernel")
    try:
        kernel = coulomb_kernel(pair.grid, reg, kdoc.get("v0") if reg == "user" else None)
    except ValueError as exc:
        raise SchemaError("/kernel", str(exc)) from None
    blocks = []
    for i, b in enumerate(_get(doc, "paw_blocks", "")):
        ptr = f"/paw_blocks/{i}"
        n_a = int(_get(b, "n_a", ptr))
        P = decode_array(_get(b, "proj_overlaps", ptr), f"{ptr}/proj_overlaps")
        flat = np.asarray(_get(b, "ctensor_flat", ptr), dtype=float)
        if flat.size != n_a**4:
            raise SchemaError(f"{ptr}/ctensor_flat", f"expected {n_a ** 4} entries")
        blk = PawBlock(int(_get(b, "atom_id", ptr)), P, flat.reshape((n_a,) * 4))
        if blk.n_a != n_a:
            raise SchemaError(f"{ptr}/proj_overlaps", "column count differs from n_a")
        sym = blk.symmetry_error()
        if sym > 1e-10:
            raise SchemaError(f"{ptr}/ctensor_flat", f"ctensor is not symmetric (deviation {sym:.2e})")
        blocks.append(blk)
    try:
        return HamiltonianInstance(h, pair, kernel, blocks, float(doc.get("constant_ha", 0.0)), orbitals, cutoff)
    except ValueError as exc:
        raise SchemaError("/h" if "Hermitian" in str(exc) else "", str(exc)) from None


def load_instance(path) -> HamiltonianInstance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from None
    return instance_from_dict(doc)


# --- factorizations ----------------------------------------------------------

def factors_to_dict(fh: FactorizedHamiltonian) -> dict:
    ob = fh.one_body
    return {
        "version": SCHEMA_VERSION,
        "kind": "factorized_hamiltonian",
        "constant_ha": fh.constant,
        "n_orbitals": fh.n_orbitals,
        "n_pw": fh.n_pw,
        "n_pw_orbital": fh.n_pw_orbital,
        "volume": fh.volume,
        "g_min": fh.g_min,
        "paw_sizes": list(fh.paw_sizes),
        "truncation_delta": fh.truncation_delta,
        "floor": fh.floor,
        "one_body": {
            "h": encode_array(ob.h),
            "h_corrected": encode_array(ob.h_corrected),
            "h_prime": encode_array(ob.h_prime),
            "eps_prime": np.asarray(ob.eps_prime).tolist(),
        },
        "soft": [
            {"miller": list(s.miller), "gnorm": s.gnorm, "j": s.j, "weight": s.weight, "f": s.f.tolist(), "u": encode_array(s.u)}
            for s in fh.soft
        ],
        "paw": [
            {"atom_id": p.atom_id, "pair": list(p.pair), "eps": p.eps, "sign": p.sign, "f": p.f.tolist(), "u": encode_array(p.u)}
            for p in fh.paw
        ],
    }


def factors_from_dict(doc) -> FactorizedHamiltonian:
    try:
        return _factors_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise SchemaError("", f"malformed factorization document: missing or invalid {exc}") from None


def _factors_from_dict(doc) -> FactorizedHamiltonian:
    if doc.get("kind") != "factorized_hamiltonian":
        raise SchemaError("/kind", "not a factorized Hamiltonian document")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaError("/version", f"unsupported schema version {doc.get('version')!r}")
    ob = _get(doc, "one_body", "")
    one = OneBodyTerm(
        decode_array(ob["h"], "/one_body/h"),
        decode_array(ob["h_corrected"], "/one_body/h_corrected"),
        decode_array(ob["h_prime"], "/one_body/h_prime"),
        np.asarray(ob["eps_prime"], dtype=float),
    )
    soft = [
        SoftFactor(tuple(s["miller"]), float(s["gnorm"]), int(s["j"]), float(s["weight"]), np.asarray(s["f"], dtype=float), decode_array(s["u"], f"/soft/{i}/u"))
        for i, s in enumerate(_get(doc, "soft", ""))
    ]
    paw = [
        PawFactor(int(p["atom_id"]), tuple(p["pair"]), float(p["eps"]), int(p["sign"]), np.asarray(p["f"], dtype=float), decode_array(p["u"], f"/paw/{i}/u"))
        for i, p in enumerate(_get(doc, "paw", ""))
    ]
    return FactorizedHamiltonian(
        constant=float(doc["constant_ha"]),
        one_body=one,
        soft=soft,
        paw=paw,
        n_orbitals=int(doc["n_orbitals"]),
        n_pw=int(doc["n_pw"]),
        volume=float(doc["volume"]),
        g_min=float(doc["g_min"]),
        paw_sizes=[int(x) for x in doc["paw_sizes"]],
        n_pw_orbital=doc.get("n_pw_orbital"),
        truncation_delta=doc.get("truncation_delta"),
        floor=doc.get("floor"),
    )


def load_factors(path) -> FactorizedHamiltonian:
    with open(path) as fh:
        return factors_from_dict(json.load(fh))


# --- radial setups -----------------------------------------------------------

def radial_channels_from_dict(doc) -> list:
    out = []
    for i, ch in enumerate(_get(doc, "channels", "")):
        ptr = f"/channels/{i}"
        values = ch.get("ae_values", ch.get("values"))
        if values is None:
            raise SchemaError(f"{ptr}/values", "missing")
        try:
            out.append(RadialFunction(np.asarray(_get(ch, "grid", ptr), dtype=float), np.asarray(values, dtype=float), int(ch.get("l", 0))))
        except ValueError as exc:
            raise SchemaError(ptr, str(exc)) from None
    return out


def radial_channels_to_dict(channels) -> dict:
    return {"channels": [{"l": c.l, "grid": c.grid.tolist(), "values": c.values.tolist()} for c in channels]}


def setup_to_dict(setup: PseudoRadialSetup, channels) -> dict:
    return {
        "channels": [
            {
                "l": ch.l,
                "grid": ch.grid.tolist(),
                "ae_values": ch.values.tolist(),
                "coefficients": np.asarray(c).tolist(),
                "r_a": setup.r_a,
                "P": setup.P,
                "M": setup.M,
            }
            for ch, c in zip(channels, setup.coefficients)
        ],
        "g_max": setup.g_max,
        "overlap_diff": setup.overlap_diff.tolist(),
        "residuals": setup.residuals,
    }


def setup_from_dict(doc):
    channels = radial_channels_from_dict(doc)
    chs = doc["channels"]
    if not chs:
        raise SchemaError("/channels", "empty")
    first = chs[0]
    setup = PseudoRadialSetup(
        float(first["r_a"]),
        int(first["P"]),
        int(first["M"]),
        [c.l for c in channels],
        [np.asarray(c["coefficients"], dtype=float) for c in chs],
        dict(doc.get("residuals", {})),
        np.asarray(doc.get("overlap_diff", np.zeros((len(chs), len(chs)))), dtype=float),
        doc.get("g_max"),
    )
    return setup, channels
