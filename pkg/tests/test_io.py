import copy
import glob
import json
import os

import numpy as np
import pytest

from pawqpe import io, toyscf
from pawqpe.factorize import factorize, reconstruct_kappa
from pawqpe.upaw_radial import fit_pseudo_radial, hydrogenic_channels

DATA = os.path.join(os.path.dirname(__file__), "data")
INSTANCES = sorted(p for p in glob.glob(os.path.join(DATA, "*.json")) if "hydrogenic" not in p)


@pytest.mark.parametrize("path", INSTANCES, ids=os.path.basename)
def test_instance_round_trip_is_byte_identical(path):
    with open(path) as fh:
        text = fh.read()
    assert io.dumps(io.instance_to_dict(io.load_instance(path))) == text


def test_explicit_mode_round_trip():
    inst = toyscf.synthetic_instance(3, seed=5)
    explicit = toyscf.HamiltonianInstance(inst.h, inst.pair_density, inst.kernel, inst.paw_blocks, 0.7)
    text = io.dumps(io.instance_to_dict(explicit))
    back = io.instance_from_dict(json.loads(text))
    assert io.dumps(io.instance_to_dict(back)) == text
    np.testing.assert_array_equal(toyscf.kappa_oracle(back), toyscf.kappa_oracle(explicit))


def test_user_kernel_round_trip():
    inst = toyscf.instance_from_orbitals(toyscf.synthetic_instance(3, seed=5).orbitals, regularization="user", v0=0.0)
    back = io.instance_from_dict(json.loads(io.dumps(io.instance_to_dict(inst))))
    assert back.kernel.v0 == 0.0 and back.kernel.regularization == "user"


def test_factors_round_trip():
    fh = factorize(toyscf.synthetic_instance(3, seed=6, n_paw=2))
    text = io.dumps(io.factors_to_dict(fh))
    back = io.factors_from_dict(json.loads(text))
    assert io.dumps(io.factors_to_dict(back)) == text
    np.testing.assert_array_equal(reconstruct_kappa(back), reconstruct_kappa(fh))


def test_setup_round_trip():
    ch = hydrogenic_channels(n_points=2001)
    s = fit_pseudo_radial(ch, 1.5, 3, 2)
    doc = json.loads(io.dumps(io.setup_to_dict(s, ch)))
    s2, ch2 = io.setup_from_dict(doc)
    assert io.dumps(io.setup_to_dict(s2, ch2)) == io.dumps(doc)


@pytest.fixture(scope="module")
def doc():
    with open(INSTANCES[0]) as fh:
        return json.load(fh)


def _expect(doc, pointer, match):
    with pytest.raises(io.SchemaError, match=match) as info:
        io.instance_from_dict(doc)
    assert info.value.pointer == pointer


def test_non_hermitian_h_rejected(doc):
    bad = copy.deepcopy(doc)
    bad["h"]["im"][1] += 0.1
    _expect(bad, "/h", "Hermitian")


def test_asymmetric_ctensor_rejected(doc):
    bad = copy.deepcopy(doc)
    bad["paw_blocks"][0]["ctensor_flat"][1] += 0.1
    _expect(bad, "/paw_blocks/0/ctensor_flat", "symmetric")


def test_non_orthonormal_orbitals_rejected(doc):
    bad = copy.deepcopy(doc)
    bad["pair_density"]["coefficients"]["re"][0] += 0.1
    _expect(bad, "/pair_density/coefficients", "orthonormal")


def test_broken_pair_density_symmetry_rejected():
    inst = toyscf.synthetic_instance(3, seed=5)
    explicit = toyscf.HamiltonianInstance(inst.h, inst.pair_density, inst.kernel)
    bad = io.instance_to_dict(explicit)
    bad["pair_density"]["coeffs"]["im"][40] += 0.1
    _expect(bad, "/pair_density/coeffs", "C_pq")


@pytest.mark.parametrize(
    "mutate,pointer",
    [
        (lambda d: d.update(version=99), "/version"),
        (lambda d: d.pop("h"), "/h"),
        (lambda d: d["pair_density"].update(mode="guess"), "/pair_density/mode"),
        (lambda d: d["kernel"].update(regularization="ewald"), "/kernel"),
        (lambda d: d["paw_blocks"][0].update(n_a=3), "/paw_blocks/0/ctensor_flat"),
        (lambda d: d["h"].update(n=5), "/h"),
    ],
)
def test_schema_violations_carry_pointer(doc, mutate, pointer):
    bad = copy.deepcopy(doc)
    mutate(bad)
    with pytest.raises(io.SchemaError) as info:
        io.instance_from_dict(bad)
    assert info.value.pointer == pointer


def test_malformed_factors_document():
    with pytest.raises(io.SchemaError):
        io.factors_from_dict({"kind": "factorized_hamiltonian", "version": 1, "one_body": {}})
    with pytest.raises(io.SchemaError, match="/kind"):
        io.factors_from_dict({"kind": "other"})


def test_invalid_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(io.SchemaError, match="invalid JSON"):
        io.load_instance(p)
