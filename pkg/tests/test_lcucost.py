import glob
import math
import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pawqpe import besim, io, lcucost, toyscf
from pawqpe.factorize import effective_one_body, factorize, truncate

DATA = os.path.join(os.path.dirname(__file__), "data")
INSTANCES = sorted(p for p in glob.glob(os.path.join(DATA, "*.json")) if "hydrogenic" not in p)


def qroam_reference(L, n_b, beth, k):
    """Direct transcription of the tradeoff formula with exact rationals."""
    q = Fraction(L * n_b, k)
    m = 0
    while Fraction(2) ** m < q:
        m += 1
    return math.ceil(q) + n_b * beth * (k - 1), n_b * beth * k + m


def qroam_table():
    rng = np.random.default_rng(2024)
    rows = []
    while len(rows) < 50:
        L = int(rng.integers(1, 20_000))
        n_b = int(rng.integers(1, 200))
        beth = int(rng.integers(4, 33))
        k = 2 ** int(rng.integers(0, 12))
        rows.append((L, n_b, beth, k))
    return rows


# Hand-evaluated entries of the tradeoff formula.
FROZEN_QROAM = [
    ((1024, 1, 160, 4), (736, 648)),
    ((1, 1, 1, 1), (1, 1)),
    ((3, 5, 2, 2), (8 + 10, 20 + 3)),
    ((100, 10, 20, 8), (125 + 1400, 1600 + 7)),
    ((10_000, 160, 20, 16), (100_000 + 48_000, 51_200 + 17)),
]


@pytest.mark.parametrize("args,expected", FROZEN_QROAM)
def test_qroam_frozen(args, expected):
    assert lcucost.qroam_cost(*args) == expected


@pytest.mark.parametrize("row", qroam_table())
def test_qroam_matches_exact_formula(row):
    assert lcucost.qroam_cost(*row) == qroam_reference(*row)


def test_qroam_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        lcucost.qroam_cost(10, 2, 20, 3)
    with pytest.raises(ValueError):
        lcucost.CostConfig(kr=6)


@settings(max_examples=60, deadline=None)
@given(L=st.integers(1, 50_000), n_b=st.integers(1, 300), beth=st.integers(1, 40))
def test_optimal_kr_is_local_minimum_and_within_tight_bound(L, n_b, beth):
    k = lcucost.optimal_kr(L, n_b, beth)
    c = lcucost.qroam_cost(L, n_b, beth, k)[0]
    assert c <= lcucost.qroam_cost(L, n_b, beth, 2 * k)[0]
    if k > 1:
        assert c <= lcucost.qroam_cost(L, n_b, beth, k // 2)[0]
    x, y = L * n_b, n_b * beth
    assert c <= 3 / math.sqrt(2) * math.sqrt(x * y) + 1


def test_ceil_log2():
    assert [lcucost.ceil_log2(x) for x in (1, 2, 3, 4, 5, 1024, 1025)] == [0, 1, 2, 2, 3, 10, 11]
    assert lcucost.ceil_log2(Fraction(5, 2)) == 2


def test_qpe_iterations():
    assert lcucost.qpe_iterations(1.0, math.pi / 2) == 1
    assert lcucost.qpe_iterations(10.0, 1.6e-3) == math.ceil(math.pi * 10 / (2 * 1.6e-3))
    with pytest.raises(ValueError):
        lcucost.qpe_iterations(1.0, 0.0)


@pytest.fixture(scope="module")
def fh():
    return factorize(toyscf.synthetic_instance(4, seed=8, n_paw=2, n_a=3))


def test_lambda_dual_path(fh):
    lam = lcucost.lambda_total(fh)
    assert abs(lam.two_body - lam.two_body_by_factor) <= 1e-12 * lam.two_body
    assert lam.total == pytest.approx(lam.one_body + lam.two_body)
    assert lam.one_body == pytest.approx(np.abs(np.linalg.eigvalsh(fh.one_body.h_prime)).sum())


def test_lambda_xi_definition(fh):
    lam = lcucost.lambda_total(fh)
    xi = np.zeros((4, 4))
    for s in fh.soft:
        if s.gnorm > 0:
            xi += 8 * np.pi / (fh.volume * s.gnorm**2) * np.outer(np.abs(s.f), np.abs(s.f))
    np.testing.assert_allclose(lam.xi, xi, rtol=1e-13)
    assert lam.soft == pytest.approx(xi.sum() / 4)


def test_identity_origin_factor_is_excluded(fh):
    # the G=0 even factor is the identity and is absorbed into the constant
    lam = lcucost.lambda_total(fh)
    assert lam.soft_zero == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("path", INSTANCES, ids=os.path.basename)
def test_lambda_bounds_spectrum(path):
    inst = io.load_instance(path)
    fh = factorize(inst)
    kappa = toyscf.kappa_oracle(inst)
    n = inst.n_orbitals
    for ne in range(1, 2 * n):
        fock = besim.FockSpace(n, ne)
        H = besim.fock_hamiltonian_direct(effective_one_body(inst.h, kappa), kappa, inst.constant, fock)
        assert lcucost.lambda_total(fh).total >= besim.spectral_halfwidth(H)


def test_gamma_counts(fh):
    L, nominal, nonzero = lcucost.gamma(fh, 20)
    assert L == fh.n_pw + 2 * 6
    assert nominal == L * 16 * 20
    assert nonzero == fh.surviving_items() * 4 * 20
    tr = truncate(fh, 0.2)
    assert lcucost.gamma(tr, 20)[2] < nonzero


def test_qpe_cost_breakdown(fh):
    rep = lcucost.qpe_cost(fh, lcucost.CostConfig())
    assert rep.toffolis_per_iteration == sum(rep.breakdown["toffolis_per_iteration"].values())
    assert rep.logical_qubits == sum(rep.breakdown["logical_qubits"].values())
    assert rep.toffoli_total == rep.iterations * rep.toffolis_per_iteration
    assert rep.breakdown["logical_qubits"]["control"] == lcucost.CONTROL_QUBITS
    assert rep.kr_chosen == lcucost.optimal_kr(rep.L, 4, 20)
    forced = lcucost.qpe_cost(fh, lcucost.CostConfig(kr=1))
    assert forced.kr_chosen == 1 and forced.qroam_toffolis >= rep.qroam_toffolis


def test_loglog_slope():
    x = [2, 4, 8, 16, 32]
    assert lcucost.loglog_slope(x, [3 * v**2.5 for v in x]) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        lcucost.loglog_slope([1, 2, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        lcucost.loglog_slope([1, 2, 3, 4], [1, 0, 3, 4])


def test_scaling_table_csv():
    table = lcucost.lambda_scaling_study(lambda n: toyscf.synthetic_instance(n, seed=1, n_paw=0), [2, 3, 4, 5])
    text = table.to_csv()
    assert text.splitlines()[0].startswith("size,")
    assert "# slope lambda_two_body" in text
    with pytest.raises(ValueError):
        lcucost.lambda_scaling_study(lambda n: None, [1, 2])
