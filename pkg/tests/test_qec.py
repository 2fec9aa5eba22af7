import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pawqpe import qec


def distance_by_search(config, n_toff, n_qubits):
    """First admissible d whose logical error satisfies the budget inequality."""
    d = 1
    while True:
        if not (config.odd_only and d % 2 == 0):
            if 3 * n_toff * n_qubits * config.A * (config.p_phys / config.p_thr) ** ((d + 1) / 2) <= config.p_fail_log:
                return d
        d += 1


def test_fast_block_tiles():
    for n in range(1, 500):
        assert qec.fast_block_tiles(n) == 2 * n + math.ceil(math.sqrt(8 * n) - 1e-12) + 1
    assert qec.fast_block_tiles(2) == 9
    with pytest.raises(ValueError):
        qec.fast_block_tiles(0)


def test_code_distance_known_value():
    assert qec.code_distance(qec.QecConfig(), 1e12, 1000) == 17


@settings(max_examples=200, deadline=None)
@given(
    n_toff=st.floats(1e3, 1e18),
    n_qubits=st.integers(1, 10**7),
    p=st.floats(1e-6, 5e-3),
    odd=st.booleans(),
)
def test_distance_matches_search(n_toff, n_qubits, p, odd):
    cfg = qec.QecConfig(p_phys=p, odd_only=odd)
    assert qec.code_distance(cfg, n_toff, n_qubits) == distance_by_search(cfg, n_toff, n_qubits)


def test_above_threshold_rejected():
    with pytest.raises(ValueError, match="below threshold"):
        qec.QecConfig(p_phys=0.02)
    with pytest.raises(ValueError):
        qec.QecConfig(p_fail_log=0.0)


@pytest.mark.parametrize(
    "n_q,n_t,distance,qubits",
    [(13313, 7.33e13, 19, 19_471_034), (148937, 5.23e14, 21, 263_427_127)],
)
def test_anchor_values(n_q, n_t, distance, qubits):
    res = qec.physical_resources(qec.QecConfig(), n_q, n_t)
    assert res.code_distance == distance
    assert res.physical_qubits_total == qubits
    n_l = qec.fast_block_tiles(n_q)
    assert res.physical_qubits_total == (2 * distance**2 - 1) * n_l + res.factory_qubits
    assert res.msd_failure <= 0.001
    assert res.logical_failure <= 0.009


def test_factory_selection_and_count():
    cfg = qec.QecConfig()
    res = qec.physical_resources(cfg, 1000, 1e9)
    # 7.2e-14 * 1e9 is far below the distillation budget, so the small factory wins
    assert res.factory.startswith("(15-to-1)_{7,3,3}")
    assert res.factories_count == math.ceil(36.1 / (3 * res.code_distance))
    assert res.runtime_cycles == 3 * 10**9 * res.code_distance


def test_no_factory_is_an_error(tmp_path):
    path = tmp_path / "cat.json"
    path.write_text(json.dumps({"factories": [{"name": "weak", "output_error": 1e-6, "footprint_qubits": 10, "cycles_per_state": 5}]}))
    cfg = qec.QecConfig(factory_catalog=qec.load_catalog(path))
    with pytest.raises(ValueError, match="no factory"):
        qec.physical_resources(cfg, 100, 1e12)


def test_catalog_missing_field(tmp_path):
    path = tmp_path / "cat.json"
    path.write_text(json.dumps({"factories": [{"name": "x"}]}))
    with pytest.raises(ValueError, match="/factories/0"):
        qec.load_catalog(path)


def test_bundled_catalog():
    cat = qec.load_catalog()
    assert len(cat) == 2
    assert all(f.footprint_qubits > 0 and f.cycles_per_state > 0 for f in cat)


@settings(max_examples=50, deadline=None)
@given(n_q=st.integers(1, 10**6), log_t=st.floats(6, 14))
def test_resources_monotone_in_toffolis(n_q, log_t):
    cfg = qec.QecConfig()
    a = qec.physical_resources(cfg, n_q, 10**log_t)
    b = qec.physical_resources(cfg, n_q, 10 ** (log_t + 1))
    assert b.code_distance >= a.code_distance
    assert b.physical_qubits_total >= a.physical_qubits_total - a.factory_qubits
    assert np.isfinite(a.runtime_seconds)
