"""Surface-code physical resource model.

Logical error per qubit per logical cycle is ``A (p / p_thr)^((d + 1) / 2)``.
A Toffoli is consumed every 3 logical cycles of ``d`` code cycles each.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources


def fast_block_tiles(n: int) -> int:
    """Tile count ``2n + ceil(sqrt(8n)) + 1`` of the fast-block layout."""
    if n < 1:
        raise ValueError("need at least one logical qubit")
    ceil_sqrt = math.isqrt(8 * n - 1) + 1
    return 2 * n + ceil_sqrt + 1


@dataclass(frozen=True)
class Factory:
    name: str
    output_error: float
    footprint_qubits: int
    cycles_per_state: float
    distances: tuple = ()
    source: str = ""


def load_catalog(path=None) -> list:
    """Read a factory catalog; the bundled one when ``path`` is None."""
    if path is None:
        text = resources.files("pawqpe").joinpath("data/factories.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    out = []
    for i, entry in enumerate(data["factories"]):
        try:
            out.append(
                Factory(
                    entry["name"],
                    float(entry["output_error"]),
                    int(entry["footprint_qubits"]),
                    float(entry["cycles_per_state"]),
                    tuple(entry.get("distances", ())),
                    entry.get("source", ""),
                )
            )
        except KeyError as exc:
            raise ValueError(f"/factories/{i}: missing field {exc}") from None
    return out


@dataclass
class QecConfig:
    p_phys: float = 1e-4
    p_thr: float = 0.01
    A: float = 0.1
    p_fail_log: float = 0.009
    p_fail_msd: float = 0.001
    cycles_per_toffoli: int = 3
    cycle_time_s: float = 1e-6
    odd_only: bool = True
    factory_catalog: list = field(default_factory=load_catalog)

    def __post_init__(self):
        for name in ("p_phys", "p_thr", "p_fail_log", "p_fail_msd"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.p_phys >= self.p_thr:
            raise ValueError("below threshold required: p_phys must be smaller than p_thr")


@dataclass
class PhysicalResources:
    code_distance: int
    logical_tiles: int
    factory: str
    factories_count: int
    factory_qubits: int
    physical_qubits_total: int
    runtime_cycles: int
    runtime_seconds: float
    logical_failure: float
    msd_failure: float

    def to_dict(self) -> dict:
        return asdict(self)


def logical_error_rate(config: QecConfig, d: int) -> float:
    return config.A * (config.p_phys / config.p_thr) ** ((d + 1) / 2)


def code_distance(config: QecConfig, n_toff, n_qubits) -> int:
    """Smallest admissible ``d`` with ``A (p/p_thr)^((d+1)/2) <= p_log / (3 N_T N_Q)``."""
    if n_toff <= 0 or n_qubits <= 0:
        raise ValueError("n_toff and n_qubits must be positive")
    if config.p_phys >= config.p_thr:
        raise ValueError("below threshold required: p_phys must be smaller than p_thr")
    budget = config.p_fail_log / (config.cycles_per_toffoli * n_toff * n_qubits)
    step = 2 if config.odd_only else 1
    t = math.log(budget / config.A) / math.log(config.p_phys / config.p_thr)
    d = max(1, math.ceil(2 * t - 1))
    if config.odd_only and d % 2 == 0:
        d += 1
    while logical_error_rate(config, d) > budget:
        d += step
    while d - step >= 1 and logical_error_rate(config, d - step) <= budget:
        d -= step
    return d


def physical_resources(config: QecConfig, logical_qubits: int, n_toff) -> PhysicalResources:
    if logical_qubits <= 0 or n_toff <= 0:
        raise ValueError("logical_qubits and n_toff must be positive")
    n_l = fast_block_tiles(int(logical_qubits))
    d = code_distance(config, n_toff, n_l)
    target = config.p_fail_msd / n_toff
    ok = [f for f in config.factory_catalog if f.output_error <= target]
    if not ok:
        best = min(config.factory_catalog, key=lambda f: f.output_error, default=None)
        desc = "empty catalog" if best is None else f"best available {best.name} at {best.output_error:.2e}"
        raise ValueError(f"no factory reaches output error {target:.2e} ({desc})")
    window = config.cycles_per_toffoli * d
    fac = min(ok, key=lambda f: (f.footprint_qubits * math.ceil(f.cycles_per_state / window), f.name))
    count = math.ceil(fac.cycles_per_state / window)
    fac_qubits = count * fac.footprint_qubits
    total = (2 * d * d - 1) * n_l + fac_qubits
    cycles = config.cycles_per_toffoli * int(math.ceil(n_toff)) * d
    p_log = config.cycles_per_toffoli * n_toff * n_l * logical_error_rate(config, d)
    return PhysicalResources(
        code_distance=d,
        logical_tiles=n_l,
        factory=fac.name,
        factories_count=count,
        factory_qubits=fac_qubits,
        physical_qubits_total=total,
        runtime_cycles=cycles,
        runtime_seconds=cycles * config.cycle_time_s,
        logical_failure=p_log,
        msd_failure=n_toff * fac.output_error,
    )
