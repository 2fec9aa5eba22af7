"""Regenerate the instance and radial fixtures in this directory."""

from pathlib import Path

import numpy as np

from pawqpe import io, toyscf, upaw_radial

HERE = Path(__file__).parent


def main():
    instances = {
        "synthetic_nb3.json": toyscf.synthetic_instance(3, seed=1, n_paw=1, n_a=2),
        "synthetic_nb4_two_blocks.json": toyscf.synthetic_instance(4, seed=2, n_paw=2, n_a=3),
        "synthetic_nb5_na4.json": toyscf.synthetic_instance(5, seed=3, n_paw=1, n_a=4, n_occ=2),
        "h4_nb4.json": toyscf.h4_like_instance(4),
        "diamond_prim_nb4.json": toyscf.diamond_like_instance((1, 1, 1), 2),
    }
    for name, inst in instances.items():
        io.write_json(io.instance_to_dict(inst), HERE / name)
    ch = upaw_radial.hydrogenic_channels(r_max=20.0, n_points=4001)
    io.write_json(io.radial_channels_to_dict(ch), HERE / "hydrogenic_1s2s.json")


if __name__ == "__main__":
    main()
