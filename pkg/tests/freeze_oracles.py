"""Recompute the frozen reference values: python3 tests/freeze_oracles.py"""
import json
from pathlib import Path

import mpmath as mp

import oracles as o


def c(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


def main():
    out = {
        "j0_1": float(o.j0_series(1)),
        "y0_1": float(o.y0_series(1)),
        "j0_zero": float(o.j0_first_zero()),
        "hankel0_1": c(o.j0_series(1) + 1j * o.y0_series(1)),
        "green_free_2d_r1": c(o.green_free(1, 2)),
        "green_free_3d_r1": c(o.green_free(1, 3)),
        "dirichlet_2d_x01_y02": c(0.25j * (o.hankel0(1) - o.hankel0(3))),
        "spectral_hat_3d": c(o.spectral_hat(mp.sqrt(2), 1, 1, 3, 1, 0)),
        "selfcell_2d_h005": c(o.selfcell_polar(mp.mpf("0.05"))),
        "dtn_kernel_rho2": c(o.dtn_closed_form(mp.mpf(2))),
        "correction": [],
    }
    cases = [(2, 1.0, 0.5, 0.8), (2, 1.0, 3.0, 0.3), (2, 0.3, 0.5, 0.8), (2, 0.5 + 0.5j, 3.0, 0.3),
             (2, 3.0, 0.5, 0.8), (2, 0.05j, 3.0, 0.3), (3, 1.0, 0.5, 0.8), (3, 1.0, 3.0, 0.3),
             (3, 0.5 + 0.5j, 0.5, 0.8), (3, 3.0, 3.0, 0.3), (2, 0.5, 60.0, 0.2), (3, 0.5, 20.0, 0.2)]
    for d, th, rho, s in cases:
        th = complex(th)
        val = o.correction_contour(d, 1, th, rho, s)
        out["correction"].append({"d": d, "theta": [th.real, th.imag], "rho": rho, "s": s, "value": c(val)})
        print(d, th, rho, s, val, flush=True)
    path = Path(__file__).parent / "data" / "frozen.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
