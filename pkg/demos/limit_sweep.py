"""Stiffening sweep toward the incompressible, fully repulsive limit.

Runs the repulsion model on the three-band data for a sequence of
(eps, m, alpha) with eps and alpha shrinking and m growing, and tabulates
the overlap, the congestion-law residual and the mixedness at the final
time.  The overlap and the congestion residual shrink along the sweep;
the mixedness is dominated by the O(h) front band at this resolution.

At the default 32^2 the stiffest tuple exceeds its CFL budget (the
repulsion pressure is violent on under-resolved overlap) and the sweep
annotates the failure instead of aborting; run with n = 64 for a clean
three-row table.

Usage: python demos/limit_sweep.py [outdir] [n]
"""

import sys
from dataclasses import replace
from pathlib import Path

from tissueflow.diagnostics import limit_sweep, write_sweep_csv
from tissueflow.grid import GridSpec
from tissueflow.harness import PRESETS, initial_densities


def main(outdir="demo_out/limit_sweep", n=32):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = replace(PRESETS["fig3-esvm"], grid=GridSpec(-1, 1, -1, 1, n, n))

    def make_initial(spec):
        return initial_densities(replace(cfg, grid=spec))

    rows = limit_sweep(make_initial, cfg.grid, cfg.params,
                       [(0.1, 30.0, 1e-3), (0.05, 60.0, 5e-4),
                        (0.02, 120.0, 2e-4)],
                       t_end=0.05,
                       ctrl_kwargs={"dt": cfg.dt, "cfl_number": cfg.cfl})
    print(f"{'eps':>6} {'m':>6} {'alpha':>8} {'overlap':>10} "
          f"{'cong.res':>10} {'mixedness':>10}")
    for r in rows:
        if "error" in r:
            print(f"{r['eps']:>6} {r['m']:>6} {r['alpha']:>8} "
                  f"FAILED: {r['error']}")
        else:
            print(f"{r['eps']:>6} {r['m']:>6} {r['alpha']:>8} "
                  f"{r['overlap']:>10.5f} {r['comp_residual']:>10.5f} "
                  f"{r['mixedness']:>10.5f}")
    write_sweep_csv(rows, out / "sweep.csv")
    print(f"table written to {out}/sweep.csv")


if __name__ == "__main__":
    main(*sys.argv[1:2], *map(int, sys.argv[2:3]))
