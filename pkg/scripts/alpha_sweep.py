"""Print the alpha-family AlgEig bounds for the shear-layer start field.

The diffusive bound should not move with alpha; the convective one bottoms
out near alpha = 0 on every mesh.
"""
import argparse

import numpy as np

from romstep import pipeline
from romstep.config import CaseConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--meshes", default="10,20,40,80")
    ap.add_argument("--Re", type=float, default=100.0)
    args = ap.parse_args()
    cfg = CaseConfig(alpha_meshes=[int(n) for n in args.meshes.split(",")], alpha_Re=args.Re)

    _, rows = pipeline.alpha_sweep_table(cfg)
    rows = np.array(rows)
    for n in cfg.alpha_meshes:
        sel = rows[rows[:, 0] == n]
        best = sel[np.argmin(sel[:, 3])]
        print(f"N={n:3d}  diffusive {sel[:, 2].min():.6g}..{sel[:, 2].max():.6g}  "
              f"convective min {best[3]:.6g} at alpha={best[1]:+.2f}")


if __name__ == "__main__":
    main()
