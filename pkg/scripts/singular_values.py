"""Singular-value decay of a stored snapshot archive (after `romstep fom`)."""
import sys

from romstep import pipeline
from romstep.config import load_config
from romstep.fom import SnapshotArchive
from romstep.pod import build_basis

cfg = load_config(sys.argv[1])
setup = pipeline.build_case(cfg)
arch = SnapshotArchive.load(pipeline.Paths(cfg).archive)
basis = build_basis(arch, setup.ops, min(arch.K, cfg.M_max), cfg.M_bc)
s = basis.sigma / basis.sigma[0]
for k in (1, 2, 4, 8, 16, 32, 64, 128, 200, 256):
    if k <= s.size:
        print(f"sigma_{k}/sigma_1 = {s[k - 1]:.3e}")
print(f"{arch.K} snapshots")
