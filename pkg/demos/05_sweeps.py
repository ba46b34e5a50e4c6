# # Sweeps, CSV and heatmaps
#
# Every sweep returns a table whose rows stay in grid order whatever the
# number of worker processes, with the generating settings in its header.

import tempfile
from pathlib import Path

from tddyn import GameParams
from tddyn.introspection import sweep_intro
from tddyn.output import read_csv, write_csv, write_heatmap_svg
from tddyn.wright_fisher import WFConfig, replicate_means, sweep_wf

out = Path(tempfile.mkdtemp())

# A small Wright-Fisher grid with a few replicates per cell.

cfg = WFConfig(game=GameParams(2, 100, 2), N=50, generations=300, seed=7)
res = sweep_wf([0.01, 0.3, 0.9], [1, 10, 30], [1.0], 3, cfg, threads=2)
write_csv(res, out / "wf.csv")
for key, mean in sorted(replicate_means(res).items()):
    print(key, round(mean, 1))

# The header carries everything needed to rerun the sweep.

print(read_csv(out / "wf.csv").metadata["base_seed"])

write_heatmap_svg(res, "mu", "delta", "mean_claim", out / "wf.svg", (2, 100), title="rho = 1")

# The exact introspection sweep needs no seed at all.

grid = sweep_intro([2, 10, 40], [0.0, 0.1, 1.0], GameParams(2, 100, 2))
write_heatmap_svg(grid, "R", "beta", "average_claim", out / "intro.svg", (2, 100))
print(sorted(p.name for p in out.iterdir()))
